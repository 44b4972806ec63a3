#pragma once

#include "epred/lattice.hpp"

#include <stdexcept>
#include <vector>

namespace epred {

/// Dynamic reduced variables (nu, gamma) at time t.
struct ReducedState {
    AlgebraField nu;
    ConnectionForm gamma;
    double t = 0.0;
};

/// Covariant reduced jet: sigma1 (time part) and sigma2 (space part).
struct ReducedJet {
    AlgebraField sigma1;
    ConnectionForm sigma2;
};

/// Thrown by reconstruct_step when the per-step rotation leaves the
/// injectivity radius of exp.
class StepTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Affine action theta_Lambda(gamma) = Lambda^{-1} gamma Lambda + Lambda^{-1} d Lambda.
ConnectionForm gauge_act(const LieGroup& group, const GroupField& lambda, const ConnectionForm& gamma);

/// d^gamma zeta = d zeta + [gamma, zeta].
ConnectionForm cov_diff(const LieGroup& group, const ConnectionForm& gamma, const AlgebraField& zeta);

/// div^gamma w = div w - sum_i ad*_{gamma_i} w_i; the negative L2 adjoint of cov_diff.
DualField cov_div(const LieGroup& group, const ConnectionForm& gamma, const DualVectorField& w);

/// Curvature F_ij = D_i gamma_j - D_j gamma_i + [gamma_i, gamma_j] at every site.
/// Empty for 1-D grids.
class Curvature {
public:
    Curvature(Grid grid, std::vector<AlgebraElement> values);

    const Grid& grid() const { return grid_; }
    bool empty() const { return values_.empty(); }
    /// F_ij at `site`; antisymmetric in (i, j).
    const AlgebraElement& operator()(std::size_t site, int i, int j) const;
    double max_norm() const;

private:
    Grid grid_;
    std::vector<AlgebraElement> values_;  // site * dim * dim + i * dim + j
};

Curvature curvature(const LieGroup& group, const ConnectionForm& gamma);

/// Closed-form solution of the advection equation: theta_{chi^{-1}}(gamma0).
ConnectionForm advect_exact(const LieGroup& group, const GroupField& chi, const ConnectionForm& gamma0);

/// chi <- exp(dt * nu) chi at every site (one exponential-Euler substep of chi' = nu chi).
GroupField reconstruct_step(const LieGroup& group, const GroupField& chi, const AlgebraField& nu, double dt);

ReducedJet jet_from_state(const ReducedState& s);
ReducedState state_from_jet(const ReducedJet& j, double t = 0.0);

}  // namespace epred
