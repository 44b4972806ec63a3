#pragma once

#include "epred/fields.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace epred {

/// Thrown when a density cannot be used for the requested operation.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Sigma2 = std::span<const AlgebraElement>;

/// Site-local reduced Lagrangian density l(t, sigma1, sigma2) with its fiber
/// derivatives.
struct DensitySpec {
    std::string name;
    std::function<double(double t, const AlgebraElement& s1, Sigma2 s2)> value;
    std::function<DualAlgebraElement(double t, const AlgebraElement& s1, Sigma2 s2)> d_sigma1;
    std::function<std::vector<DualAlgebraElement>(double t, const AlgebraElement& s1, Sigma2 s2)> d_sigma2;
    /// Matrix K with d_sigma1 = K sigma1; present only when K is invertible.
    std::optional<Eigen::MatrixXd> kinetic;
    bool autonomous = true;

    bool kinetic_invertible() const { return kinetic.has_value(); }
};

struct DensitySelfTest {
    double sigma1_rel_error = 0.0;
    double sigma2_rel_error = 0.0;
    double kinetic_rel_error = 0.0;  // |d_sigma1 - K sigma1| / |K sigma1|, 0 without K
    bool passed = false;
};

/// Compares the fiber derivatives with central differences of `value` at
/// seeded random points; passes at <= 1e-6 relative.
DensitySelfTest self_test(const DensitySpec& spec, int algebra_dim, int space_dim, std::uint64_t seed,
                          int samples = 20);

/// l = 1/2 (kappa(s1, s1) - sum_i kappa(s2_i, s2_i)).
DensitySpec spin_glass(const LieGroup& group);

/// l = 1/2 (s1^T diag(inertia) s1 - stiffness * sum_i |s2_i|^2). The
/// inertia breaks ad-invariance of the kinetic term, so ad* contributes.
DensitySpec anisotropic_sigma(const LieGroup& group, Eigen::VectorXd inertia, double stiffness);

using DensityFactory = std::function<DensitySpec(const LieGroup&)>;

/// Register a named density for lookup from configs; replaces an existing
/// entry with the same name.
void register_density(const std::string& name, DensityFactory factory);
/// Builds a registered density ("spin_glass" and "anisotropic_sigma" are built in).
DensitySpec make_density(const std::string& name, const LieGroup& group);
std::vector<std::string> density_names();

/// l(t, nu, gamma) = integral of spec.value(t, nu, -gamma).
double reduced_l(const DensitySpec& spec, double t, const ReducedState& s);

/// Integrand of the instantaneous Lagrangian at one site, with the tangent
/// given in right-trivialised form nu' = chi_dot chi^{-1}.
double instantaneous_density(const LieGroup& group, const DensitySpec& spec, double t, const GroupField& chi,
                             const AlgebraElement& nu_site, const ConnectionForm& gamma, std::size_t site);

/// L(t, chi, chi_dot, gamma) = integral of spec.value(t, nu', beta) with
/// beta_i = P(D_i chi chi^{-1}) - Ad(chi) gamma_i.
double instantaneous_L(const LieGroup& group, const DensitySpec& spec, double t, const GroupField& chi,
                       const AlgebraField& nu_prime, const ConnectionForm& gamma);

DualField delta_l_delta_nu(const DensitySpec& spec, double t, const ReducedState& s);
DualVectorField delta_l_delta_gamma(const DensitySpec& spec, double t, const ReducedState& s);

/// Central finite-difference gradient divided by the cell volume, so the
/// result pairs with l2_pair like an analytic functional derivative.
DualField fd_gradient_oracle(const std::function<double(const AlgebraField&)>& functional, const AlgebraField& x,
                             double eps);
DualVectorField fd_gradient_oracle(const std::function<double(const ConnectionForm&)>& functional,
                                   const ConnectionForm& x, double eps);

}  // namespace epred
