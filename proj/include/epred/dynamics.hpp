#pragma once

#include "epred/lagrangian.hpp"
#include "epred/profiles.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace epred {

/// Time derivatives of the reduced state.
struct Tendency {
    AlgebraField nu_dot;
    ConnectionForm gamma_dot;
};

/// Affine Euler-Poincare right-hand side:
///   d/dt (dl/dnu) = -ad*_nu (dl/dnu) + div^gamma (dl/dgamma),
///   d/dt gamma = -d^gamma nu.
/// nu_dot is recovered by inverting the site-local kinetic map.
Tendency aep_rhs(const LieGroup& group, const DensitySpec& spec, double t, const ReducedState& s);

struct Rk4Step {
    ReducedState next;
    /// nu at the four RK stages, used to advance the group path.
    std::array<AlgebraField, 4> stage_nu;
};

/// Classical four-stage explicit Runge-Kutta step on (nu, gamma).
ReducedState rk4_step(const LieGroup& group, const DensitySpec& spec, const ReducedState& s, double dt);
Rk4Step rk4_step_with_stages(const LieGroup& group, const DensitySpec& spec, const ReducedState& s, double dt);

/// chi <- exp(dt/6 nu_4) exp(dt/3 nu_3) exp(dt/3 nu_2) exp(dt/6 nu_1) chi,
/// one exponential-Euler substep per RK stage.
GroupField reconstruct_rk4(const LieGroup& group, const GroupField& chi, const std::array<AlgebraField, 4>& stage_nu,
                           double dt);

/// Sampled solution. Samples are `dt` apart (the integrator step times the
/// output cadence).
struct Trajectory {
    double dt = 0.0;
    std::vector<double> times;
    std::vector<ReducedState> states;
    /// Reconstructed chi at every sample; empty when reconstruction is off.
    std::vector<GroupField> group_path;
    ConnectionForm gamma0;

    std::size_t size() const { return states.size(); }
    bool has_group_path() const { return !group_path.empty(); }
};

/// Invalid simulation or CLI configuration; `key` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Raised when a state stops being finite; carries the samples recorded so far.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(int step, Trajectory partial);
    int step() const { return step_; }
    const Trajectory& partial() const { return partial_; }

private:
    int step_;
    Trajectory partial_;
};

struct FieldInit {
    std::string profile = "zero";  // "zero" | "fourier" | "pure_gauge" (gamma0 only)
    FourierProfile fourier;
};

struct SimConfig {
    Grid grid;
    std::string group = "SO3";
    std::string lagrangian = "spin_glass";
    FieldInit nu0;
    FieldInit gamma0;
    double dt = 1e-3;
    int steps = 1;
    int cadence = 1;
    bool reconstruct = true;
};

AlgebraField initial_nu(const LieGroup& group, const SimConfig& cfg);
ConnectionForm initial_gamma0(const LieGroup& group, const SimConfig& cfg);

/// Checks the config invariants; throws ConfigError.
void validate(const LieGroup& group, const SimConfig& cfg);

Trajectory simulate(const LieGroup& group, const DensitySpec& spec, const SimConfig& cfg);

/// Legendre energy <dl/dnu, nu> - l.
double energy(const DensitySpec& spec, double t, const ReducedState& s);

/// Covariant Euler-Poincare residual at interior sample n:
///   D_t (dl/ds1) + div (dl/ds2) + ad*_{s1} (dl/ds1) + sum_i ad*_{s2_i} (dl/ds2)_i
/// with (s1, s2) = (nu, -gamma). With `abar`, evaluates the background form
///   D_t (dl/ds1) + div^abar (dl/ds2) + ad*_{s1} (dl/ds1) + sum_i ad*_{s2_i + abar_i} (dl/ds2)_i.
DualField covariant_residual(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj, std::size_t n,
                             const std::optional<ConnectionForm>& abar = std::nullopt);

/// Largest site magnitude of the individual terms of the covariant residual;
/// the natural scale for roundoff-level comparisons.
double covariant_residual_scale(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj, std::size_t n,
                                const std::optional<ConnectionForm>& abar = std::nullopt);

/// max site norm of the covariant residual at any sample; the ends use
/// second-order one-sided time differences.
double covariant_residual_max(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj, std::size_t n);

/// Independent Euler-Lagrange oracle: central FD derivative of the discrete
/// action sum_n dt L(t_n, chi_n, log(chi_{n+1} chi_n^{-1}) / dt, gamma0)
/// under chi_n(m) <- exp(+-eps e_k) chi_n(m), divided by dt * cell volume.
/// Returns the max over `probes` seeded random (step, site, direction)
/// triples, or over all of them when probes <= 0.
double variational_residual(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj, int probes,
                            double eps, std::uint64_t seed = 0);

struct CompatibilityReport {
    double advection_residual = 0.0;
    double curvature_max = 0.0;
    double exact_advect_gap = 0.0;
};

/// Advection residual max|D_t gamma + d^gamma nu| (centered in the interior,
/// second-order one-sided at the ends), curvature max and the gap to the
/// closed-form advected connection.
CompatibilityReport compatibility_monitor(const LieGroup& group, const Trajectory& traj, std::size_t n);

/// Maxima over interior samples of every monitor, as used by refinement studies.
struct TrajectoryMetrics {
    double variational_residual = 0.0;
    double covariant_residual = 0.0;
    double advection_residual = 0.0;
    double curvature_max = 0.0;
    double exact_advect_gap = 0.0;
};

/// The variational oracle dominates the cost; `with_variational = false` leaves it at 0.
TrajectoryMetrics trajectory_metrics(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj,
                                     int probes, double eps, std::uint64_t seed, bool with_variational = true);

}  // namespace epred
