#include "epred/dynamics.hpp"

#include "epred/random.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace epred {

namespace {

constexpr std::array<double, 4> kRk4Weights{1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0};

ReducedState axpy(const ReducedState& s, double a, const Tendency& k, double t) {
    ReducedState out{s.nu, s.gamma, t};
    if (a != 0.0) {
        out.nu += a * k.nu_dot;
        out.gamma += a * k.gamma_dot;
    }
    return out;
}

bool finite(const ReducedState& s) { return all_finite(s.nu) && all_finite(s.gamma); }

// Weights of the time derivative at sample n: centered in the interior,
// second-order one-sided at the ends, first order with only two samples.
std::vector<std::pair<std::size_t, double>> time_stencil(std::size_t count, std::size_t n, double dt) {
    if (count < 2) return {};
    if (n > 0 && n + 1 < count) return {{n + 1, 0.5 / dt}, {n - 1, -0.5 / dt}};
    if (count == 2) return {{1, 1.0 / dt}, {0, -1.0 / dt}};
    if (n == 0) return {{0, -1.5 / dt}, {1, 2.0 / dt}, {2, -0.5 / dt}};
    return {{n, 1.5 / dt}, {n - 1, -2.0 / dt}, {n - 2, 0.5 / dt}};
}

void check_index(const Trajectory& traj, std::size_t n) {
    if (n >= traj.size()) throw std::out_of_range("trajectory sample index " + std::to_string(n) + " out of range");
}

DualField kinetic_momentum(const DensitySpec& spec, const Trajectory& traj, std::size_t k) {
    const ReducedState& s = traj.states[k];
    const ReducedJet j = jet_from_state(s);
    std::vector<DualAlgebraElement> out(s.nu.size());
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = spec.d_sigma1(s.t, j.sigma1[m], j.sigma2.at(m));
    return DualField(s.nu.grid(), std::move(out));
}

struct CovariantTerms {
    DualField dt_momentum;
    DualField divergence;  // div^abar of dl/ds2
    DualField coadjoint;   // ad* terms
};

CovariantTerms covariant_terms(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj,
                               std::size_t n, const std::optional<ConnectionForm>& abar) {
    const ReducedState& s = traj.states[n];
    const Grid& g = s.nu.grid();
    if (abar) require_same_grid(g, abar->grid(), "covariant_residual");
    const ReducedJet jet = jet_from_state(s);
    const int m_dim = group.algebra_dim();

    DualField dtm(g, DualAlgebraElement::zero(m_dim));
    for (const auto& [k, w] : time_stencil(traj.size(), n, traj.dt)) dtm += w * kinetic_momentum(spec, traj, k);

    DualVectorField d2(g, DualAlgebraElement());
    DualField m_n(g, DualAlgebraElement());
    for (std::size_t site = 0; site < g.site_count(); ++site) {
        m_n[site] = spec.d_sigma1(s.t, jet.sigma1[site], jet.sigma2.at(site));
        const auto v = spec.d_sigma2(s.t, jet.sigma1[site], jet.sigma2.at(site));
        for (int i = 0; i < g.dim(); ++i) d2(site, i) = v.at(i);
    }

    DualField div = div_dual(d2);
    DualField coad(g, DualAlgebraElement::zero(m_dim));
    for (std::size_t site = 0; site < g.site_count(); ++site) {
        coad[site] = group.ad_star(jet.sigma1[site], m_n[site]);
        for (int i = 0; i < g.dim(); ++i) {
            if (abar) {
                div[site] -= group.ad_star((*abar)(site, i), d2(site, i));
                coad[site] += group.ad_star(jet.sigma2(site, i) + (*abar)(site, i), d2(site, i));
            } else {
                coad[site] += group.ad_star(jet.sigma2(site, i), d2(site, i));
            }
        }
    }
    return {std::move(dtm), std::move(div), std::move(coad)};
}

}  // namespace

Tendency aep_rhs(const LieGroup& group, const DensitySpec& spec, double t, const ReducedState& s) {
    if (!spec.kinetic_invertible()) throw SpecError("aep_rhs: density '" + spec.name + "' has no invertible kinetic map");
    const Eigen::MatrixXd kinv = spec.kinetic->inverse();
    const DualField mom = delta_l_delta_nu(spec, t, s);
    const DualVectorField w = delta_l_delta_gamma(spec, t, s);
    DualField rho = cov_div(group, s.gamma, w);
    const Grid& g = s.nu.grid();
    std::vector<AlgebraElement> nu_dot(g.site_count());
    parallel_for(g.site_count(), [&](std::size_t m) {
        rho[m] -= group.ad_star(s.nu[m], mom[m]);
        nu_dot[m] = AlgebraElement(kinv * rho[m].coeffs());
    });
    return {AlgebraField(g, std::move(nu_dot)), -cov_diff(group, s.gamma, s.nu)};
}

Rk4Step rk4_step_with_stages(const LieGroup& group, const DensitySpec& spec, const ReducedState& s, double dt) {
    const double t = s.t;
    const ReducedState y1{s.nu, s.gamma, t};
    const Tendency k1 = aep_rhs(group, spec, t, y1);
    const ReducedState y2 = axpy(s, 0.5 * dt, k1, t + 0.5 * dt);
    const Tendency k2 = aep_rhs(group, spec, t + 0.5 * dt, y2);
    const ReducedState y3 = axpy(s, 0.5 * dt, k2, t + 0.5 * dt);
    const Tendency k3 = aep_rhs(group, spec, t + 0.5 * dt, y3);
    const ReducedState y4 = axpy(s, dt, k3, t + dt);
    const Tendency k4 = aep_rhs(group, spec, t + dt, y4);

    ReducedState next{s.nu, s.gamma, t + dt};
    const std::array<const Tendency*, 4> ks{&k1, &k2, &k3, &k4};
    for (int i = 0; i < 4; ++i) {
        next.nu += (kRk4Weights[i] * dt) * ks[i]->nu_dot;
        next.gamma += (kRk4Weights[i] * dt) * ks[i]->gamma_dot;
    }
    return {std::move(next), {y1.nu, y2.nu, y3.nu, y4.nu}};
}

ReducedState rk4_step(const LieGroup& group, const DensitySpec& spec, const ReducedState& s, double dt) {
    return rk4_step_with_stages(group, spec, s, dt).next;
}

GroupField reconstruct_rk4(const LieGroup& group, const GroupField& chi, const std::array<AlgebraField, 4>& stage_nu,
                           double dt) {
    GroupField out = chi;
    for (int i = 0; i < 4; ++i) out = reconstruct_step(group, out, stage_nu[i], kRk4Weights[i] * dt);
    return out;
}

DivergenceError::DivergenceError(int step, Trajectory partial)
    : std::runtime_error("simulation diverged at step " + std::to_string(step)), step_(step),
      partial_(std::move(partial)) {}

AlgebraField initial_nu(const LieGroup& group, const SimConfig& cfg) {
    const int m = group.algebra_dim();
    if (cfg.nu0.profile == "zero") return AlgebraField(cfg.grid, AlgebraElement::zero(m));
    if (cfg.nu0.profile == "fourier") {
        try {
            return fourier_algebra_field(cfg.grid, m, cfg.nu0.fourier);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("init.nu.modes", e.what());
        }
    }
    throw ConfigError("init.nu.profile", "unknown profile '" + cfg.nu0.profile + "'");
}

ConnectionForm initial_gamma0(const LieGroup& group, const SimConfig& cfg) {
    const int m = group.algebra_dim();
    const std::string& p = cfg.gamma0.profile;
    try {
        if (p == "zero") return ConnectionForm(cfg.grid, AlgebraElement::zero(m));
        if (p == "fourier") return fourier_connection(cfg.grid, m, cfg.gamma0.fourier);
        if (p == "pure_gauge") return pure_gauge(group, cfg.grid, cfg.gamma0.fourier);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("gamma0.modes", e.what());
    }
    throw ConfigError("gamma0.profile", "unknown profile '" + p + "'");
}

void validate(const LieGroup& group, const SimConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw ConfigError("time.dt", "must be positive");
    if (cfg.steps < 0) throw ConfigError("time.steps", "must be non-negative");
    if (cfg.cadence < 1) throw ConfigError("output.cadence", "must be >= 1");
    const double reach = cfg.dt * max_norm(initial_nu(group, cfg));
    if (!(reach < 0.1)) {
        throw ConfigError("time.dt", "dt * max|nu0| = " + std::to_string(reach) + " must be < 0.1");
    }
    initial_gamma0(group, cfg);
}

Trajectory simulate(const LieGroup& group, const DensitySpec& spec, const SimConfig& cfg) {
    validate(group, cfg);
    Trajectory traj;
    traj.dt = cfg.dt * cfg.cadence;
    traj.gamma0 = initial_gamma0(group, cfg);

    ReducedState state{initial_nu(group, cfg), traj.gamma0, 0.0};
    GroupField chi = constant_group_field(cfg.grid, group.identity());

    auto record = [&] {
        traj.times.push_back(state.t);
        traj.states.push_back(state);
        if (cfg.reconstruct) traj.group_path.push_back(chi);
    };
    record();
    for (int step = 1; step <= cfg.steps; ++step) {
        Rk4Step r = rk4_step_with_stages(group, spec, state, cfg.dt);
        // Exact time stamps avoid drift from repeated addition.
        r.next.t = step * cfg.dt;
        if (!finite(r.next)) throw DivergenceError(step, std::move(traj));
        if (cfg.reconstruct) {
            try {
                chi = reconstruct_rk4(group, chi, r.stage_nu, cfg.dt);
            } catch (const StepTooLarge&) {
                throw DivergenceError(step, std::move(traj));
            }
        }
        state = std::move(r.next);
        if (step % cfg.cadence == 0) record();
    }
    return traj;
}

double energy(const DensitySpec& spec, double t, const ReducedState& s) {
    return l2_pair(delta_l_delta_nu(spec, t, s), s.nu) - reduced_l(spec, t, s);
}

DualField covariant_residual(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj, std::size_t n,
                             const std::optional<ConnectionForm>& abar) {
    if (n < 1 || n + 1 >= traj.size()) {
        throw std::out_of_range("covariant_residual: sample " + std::to_string(n) + " is not interior");
    }
    CovariantTerms terms = covariant_terms(group, spec, traj, n, abar);
    return terms.dt_momentum + terms.divergence + terms.coadjoint;
}

double covariant_residual_scale(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj, std::size_t n,
                                const std::optional<ConnectionForm>& abar) {
    check_index(traj, n);
    const CovariantTerms terms = covariant_terms(group, spec, traj, n, abar);
    double scale = 0.0;
    for (std::size_t s = 0; s < terms.dt_momentum.size(); ++s) {
        scale = std::max(scale, terms.dt_momentum[s].norm() + terms.divergence[s].norm() + terms.coadjoint[s].norm());
    }
    return scale;
}

double covariant_residual_max(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj, std::size_t n) {
    check_index(traj, n);
    if (traj.size() < 2) return 0.0;
    CovariantTerms terms = covariant_terms(group, spec, traj, n, std::nullopt);
    return max_norm(terms.dt_momentum + terms.divergence + terms.coadjoint);
}

double variational_residual(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj, int probes,
                            double eps, std::uint64_t seed) {
    if (!traj.has_group_path()) throw std::invalid_argument("variational_residual: trajectory has no group path");
    const std::size_t count = traj.group_path.size();
    if (count < 3) throw std::invalid_argument("variational_residual: need at least one interior sample");
    const Grid& g = traj.gamma0.grid();
    const int m_dim = group.algebra_dim();
    const double dt = traj.dt;

    auto velocity = [&](const GroupElement& next, const GroupElement& cur) {
        return group.log_map(next * group.inverse(cur)) / dt;
    };
    std::vector<AlgebraField> vel;
    for (std::size_t n = 0; n + 1 < count; ++n) {
        std::vector<AlgebraElement> v(g.site_count());
        for (std::size_t s = 0; s < g.site_count(); ++s) v[s] = velocity(traj.group_path[n + 1][s], traj.group_path[n][s]);
        vel.emplace_back(g, std::move(v));
    }

    struct Probe {
        std::size_t step;
        std::size_t site;
        int dir;
    };
    const std::size_t interior = count - 2;
    const std::size_t total = interior * g.site_count() * static_cast<std::size_t>(m_dim);
    std::vector<Probe> list;
    auto decode = [&](std::size_t idx) {
        const int dir = static_cast<int>(idx % m_dim);
        idx /= m_dim;
        const std::size_t site = idx % g.site_count();
        return Probe{1 + idx / g.site_count(), site, dir};
    };
    if (probes <= 0 || static_cast<std::size_t>(probes) >= total) {
        for (std::size_t i = 0; i < total; ++i) list.push_back(decode(i));
    } else {
        Rng rng(seed);
        for (int i = 0; i < probes; ++i) list.push_back(decode(rng.index(total)));
    }

    double worst = 0.0;
    for (const Probe& p : list) {
        const std::size_t n = p.step;
        const GroupField& prev = traj.group_path[n - 1];
        const GroupField& next = traj.group_path[n + 1];
        GroupField cur = traj.group_path[n];
        const GroupElement original = cur[p.site];

        std::set<std::size_t> touched{p.site};
        for (int i = 0; i < g.dim(); ++i) {
            touched.insert(g.neighbor(p.site, i, +1));
            touched.insert(g.neighbor(p.site, i, -1));
        }

        double action[2];
        for (int side = 0; side < 2; ++side) {
            const double sign = side == 0 ? 1.0 : -1.0;
            cur[p.site] = group.exp_map(sign * eps * AlgebraElement::unit(m_dim, p.dir)) * original;
            // Only terms that depend on chi_n(site) change; the rest of the
            // action cancels in the difference.
            double local = instantaneous_density(group, spec, traj.times[n - 1], prev,
                                                 velocity(cur[p.site], prev[p.site]), traj.gamma0, p.site);
            for (std::size_t j : touched) {
                const AlgebraElement v = j == p.site ? velocity(next[j], cur[j]) : vel[n][j];
                local += instantaneous_density(group, spec, traj.times[n], cur, v, traj.gamma0, j);
            }
            action[side] = dt * g.cell_volume() * local;
        }
        const double deriv = (action[0] - action[1]) / (2.0 * eps) / (dt * g.cell_volume());
        worst = std::max(worst, std::abs(deriv));
    }
    return worst;
}

CompatibilityReport compatibility_monitor(const LieGroup& group, const Trajectory& traj, std::size_t n) {
    check_index(traj, n);
    const ReducedState& s = traj.states[n];
    CompatibilityReport r;
    if (traj.size() >= 2) {
        ConnectionForm res = cov_diff(group, s.gamma, s.nu);
        for (const auto& [k, w] : time_stencil(traj.size(), n, traj.dt)) res += w * traj.states[k].gamma;
        r.advection_residual = max_norm(res);
    }
    r.curvature_max = curvature(group, s.gamma).max_norm();
    if (traj.has_group_path()) {
        r.exact_advect_gap = max_norm(s.gamma - advect_exact(group, traj.group_path[n], traj.gamma0));
    }
    return r;
}

TrajectoryMetrics trajectory_metrics(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj,
                                     int probes, double eps, std::uint64_t seed, bool with_variational) {
    TrajectoryMetrics m;
    if (traj.size() < 3) throw std::invalid_argument("trajectory_metrics: need at least three samples");
    for (std::size_t n = 1; n + 1 < traj.size(); ++n) {
        m.covariant_residual = std::max(m.covariant_residual, max_norm(covariant_residual(group, spec, traj, n)));
        const CompatibilityReport c = compatibility_monitor(group, traj, n);
        m.advection_residual = std::max(m.advection_residual, c.advection_residual);
        m.curvature_max = std::max(m.curvature_max, c.curvature_max);
        m.exact_advect_gap = std::max(m.exact_advect_gap, c.exact_advect_gap);
    }
    if (with_variational && traj.has_group_path()) m.variational_residual = variational_residual(group, spec, traj, probes, eps, seed);
    return m;
}

}  // namespace epred
