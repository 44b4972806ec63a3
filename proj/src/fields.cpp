#include "epred/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace epred {

ConnectionForm gauge_act(const LieGroup& group, const GroupField& lambda, const ConnectionForm& gamma) {
    require_same_grid(lambda.grid(), gamma.grid(), "gauge_act");
    const Grid& g = gamma.grid();
    ConnectionForm out = left_log_derivative(group, lambda);
    parallel_for(g.site_count(), [&](std::size_t s) {
        const GroupElement inv = group.inverse(lambda[s]);
        for (int i = 0; i < g.dim(); ++i) out(s, i) += group.Ad(inv, gamma(s, i));
    });
    return out;
}

ConnectionForm cov_diff(const LieGroup& group, const ConnectionForm& gamma, const AlgebraField& zeta) {
    require_same_grid(gamma.grid(), zeta.grid(), "cov_diff");
    ConnectionForm out = d_alg(zeta);
    const Grid& g = gamma.grid();
    parallel_for(g.site_count(), [&](std::size_t s) {
        for (int i = 0; i < g.dim(); ++i) out(s, i) += group.bracket(gamma(s, i), zeta[s]);
    });
    return out;
}

DualField cov_div(const LieGroup& group, const ConnectionForm& gamma, const DualVectorField& w) {
    require_same_grid(gamma.grid(), w.grid(), "cov_div");
    DualField out = div_dual(w);
    const Grid& g = gamma.grid();
    parallel_for(g.site_count(), [&](std::size_t s) {
        for (int i = 0; i < g.dim(); ++i) out[s] -= group.ad_star(gamma(s, i), w(s, i));
    });
    return out;
}

Curvature::Curvature(Grid grid, std::vector<AlgebraElement> values) : grid_(std::move(grid)), values_(std::move(values)) {}

const AlgebraElement& Curvature::operator()(std::size_t site, int i, int j) const {
    grid_.check_axis(i);
    grid_.check_axis(j);
    if (values_.empty()) throw GridError("curvature is empty on a 1-D grid");
    const int d = grid_.dim();
    return values_[(site * d + i) * d + j];
}

double Curvature::max_norm() const {
    double m = 0.0;
    for (const auto& v : values_) m = std::max(m, v.norm());
    return m;
}

Curvature curvature(const LieGroup& group, const ConnectionForm& gamma) {
    const Grid& g = gamma.grid();
    const int d = g.dim();
    if (d < 2) return Curvature(g, {});
    std::vector<SiteField<AlgebraElement>> comps;
    for (int i = 0; i < d; ++i) comps.push_back(gamma.component(i));
    // dgamma[i][j] = D_i gamma_j
    std::vector<std::vector<AlgebraField>> dgamma(d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) dgamma[i].push_back(central_diff(comps[j], i));
    }
    std::vector<AlgebraElement> values(g.site_count() * d * d);
    parallel_for(g.site_count(), [&](std::size_t s) {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                values[(s * d + i) * d + j] =
                    dgamma[i][j][s] - dgamma[j][i][s] + group.bracket(gamma(s, i), gamma(s, j));
            }
        }
    });
    return Curvature(g, std::move(values));
}

ConnectionForm advect_exact(const LieGroup& group, const GroupField& chi, const ConnectionForm& gamma0) {
    require_same_grid(chi.grid(), gamma0.grid(), "advect_exact");
    return gauge_act(group, pointwise_inverse(group, chi), gamma0);
}

GroupField reconstruct_step(const LieGroup& group, const GroupField& chi, const AlgebraField& nu, double dt) {
    require_same_grid(chi.grid(), nu.grid(), "reconstruct_step");
    const double reach = std::abs(dt) * max_norm(nu);
    if (!(reach < std::numbers::pi / 2)) {
        throw StepTooLarge("reconstruct_step: dt * max|nu| = " + std::to_string(reach) + " >= pi/2");
    }
    std::vector<GroupElement> out(chi.size());
    parallel_for(chi.size(), [&](std::size_t s) { out[s] = group.exp_map(dt * nu[s]) * chi[s]; });
    return GroupField(chi.grid(), std::move(out));
}

ReducedJet jet_from_state(const ReducedState& s) { return {s.nu, -s.gamma}; }

ReducedState state_from_jet(const ReducedJet& j, double t) { return {j.sigma1, -j.sigma2, t}; }

}  // namespace epred
