#include "epred/profiles.hpp"

#include "epred/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace epred {

namespace {

struct Mode {
    std::vector<int> k;
    Eigen::MatrixXd cos_coeff;  // algebra_dim x components
    Eigen::MatrixXd sin_coeff;
};

std::vector<std::vector<int>> wave_vectors(int dim, int modes) {
    std::vector<std::vector<int>> out;
    if (dim == 1) {
        for (int k = 1; k <= modes; ++k) out.push_back({k});
        return out;
    }
    for (int kx = 0; kx <= modes; ++kx) {
        for (int ky = -modes; ky <= modes; ++ky) {
            if (kx == 0 && ky <= 0) continue;
            out.push_back({kx, ky});
        }
    }
    return out;
}

std::vector<Mode> draw_modes(int dim, int algebra_dim, int components, const FourierProfile& p) {
    Rng rng(p.seed);
    std::vector<Mode> out;
    for (auto& k : wave_vectors(dim, p.modes)) {
        Mode m;
        m.cos_coeff.resize(algebra_dim, components);
        m.sin_coeff.resize(algebra_dim, components);
        double k2 = 0.0;
        for (int c : k) k2 += static_cast<double>(c) * c;
        for (int c = 0; c < components; ++c) {
            for (int a = 0; a < algebra_dim; ++a) {
                m.cos_coeff(a, c) = rng.uniform(-1.0, 1.0) / k2;
                m.sin_coeff(a, c) = rng.uniform(-1.0, 1.0) / k2;
            }
        }
        m.k = std::move(k);
        out.push_back(std::move(m));
    }
    return out;
}

Eigen::MatrixXd evaluate(const Grid& grid, const std::vector<Mode>& modes, std::size_t site, int algebra_dim,
                         int components, double amplitude) {
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(algebra_dim, components);
    for (const auto& m : modes) {
        double phase = 0.0;
        for (int a = 0; a < grid.dim(); ++a) phase += 2.0 * std::numbers::pi * m.k[a] * grid.position(site, a) / grid.length(a);
        v += std::cos(phase) * m.cos_coeff + std::sin(phase) * m.sin_coeff;
    }
    return amplitude * v;
}

}  // namespace

void check_profile(const Grid& grid, const FourierProfile& p) {
    if (p.modes < 1) throw std::invalid_argument("profile modes must be >= 1");
    for (int n : grid.sizes()) {
        if (p.modes > n / 4) {
            throw std::invalid_argument("profile modes " + std::to_string(p.modes) + " exceed floor(N/4) for N = " +
                                        std::to_string(n));
        }
    }
}

AlgebraField fourier_algebra_field(const Grid& grid, int algebra_dim, const FourierProfile& p) {
    check_profile(grid, p);
    const auto modes = draw_modes(grid.dim(), algebra_dim, 1, p);
    std::vector<AlgebraElement> out(grid.site_count());
    for (std::size_t s = 0; s < grid.site_count(); ++s) {
        out[s] = AlgebraElement(Eigen::VectorXd(evaluate(grid, modes, s, algebra_dim, 1, p.amplitude).col(0)));
    }
    return AlgebraField(grid, std::move(out));
}

ConnectionForm fourier_connection(const Grid& grid, int algebra_dim, const FourierProfile& p) {
    check_profile(grid, p);
    const auto modes = draw_modes(grid.dim(), algebra_dim, grid.dim(), p);
    ConnectionForm out(grid, AlgebraElement());
    for (std::size_t s = 0; s < grid.site_count(); ++s) {
        const Eigen::MatrixXd v = evaluate(grid, modes, s, algebra_dim, grid.dim(), p.amplitude);
        for (int i = 0; i < grid.dim(); ++i) out(s, i) = AlgebraElement(Eigen::VectorXd(v.col(i)));
    }
    return out;
}

GroupField fourier_group_field(const LieGroup& group, const Grid& grid, const FourierProfile& p) {
    const AlgebraField xi = fourier_algebra_field(grid, group.algebra_dim(), p);
    std::vector<GroupElement> out(grid.site_count());
    for (std::size_t s = 0; s < grid.site_count(); ++s) out[s] = group.exp_map(xi[s]);
    return GroupField(grid, std::move(out));
}

ConnectionForm pure_gauge(const LieGroup& group, const Grid& grid, const FourierProfile& p) {
    const ConnectionForm zero(grid, AlgebraElement::zero(group.algebra_dim()));
    return gauge_act(group, fourier_group_field(group, grid, p), zero);
}

}  // namespace epred
