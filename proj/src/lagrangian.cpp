#include "epred/lagrangian.hpp"

#include "epred/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace epred {

namespace {

constexpr double kSelfTestTol = 1e-6;

struct Registry {
    std::mutex mutex;
    std::map<std::string, DensityFactory> factories;

    Registry() {
        factories["spin_glass"] = [](const LieGroup& g) { return spin_glass(g); };
        factories["anisotropic_sigma"] = [](const LieGroup& g) {
            Eigen::VectorXd inertia = Eigen::VectorXd::LinSpaced(g.algebra_dim(), 1.0, 2.0);
            return anisotropic_sigma(g, std::move(inertia), 0.5);
        };
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

double rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

std::vector<AlgebraElement> negated(Sigma2 s2) {
    std::vector<AlgebraElement> out;
    out.reserve(s2.size());
    for (const auto& v : s2) out.push_back(-v);
    return out;
}

}  // namespace

DensitySelfTest self_test(const DensitySpec& spec, int algebra_dim, int space_dim, std::uint64_t seed, int samples) {
    Rng rng(seed);
    DensitySelfTest r;
    const double h = 1e-5;
    for (int n = 0; n < samples; ++n) {
        const double t = rng.uniform(0.0, 1.0);
        const AlgebraElement s1(rng.vector(algebra_dim));
        std::vector<AlgebraElement> s2;
        for (int i = 0; i < space_dim; ++i) s2.emplace_back(rng.vector(algebra_dim));

        Eigen::VectorXd fd1(algebra_dim);
        for (int k = 0; k < algebra_dim; ++k) {
            const AlgebraElement e = h * AlgebraElement::unit(algebra_dim, k);
            fd1[k] = (spec.value(t, s1 + e, s2) - spec.value(t, s1 - e, s2)) / (2 * h);
        }
        const Eigen::VectorXd an1 = spec.d_sigma1(t, s1, s2).coeffs();
        r.sigma1_rel_error = std::max(r.sigma1_rel_error, rel_error(an1, fd1));

        const auto an2 = spec.d_sigma2(t, s1, s2);
        Eigen::VectorXd fd2(algebra_dim * space_dim), an2v(algebra_dim * space_dim);
        for (int i = 0; i < space_dim; ++i) {
            for (int k = 0; k < algebra_dim; ++k) {
                auto plus = s2, minus = s2;
                plus[i] += h * AlgebraElement::unit(algebra_dim, k);
                minus[i] -= h * AlgebraElement::unit(algebra_dim, k);
                fd2[i * algebra_dim + k] = (spec.value(t, s1, plus) - spec.value(t, s1, minus)) / (2 * h);
                an2v[i * algebra_dim + k] = an2.at(i)[k];
            }
        }
        r.sigma2_rel_error = std::max(r.sigma2_rel_error, rel_error(an2v, fd2));

        if (spec.kinetic) {
            r.kinetic_rel_error = std::max(r.kinetic_rel_error, rel_error(an1, *spec.kinetic * s1.coeffs()));
        }
    }
    r.passed = r.sigma1_rel_error <= kSelfTestTol && r.sigma2_rel_error <= kSelfTestTol &&
               r.kinetic_rel_error <= kSelfTestTol;
    return r;
}

DensitySpec spin_glass(const LieGroup& group) {
    const int m = group.algebra_dim();
    DensitySpec spec;
    spec.name = "spin_glass";
    spec.value = [](double, const AlgebraElement& s1, Sigma2 s2) {
        double v = s1.coeffs().squaredNorm();
        for (const auto& c : s2) v -= c.coeffs().squaredNorm();
        return 0.5 * v;
    };
    spec.d_sigma1 = [](double, const AlgebraElement& s1, Sigma2) { return DualAlgebraElement(s1.coeffs()); };
    spec.d_sigma2 = [](double, const AlgebraElement&, Sigma2 s2) {
        std::vector<DualAlgebraElement> out;
        out.reserve(s2.size());
        for (const auto& c : s2) out.emplace_back(-c.coeffs());
        return out;
    };
    spec.kinetic = Eigen::MatrixXd::Identity(m, m);
    return spec;
}

DensitySpec anisotropic_sigma(const LieGroup& group, Eigen::VectorXd inertia, double stiffness) {
    if (inertia.size() != group.algebra_dim()) throw SpecError("anisotropic_sigma: inertia has the wrong size");
    if ((inertia.array() <= 0.0).any() || !(stiffness > 0.0)) {
        throw SpecError("anisotropic_sigma: inertia and stiffness must be positive");
    }
    DensitySpec spec;
    spec.name = "anisotropic_sigma";
    spec.value = [inertia, stiffness](double, const AlgebraElement& s1, Sigma2 s2) {
        double v = s1.coeffs().dot(inertia.cwiseProduct(s1.coeffs()));
        for (const auto& c : s2) v -= stiffness * c.coeffs().squaredNorm();
        return 0.5 * v;
    };
    spec.d_sigma1 = [inertia](double, const AlgebraElement& s1, Sigma2) {
        return DualAlgebraElement(inertia.cwiseProduct(s1.coeffs()));
    };
    spec.d_sigma2 = [stiffness](double, const AlgebraElement&, Sigma2 s2) {
        std::vector<DualAlgebraElement> out;
        out.reserve(s2.size());
        for (const auto& c : s2) out.emplace_back(-stiffness * c.coeffs());
        return out;
    };
    spec.kinetic = Eigen::MatrixXd(inertia.asDiagonal());
    return spec;
}

void register_density(const std::string& name, DensityFactory factory) {
    auto& r = registry();
    const std::lock_guard lock(r.mutex);
    r.factories[name] = std::move(factory);
}

DensitySpec make_density(const std::string& name, const LieGroup& group) {
    auto& r = registry();
    DensityFactory f;
    {
        const std::lock_guard lock(r.mutex);
        const auto it = r.factories.find(name);
        if (it == r.factories.end()) throw SpecError("unknown lagrangian density '" + name + "'");
        f = it->second;
    }
    return f(group);
}

std::vector<std::string> density_names() {
    auto& r = registry();
    const std::lock_guard lock(r.mutex);
    std::vector<std::string> names;
    for (const auto& [name, _] : r.factories) names.push_back(name);
    return names;
}

double reduced_l(const DensitySpec& spec, double t, const ReducedState& s) {
    require_same_grid(s.nu.grid(), s.gamma.grid(), "reduced_l");
    const Grid& g = s.nu.grid();
    std::vector<double> dens(g.site_count());
    parallel_for(g.site_count(), [&](std::size_t m) {
        dens[m] = spec.value(t, s.nu[m], negated(s.gamma.at(m)));
    });
    return integrate(g, dens);
}

double instantaneous_density(const LieGroup& group, const DensitySpec& spec, double t, const GroupField& chi,
                             const AlgebraElement& nu_site, const ConnectionForm& gamma, std::size_t site) {
    const Grid& g = chi.grid();
    const Eigen::MatrixXd inv = group.inverse(chi[site]).matrix();
    std::vector<AlgebraElement> beta(g.dim());
    for (int i = 0; i < g.dim(); ++i) {
        const Eigen::MatrixXd d =
            (chi[g.neighbor(site, i, +1)].matrix() - chi[g.neighbor(site, i, -1)].matrix()) / (2.0 * g.spacing(i));
        beta[i] = group.vee(d * inv) - group.Ad(chi[site], gamma(site, i));
    }
    return spec.value(t, nu_site, beta);
}

double instantaneous_L(const LieGroup& group, const DensitySpec& spec, double t, const GroupField& chi,
                       const AlgebraField& nu_prime, const ConnectionForm& gamma) {
    require_same_grid(chi.grid(), nu_prime.grid(), "instantaneous_L");
    require_same_grid(chi.grid(), gamma.grid(), "instantaneous_L");
    const Grid& g = chi.grid();
    std::vector<double> dens(g.site_count());
    parallel_for(g.site_count(), [&](std::size_t m) {
        dens[m] = instantaneous_density(group, spec, t, chi, nu_prime[m], gamma, m);
    });
    return integrate(g, dens);
}

DualField delta_l_delta_nu(const DensitySpec& spec, double t, const ReducedState& s) {
    const Grid& g = s.nu.grid();
    std::vector<DualAlgebraElement> out(g.site_count());
    parallel_for(g.site_count(), [&](std::size_t m) { out[m] = spec.d_sigma1(t, s.nu[m], negated(s.gamma.at(m))); });
    return DualField(g, std::move(out));
}

DualVectorField delta_l_delta_gamma(const DensitySpec& spec, double t, const ReducedState& s) {
    const Grid& g = s.nu.grid();
    DualVectorField out(g, DualAlgebraElement());
    parallel_for(g.site_count(), [&](std::size_t m) {
        const auto d2 = spec.d_sigma2(t, s.nu[m], negated(s.gamma.at(m)));
        for (int i = 0; i < g.dim(); ++i) out(m, i) = -d2.at(i);
    });
    return out;
}

namespace {

void check_eps(double eps) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw std::invalid_argument("fd_gradient_oracle: eps must lie in [1e-7, 1e-3]");
}

double checked(double v) {
    if (!std::isfinite(v)) throw std::domain_error("fd_gradient_oracle: functional returned a non-finite value");
    return v;
}

}  // namespace

DualField fd_gradient_oracle(const std::function<double(const AlgebraField&)>& functional, const AlgebraField& x,
                             double eps) {
    check_eps(eps);
    const Grid& g = x.grid();
    const double scale = 1.0 / (2.0 * eps * g.cell_volume());
    std::vector<DualAlgebraElement> out(g.site_count());
    AlgebraField probe = x;
    for (std::size_t s = 0; s < g.site_count(); ++s) {
        const int m = x[s].size();
        Eigen::VectorXd grad(m);
        for (int k = 0; k < m; ++k) {
            probe[s].coeffs()[k] = x[s][k] + eps;
            const double fp = checked(functional(probe));
            probe[s].coeffs()[k] = x[s][k] - eps;
            const double fm = checked(functional(probe));
            probe[s].coeffs()[k] = x[s][k];
            grad[k] = (fp - fm) * scale;
        }
        out[s] = DualAlgebraElement(std::move(grad));
    }
    return DualField(g, std::move(out));
}

DualVectorField fd_gradient_oracle(const std::function<double(const ConnectionForm&)>& functional,
                                   const ConnectionForm& x, double eps) {
    check_eps(eps);
    const Grid& g = x.grid();
    const double scale = 1.0 / (2.0 * eps * g.cell_volume());
    DualVectorField out(g, DualAlgebraElement());
    ConnectionForm probe = x;
    for (std::size_t s = 0; s < g.site_count(); ++s) {
        for (int i = 0; i < g.dim(); ++i) {
            const int m = x(s, i).size();
            Eigen::VectorXd grad(m);
            for (int k = 0; k < m; ++k) {
                probe(s, i).coeffs()[k] = x(s, i)[k] + eps;
                const double fp = checked(functional(probe));
                probe(s, i).coeffs()[k] = x(s, i)[k] - eps;
                const double fm = checked(functional(probe));
                probe(s, i).coeffs()[k] = x(s, i)[k];
                grad[k] = (fp - fm) * scale;
            }
            out(s, i) = DualAlgebraElement(std::move(grad));
        }
    }
    return out;
}

}  // namespace epred
