#include "epred/cli.hpp"

#include "epred/random.hpp"
#include "epred/snapshot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace epred::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json* find(const json& obj, const char* key) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

template <class T>
T read_as(const json& v, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) throw ConfigError(key, "expected a number");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) throw ConfigError(key, "expected a string");
        }
        return v.get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, e.what());
    }
}

template <class T>
T required(const json& obj, const char* name, const std::string& key) {
    const json* v = find(obj, name);
    if (!v) throw ConfigError(key, "missing required key");
    return read_as<T>(*v, key);
}

template <class T>
T optional_or(const json& obj, const char* name, const std::string& key, T fallback) {
    const json* v = find(obj, name);
    return v ? read_as<T>(*v, key) : fallback;
}

const json& section(const json& doc, const char* name, const std::string& key) {
    const json* v = find(doc, name);
    if (!v) throw ConfigError(key, "missing required key");
    if (!v->is_object()) throw ConfigError(key, "expected an object");
    return *v;
}

// "SO3" or {"name": "SO3"}.
std::string named(const json& doc, const char* name, const std::string& fallback) {
    const json* v = find(doc, name);
    if (!v) return fallback;
    if (v->is_string()) return v->get<std::string>();
    if (v->is_object()) return required<std::string>(*v, "name", std::string(name) + ".name");
    throw ConfigError(name, "expected a string or an object with \"name\"");
}

Grid parse_grid(const json& doc) {
    const json& g = section(doc, "grid", "grid");
    const int dim = required<int>(g, "dim", "grid.dim");
    if (dim < 1 || dim > 2) throw ConfigError("grid.dim", "must be 1 or 2");
    const json* sz = find(g, "sizes");
    if (!sz) throw ConfigError("grid.sizes", "missing required key");
    std::vector<int> sizes;
    if (sz->is_number_integer()) {
        sizes.assign(dim, sz->get<int>());
    } else if (sz->is_array()) {
        for (const auto& v : *sz) sizes.push_back(read_as<int>(v, "grid.sizes"));
    } else {
        throw ConfigError("grid.sizes", "expected an integer or an array");
    }
    if (static_cast<int>(sizes.size()) != dim) throw ConfigError("grid.sizes", "needs one entry per dimension");
    for (int n : sizes) {
        if (n < 4) throw ConfigError("grid.sizes", "every size must be >= 4");
    }
    std::vector<double> spacing;
    if (const json* sp = find(g, "spacing")) {
        if (sp->is_number()) {
            spacing.assign(dim, sp->get<double>());
        } else if (sp->is_array()) {
            for (const auto& v : *sp) spacing.push_back(read_as<double>(v, "grid.spacing"));
        } else {
            throw ConfigError("grid.spacing", "expected a number or an array");
        }
        if (static_cast<int>(spacing.size()) != dim) throw ConfigError("grid.spacing", "needs one entry per dimension");
        for (double h : spacing) {
            if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("grid.spacing", "must be positive");
        }
    } else {
        for (int n : sizes) spacing.push_back(1.0 / n);
    }
    return Grid(sizes, spacing);
}

FieldInit parse_init(const json& obj, const std::string& key) {
    if (!obj.is_object()) throw ConfigError(key, "expected an object");
    FieldInit f;
    f.profile = optional_or<std::string>(obj, "profile", key + ".profile", "zero");
    f.fourier.modes = optional_or<int>(obj, "modes", key + ".modes", 1);
    f.fourier.amplitude = optional_or<double>(obj, "amplitude", key + ".amplitude", 1.0);
    f.fourier.seed = optional_or<std::uint64_t>(obj, "seed", key + ".seed", 0);
    if (!std::isfinite(f.fourier.amplitude)) throw ConfigError(key + ".amplitude", "must be finite");
    return f;
}

GroupPtr make_group(const std::string& name) {
    try {
        return LieGroup::by_name(name);
    } catch (const LieError& e) {
        throw ConfigError("group", e.what());
    }
}

DensitySpec make_spec(const std::string& name, const LieGroup& group) {
    try {
        return make_density(name, group);
    } catch (const SpecError& e) {
        throw ConfigError("lagrangian", e.what());
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

json row_json(const SeriesRow& r) {
    return json{{"t", r.t},
                {"l_value", r.l_value},
                {"energy", r.energy},
                {"advection_residual", r.advection_residual},
                {"curvature_max", r.curvature_max},
                {"covariant_residual", r.covariant_residual},
                {"exact_advect_gap", r.exact_advect_gap}};
}

void write_outputs(const fs::path& outdir, const json& doc, const SimConfig& cfg, const LieGroup& group,
                   const DensitySpec& spec, const Trajectory& traj, const std::string& status,
                   std::optional<int> diverged_at) {
    fs::create_directories(outdir);
    const auto rows = series_rows(group, spec, traj);
    write_text(outdir / "series.csv", format_series(rows));
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const std::size_t step = n * static_cast<std::size_t>(cfg.cadence);
        json snap = to_snapshot(traj.states[n], group.name());
        snap["step"] = step;
        write_text(outdir / ("state_" + std::to_string(step) + ".json"), snap.dump() + "\n");
    }
    json report{{"config", doc}, {"status", status}, {"exit_status", status == "ok" ? kExitOk : kExitDiverged}};
    json jr = json::array();
    for (const auto& r : rows) jr.push_back(row_json(r));
    report["rows"] = std::move(jr);
    if (diverged_at) report["diverged_at_step"] = *diverged_at;
    write_text(outdir / "report.json", report.dump(2) + "\n");
}

}  // namespace

SimConfig parse_sim_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    SimConfig cfg;
    cfg.grid = parse_grid(doc);
    cfg.group = named(doc, "group", "SO3");
    cfg.lagrangian = named(doc, "lagrangian", "spin_glass");
    if (const json* init = find(doc, "init")) {
        if (!init->is_object()) throw ConfigError("init", "expected an object");
        if (const json* nu = find(*init, "nu")) cfg.nu0 = parse_init(*nu, "init.nu");
    }
    if (const json* g0 = find(doc, "gamma0")) cfg.gamma0 = parse_init(*g0, "gamma0");
    const json& time = section(doc, "time", "time");
    cfg.dt = required<double>(time, "dt", "time.dt");
    cfg.steps = required<int>(time, "steps", "time.steps");
    if (const json* out = find(doc, "output")) {
        cfg.cadence = optional_or<int>(*out, "cadence", "output.cadence", 1);
    }
    return cfg;
}

ConvergenceConfig parse_convergence_config(const json& doc) {
    ConvergenceConfig c;
    c.base = parse_sim_config(doc);
    const json& conv = section(doc, "convergence", "convergence");
    const json* sz = find(conv, "sizes");
    if (!sz) throw ConfigError("convergence.sizes", "missing required key");
    if (!sz->is_array()) throw ConfigError("convergence.sizes", "expected an array");
    for (const auto& v : *sz) c.sizes.push_back(read_as<int>(v, "convergence.sizes"));
    if (c.sizes.size() < 3) throw ConfigError("convergence.sizes", "a refinement ladder needs at least 3 levels");
    for (std::size_t i = 0; i < c.sizes.size(); ++i) {
        if (c.sizes[i] < 4) throw ConfigError("convergence.sizes", "every size must be >= 4");
        if (i > 0 && c.sizes[i] <= c.sizes[i - 1]) throw ConfigError("convergence.sizes", "sizes must increase");
    }
    c.probes = optional_or<int>(conv, "probes", "convergence.probes", 0);
    c.eps = optional_or<double>(conv, "eps", "convergence.eps", 1e-5);
    c.seed = optional_or<std::uint64_t>(conv, "seed", "convergence.seed", 0);
    c.min_order = optional_or<double>(conv, "min_order", "convergence.min_order", 1.7);
    if (!(c.eps > 0.0)) throw ConfigError("convergence.eps", "must be positive");
    if (const json* ms = find(conv, "metrics")) {
        if (!ms->is_array() || ms->empty()) throw ConfigError("convergence.metrics", "expected a non-empty array");
        for (const auto& v : *ms) {
            const auto name = read_as<std::string>(v, "convergence.metrics");
            if (std::find(kLadderMetrics.begin(), kLadderMetrics.end(), name) == kLadderMetrics.end()) {
                throw ConfigError("convergence.metrics", "unknown metric '" + name + "'");
            }
            c.metrics.push_back(name);
        }
    } else {
        c.metrics = kLadderMetrics;
    }
    if (c.base.steps < 2) throw ConfigError("time.steps", "refinement needs at least 2 steps");
    return c;
}

json read_json_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("<file>", "cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
    }
}

std::vector<SeriesRow> series_rows(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj) {
    std::vector<SeriesRow> rows;
    rows.reserve(traj.size());
    for (std::size_t n = 0; n < traj.size(); ++n) {
        const ReducedState& s = traj.states[n];
        SeriesRow r;
        r.t = traj.times[n];
        r.l_value = reduced_l(spec, s.t, s);
        r.energy = energy(spec, s.t, s);
        const CompatibilityReport c = compatibility_monitor(group, traj, n);
        r.advection_residual = c.advection_residual;
        r.curvature_max = c.curvature_max;
        r.exact_advect_gap = c.exact_advect_gap;
        r.covariant_residual = traj.size() >= 2 ? covariant_residual_max(group, spec, traj, n) : 0.0;
        rows.push_back(r);
    }
    return rows;
}

std::string format_series(const std::vector<SeriesRow>& rows) {
    std::string out = kSeriesHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += fmt(r.t) + ',' + fmt(r.l_value) + ',' + fmt(r.energy) + ',' + fmt(r.advection_residual) + ',' +
               fmt(r.curvature_max) + ',' + fmt(r.covariant_residual) + ',' + fmt(r.exact_advect_gap) + '\n';
    }
    return out;
}

double fit_order(const std::vector<double>& h, const std::vector<double>& values) {
    if (h.size() != values.size() || h.size() < 2) throw std::invalid_argument("fit_order: need >= 2 matching points");
    const double n = static_cast<double>(h.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(h[i] > 0.0) || !(values[i] > 0.0)) throw std::invalid_argument("fit_order: values must be positive");
        mx += std::log(h[i]);
        my += std::log(values[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double dx = std::log(h[i]) - mx;
        sxy += dx * (std::log(values[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

LadderResult run_ladder(const ConvergenceConfig& cfg) {
    const GroupPtr group = make_group(cfg.base.group);
    const DensitySpec spec = make_spec(cfg.base.lagrangian, *group);
    const Grid& base = cfg.base.grid;
    const double horizon = cfg.base.dt * cfg.base.steps;
    const double courant = cfg.base.dt / base.spacing(0);

    const auto selected = [&](const std::string& name) {
        return std::find(cfg.metrics.begin(), cfg.metrics.end(), name) != cfg.metrics.end();
    };
    const bool with_variational = selected("variational_residual");

    LadderResult out;
    for (int n : cfg.sizes) {
        SimConfig c = cfg.base;
        std::vector<double> spacing;
        for (int a = 0; a < base.dim(); ++a) spacing.push_back(base.length(a) / n);
        c.grid = Grid(std::vector<int>(base.dim(), n), spacing);
        const double h = spacing[0];
        c.steps = std::max(2, static_cast<int>(std::lround(horizon / (courant * h))));
        c.dt = horizon / c.steps;
        c.cadence = 1;
        c.reconstruct = true;
        validate(*group, c);
        const Trajectory traj = simulate(*group, spec, c);
        out.levels.push_back({n, h, c.dt, c.steps,
                              trajectory_metrics(*group, spec, traj, cfg.probes, cfg.eps, cfg.seed, with_variational)});
    }

    // Metrics below this on every level are exact zeros or roundoff (e.g. curvature in 1-D).
    constexpr double kRoundoff = 1e-13;
    const std::pair<const char*, double TrajectoryMetrics::*> metrics[] = {
        {"variational_residual", &TrajectoryMetrics::variational_residual},
        {"covariant_residual", &TrajectoryMetrics::covariant_residual},
        {"advection_residual", &TrajectoryMetrics::advection_residual},
        {"curvature_max", &TrajectoryMetrics::curvature_max},
        {"exact_advect_gap", &TrajectoryMetrics::exact_advect_gap},
    };
    out.passed = true;
    std::vector<double> hs;
    for (const auto& l : out.levels) hs.push_back(l.h);
    for (const auto& [name, member] : metrics) {
        if (!selected(name)) continue;
        std::vector<double> vals;
        for (const auto& l : out.levels) vals.push_back(l.metrics.*member);
        if (*std::max_element(vals.begin(), vals.end()) <= kRoundoff) {
            out.orders[name] = std::nullopt;
            continue;
        }
        const bool positive = std::all_of(vals.begin(), vals.end(), [](double v) { return v > 0.0; });
        const double order = positive ? fit_order(hs, vals) : -INFINITY;
        out.orders[name] = order;
        if (!(order >= cfg.min_order)) out.passed = false;
    }
    return out;
}

json ladder_to_json(const LadderResult& r, const ConvergenceConfig& cfg) {
    json levels = json::array();
    for (const auto& l : r.levels) {
        json lv{{"n", l.n}, {"h", l.h}, {"dt", l.dt}, {"steps", l.steps}};
        const std::map<std::string, double> all{{"variational_residual", l.metrics.variational_residual},
                                                {"covariant_residual", l.metrics.covariant_residual},
                                                {"advection_residual", l.metrics.advection_residual},
                                                {"curvature_max", l.metrics.curvature_max},
                                                {"exact_advect_gap", l.metrics.exact_advect_gap}};
        for (const auto& name : cfg.metrics) lv[name] = all.at(name);
        levels.push_back(std::move(lv));
    }
    json orders = json::object();
    for (const auto& [name, v] : r.orders) orders[name] = v ? json(*v) : json(nullptr);
    return json{{"levels", levels}, {"orders", orders}, {"min_order", cfg.min_order}, {"passed", r.passed}};
}

int run_simulate(const fs::path& config, const fs::path& outdir, std::ostream& out, std::ostream& err) {
    json doc;
    SimConfig cfg;
    GroupPtr group;
    std::optional<DensitySpec> spec;
    try {
        doc = read_json_file(config);
        cfg = parse_sim_config(doc);
        group = make_group(cfg.group);
        spec = make_spec(cfg.lagrangian, *group);
        validate(*group, cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    try {
        const Trajectory traj = simulate(*group, *spec, cfg);
        write_outputs(outdir, doc, cfg, *group, *spec, traj, "ok", std::nullopt);
        out << "simulate: " << traj.size() << " samples written to " << outdir.string() << "\n";
        return kExitOk;
    } catch (const DivergenceError& e) {
        write_outputs(outdir, doc, cfg, *group, *spec, e.partial(), "diverged", e.step());
        err << "diverged at step " << e.step() << "\n";
        return kExitDiverged;
    }
}

namespace {

struct Suite {
    std::vector<PropertyResult> results;
    void add(std::string name, double measured, double bound) {
        const bool ok = std::isfinite(measured) && measured <= bound;
        results.push_back({std::move(name), measured, bound, ok});
    }
};

AlgebraElement random_alg(Rng& rng, int n, double scale = 1.0) { return AlgebraElement(rng.vector(n, scale)); }

AlgebraField random_alg_field(Rng& rng, const Grid& grid, int n) {
    std::vector<AlgebraElement> v;
    for (std::size_t s = 0; s < grid.site_count(); ++s) v.push_back(random_alg(rng, n));
    return AlgebraField(grid, std::move(v));
}

ConnectionForm random_form(Rng& rng, const Grid& grid, int n) {
    ConnectionForm f(grid, AlgebraElement::zero(n));
    for (std::size_t s = 0; s < grid.site_count(); ++s) {
        for (int i = 0; i < grid.dim(); ++i) f(s, i) = random_alg(rng, n);
    }
    return f;
}

DualVectorField random_dual_form(Rng& rng, const Grid& grid, int n) {
    DualVectorField f(grid, DualAlgebraElement::zero(n));
    for (std::size_t s = 0; s < grid.site_count(); ++s) {
        for (int i = 0; i < grid.dim(); ++i) f(s, i) = DualAlgebraElement(rng.vector(n));
    }
    return f;
}

void lie_properties(Suite& suite, const LieGroup& g, std::uint64_t seed) {
    Rng rng(seed);
    const int n = g.algebra_dim();
    double jacobi = 0.0, adinv = 0.0, duality = 0.0, roundtrip = 0.0;
    for (int k = 0; k < 100; ++k) {
        const AlgebraElement a = random_alg(rng, n), b = random_alg(rng, n), c = random_alg(rng, n);
        const DualAlgebraElement mu(rng.vector(n));
        jacobi = std::max(jacobi, (g.bracket(a, g.bracket(b, c)) + g.bracket(b, g.bracket(c, a)) +
                                   g.bracket(c, g.bracket(a, b)))
                                      .norm());
        adinv = std::max(adinv, std::abs(g.kappa(g.bracket(a, b), c) + g.kappa(b, g.bracket(a, c))));
        duality = std::max(duality, std::abs(pairing(g.ad_star(a, mu), b) - pairing(mu, g.bracket(a, b))));
        const AlgebraElement xi = random_alg(rng, n, 1.5);
        roundtrip = std::max(roundtrip, (g.log_map(g.exp_map(xi)) - xi).norm());
    }
    suite.add("lie.jacobi", jacobi, 1e-12);
    suite.add("lie.ad_invariance", adinv, 1e-12);
    suite.add("lie.ad_star_duality", duality, 1e-12);
    suite.add("lie.exp_log_round_trip", roundtrip, 1e-12);
}

template <class Field>
double l2_norm(const Field& f) {
    double sum = 0.0;
    for (const auto& v : f) sum += v.coeffs().squaredNorm();
    return std::sqrt(sum * f.grid().cell_volume());
}

double l2_norm(const ConnectionForm& f) {
    double sum = 0.0;
    for (const auto& v : f.flat()) sum += v.coeffs().squaredNorm();
    return std::sqrt(sum * f.grid().cell_volume());
}

double l2_norm(const DualVectorField& f) {
    double sum = 0.0;
    for (const auto& v : f.flat()) sum += v.coeffs().squaredNorm();
    return std::sqrt(sum * f.grid().cell_volume());
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void grid_properties(Suite& suite, const LieGroup& g, const Grid& grid, const VerifyOptions& opts) {
    const int n = g.algebra_dim();
    const std::string tag = "[" + std::to_string(grid.dim()) + "d N=" + std::to_string(grid.size(0)) + "]";
    Rng rng(opts.seed * 1000003ULL + static_cast<std::uint64_t>(grid.dim() * 131 + grid.size(0)));
    const DensitySpec spec = spin_glass(g);
    auto profile = [&](double amp) {
        return FourierProfile{1, amp, static_cast<std::uint64_t>(rng.index(1ULL << 40))};
    };

    // Summation by parts for d/div and for the covariant pair.
    double sbp = 0.0, csbp = 0.0;
    for (int k = 0; k < 5; ++k) {
        const AlgebraField zeta = random_alg_field(rng, grid, n);
        const DualVectorField w = random_dual_form(rng, grid, n);
        const ConnectionForm gamma = random_form(rng, grid, n);
        const DualField dw = div_dual(w);
        const ConnectionForm dz = d_alg(zeta);
        const double scale = l2_norm(dz) * l2_norm(w) + l2_norm(dw) * l2_norm(zeta);
        sbp = std::max(sbp, std::abs(l2_pair(dw, zeta) + l2_pair(w, dz)) / scale);
        const DualField cdw = cov_div(g, gamma, w);
        const ConnectionForm cdz = cov_diff(g, gamma, zeta);
        const double cscale = l2_norm(cdz) * l2_norm(w) + l2_norm(cdw) * l2_norm(zeta);
        csbp = std::max(csbp, std::abs(l2_pair(cdw, zeta) + l2_pair(w, cdz)) / cscale);
    }
    suite.add("sbp.plain" + tag, sbp, 1e-13);
    suite.add("sbp.covariant" + tag, csbp, 1e-12);

    // Gauge invariance of the instantaneous Lagrangian and the reduction identity.
    double global = 0.0, local = 0.0, reduction = 0.0;
    for (int k = 0; k < 20; ++k) {
        const GroupField chi = fourier_group_field(g, grid, profile(1.0));
        const AlgebraField nup = fourier_algebra_field(grid, n, profile(1.0));
        const ConnectionForm gamma = fourier_connection(grid, n, profile(1.0));
        const GroupField lam = fourier_group_field(g, grid, profile(1.0));
        const GroupField lam_c = constant_group_field(grid, g.exp_map(random_alg(rng, n)));
        const double base = instantaneous_L(g, spec, 0.0, chi, nup, gamma);
        local = std::max(local, rel(instantaneous_L(g, spec, 0.0, pointwise_product(chi, lam), nup,
                                                    gauge_act(g, lam, gamma)),
                                    base));
        global = std::max(global, rel(instantaneous_L(g, spec, 0.0, pointwise_product(chi, lam_c), nup,
                                                      gauge_act(g, lam_c, gamma)),
                                      base));
        const ReducedState red{nup, gauge_act(g, pointwise_inverse(g, chi), gamma), 0.0};
        reduction = std::max(reduction, rel(reduced_l(spec, 0.0, red), base));
    }
    suite.add("gauge_invariance.global" + tag, global, 1e-10);
    suite.add("gauge_invariance.local" + tag, local, 1e-10);
    suite.add("reduction_identity" + tag, reduction, 1e-10);

    // Functional derivatives against central differences.
    const ReducedState s{fourier_algebra_field(grid, n, profile(1.0)), fourier_connection(grid, n, profile(1.0)), 0.0};
    const DualField m = delta_l_delta_nu(spec, 0.0, s);
    DualVectorField w = delta_l_delta_gamma(spec, 0.0, s);
    if (opts.flip_gamma_derivative) w *= -1.0;
    const DualField m_fd = fd_gradient_oracle(
        [&](const AlgebraField& nu) { return reduced_l(spec, 0.0, {nu, s.gamma, 0.0}); }, s.nu, 1e-5);
    const DualVectorField w_fd = fd_gradient_oracle(
        [&](const ConnectionForm& gm) { return reduced_l(spec, 0.0, {s.nu, gm, 0.0}); }, s.gamma, 1e-5);
    suite.add("fd_match.dl_dnu" + tag, max_norm(m - m_fd) / std::max(max_norm(m_fd), 1e-300), 1e-6);
    suite.add("fd_match.dl_dgamma" + tag, max_norm(w - w_fd) / std::max(max_norm(w_fd), 1e-300), 1e-6);

    // Background-connection independence of the covariant residual.
    SimConfig cfg;
    cfg.grid = grid;
    cfg.group = g.name();
    cfg.nu0 = {"fourier", profile(0.5)};
    cfg.gamma0 = {"fourier", profile(0.5)};
    cfg.dt = 0.1 * grid.spacing(0);
    cfg.steps = 4;
    const Trajectory traj = simulate(g, spec, cfg);
    double abar = 0.0;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const ConnectionForm A = fourier_connection(grid, n, profile(1.0));
        const double d = max_norm(covariant_residual(g, spec, traj, k, A) - covariant_residual(g, spec, traj, k));
        abar = std::max(abar, d / covariant_residual_scale(g, spec, traj, k, A));
    }
    suite.add("abar_independence" + tag, abar, 1e-12);

    // ad*_nu flat(nu) vanishes site by site.
    double adflat = 0.0;
    const AlgebraField nu = random_alg_field(rng, grid, n);
    for (std::size_t site = 0; site < grid.site_count(); ++site) {
        const double sc = nu[site].norm() * nu[site].norm();
        adflat = std::max(adflat, g.ad_star(nu[site], g.flat(nu[site])).norm() / sc);
    }
    suite.add("ad_star_flat_zero" + tag, adflat, 1e-13);
}

}  // namespace

std::vector<PropertyResult> verify_properties(const VerifyOptions& opts) {
    if (opts.sizes.empty()) throw ConfigError("--sizes", "needs at least one size");
    for (int n : opts.sizes) {
        if (n < 4) throw ConfigError("--sizes", "every size must be >= 4");
    }
    Suite suite;
    const GroupPtr g = LieGroup::so3();
    lie_properties(suite, *g, opts.seed);
    for (const auto& name : density_names()) {
        const DensitySelfTest t = self_test(make_density(name, *g), g->algebra_dim(), 2, opts.seed);
        suite.add("density_self_test." + name,
                  std::max({t.sigma1_rel_error, t.sigma2_rel_error, t.kinetic_rel_error}), 1e-6);
    }
    for (int n : opts.sizes) {
        for (int dim = 1; dim <= 2; ++dim) grid_properties(suite, *g, Grid::cube(dim, n), opts);
    }
    return suite.results;
}

int run_verify(const VerifyOptions& opts, std::ostream& out) {
    std::vector<PropertyResult> results;
    try {
        results = verify_properties(opts);
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    bool all = true;
    for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " measured=" << short_fmt(r.measured)
            << " bound=" << short_fmt(r.bound) << "\n";
        all = all && r.passed;
    }
    return all ? kExitOk : kExitFailed;
}

int run_convergence(const fs::path& config, const fs::path& outdir, std::ostream& out, std::ostream& err) {
    ConvergenceConfig cfg;
    try {
        cfg = parse_convergence_config(read_json_file(config));
        const GroupPtr group = make_group(cfg.base.group);
        validate(*group, cfg.base);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    LadderResult r;
    try {
        r = run_ladder(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << "diverged at step " << e.step() << "\n";
        return kExitDiverged;
    }
    fs::create_directories(outdir);
    write_text(outdir / "orders.json", ladder_to_json(r, cfg).dump(2) + "\n");
    for (const auto& [name, v] : r.orders) {
        const bool ok = !v || *v >= cfg.min_order;
        out << (ok ? "PASS " : "FAIL ") << name << " order=" << (v ? short_fmt(*v) : std::string("n/a")) << "\n";
    }
    return r.passed ? kExitOk : kExitFailed;
}

}  // namespace epred::cli
