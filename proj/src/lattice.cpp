#include "epred/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace epred {

Grid::Grid(std::vector<int> sizes, std::vector<double> spacing) : sizes_(std::move(sizes)), spacing_(std::move(spacing)) {
    if (sizes_.empty() || sizes_.size() > 2) throw GridError("grid dimension must be 1 or 2");
    if (spacing_.size() != sizes_.size()) throw GridError("grid spacing must have one entry per axis");
    for (std::size_t a = 0; a < sizes_.size(); ++a) {
        if (sizes_[a] < 4) throw GridError("grid sizes must be >= 4");
        if (!(spacing_[a] > 0.0) || !std::isfinite(spacing_[a])) throw GridError("grid spacing must be positive");
    }
    strides_.assign(sizes_.size(), 1);
    for (int a = dim() - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * static_cast<std::size_t>(sizes_[a + 1]);
    sites_ = strides_[0] * static_cast<std::size_t>(sizes_[0]);
}

Grid Grid::cube(int dim, int n, double length) {
    return Grid(std::vector<int>(dim, n), std::vector<double>(dim, length / n));
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (double h : spacing_) v *= h;
    return v;
}

void Grid::check_axis(int axis) const {
    if (axis < 0 || axis >= dim()) {
        throw GridError("axis " + std::to_string(axis) + " out of range for a " + std::to_string(dim()) + "-D grid");
    }
}

std::vector<int> Grid::coords(std::size_t site) const {
    std::vector<int> c(sizes_.size());
    for (std::size_t a = 0; a < sizes_.size(); ++a) c[a] = static_cast<int>((site / strides_[a]) % sizes_[a]);
    return c;
}

std::size_t Grid::site(const std::vector<int>& coords) const {
    std::size_t s = 0;
    for (std::size_t a = 0; a < sizes_.size(); ++a) {
        const int n = sizes_[a];
        s += static_cast<std::size_t>(((coords[a] % n) + n) % n) * strides_[a];
    }
    return s;
}

std::size_t Grid::neighbor(std::size_t site, int axis, int step) const {
    const int n = sizes_[axis];
    const int c = static_cast<int>((site / strides_[axis]) % n);
    const int moved = ((c + step) % n + n) % n;
    return site + (static_cast<std::ptrdiff_t>(moved) - c) * static_cast<std::ptrdiff_t>(strides_[axis]);
}

double Grid::position(std::size_t site, int axis) const {
    return static_cast<double>((site / strides_[axis]) % sizes_[axis]) * spacing_[axis];
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) throw GridError(std::string(what) + ": grid mismatch");
}

ConnectionForm d_alg(const AlgebraField& zeta) {
    const Grid& g = zeta.grid();
    ConnectionForm out(g, AlgebraElement());
    for (int axis = 0; axis < g.dim(); ++axis) out.set_component(axis, central_diff(zeta, axis));
    return out;
}

DualField div_dual(const DualVectorField& w) {
    const Grid& g = w.grid();
    DualField out = central_diff(w.component(0), 0);
    for (int axis = 1; axis < g.dim(); ++axis) out += central_diff(w.component(axis), axis);
    return out;
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double integrate(const Grid& grid, std::span<const double> per_site) {
    if (per_site.size() != grid.site_count()) throw GridError("integrate: value count does not match the grid");
    return grid.cell_volume() * pairwise_sum(per_site);
}

double l2_pair(const DualField& a, const AlgebraField& b) {
    require_same_grid(a.grid(), b.grid(), "l2_pair");
    std::vector<double> v(a.size());
    for (std::size_t s = 0; s < v.size(); ++s) v[s] = pairing(a[s], b[s]);
    return integrate(a.grid(), v);
}

double l2_pair(const DualVectorField& a, const ConnectionForm& b) {
    require_same_grid(a.grid(), b.grid(), "l2_pair");
    std::vector<double> v(a.site_count());
    for (std::size_t s = 0; s < v.size(); ++s) {
        double acc = 0.0;
        for (int i = 0; i < a.dim(); ++i) acc += pairing(a(s, i), b(s, i));
        v[s] = acc;
    }
    return integrate(a.grid(), v);
}

namespace {

template <bool Right>
ConnectionForm log_derivative(const LieGroup& group, const GroupField& chi) {
    const Grid& g = chi.grid();
    ConnectionForm out(g, AlgebraElement());
    parallel_for(g.site_count(), [&](std::size_t s) {
        const Eigen::MatrixXd inv = group.inverse(chi[s]).matrix();
        for (int axis = 0; axis < g.dim(); ++axis) {
            const Eigen::MatrixXd d = (chi[g.neighbor(s, axis, +1)].matrix() - chi[g.neighbor(s, axis, -1)].matrix()) /
                                      (2.0 * g.spacing(axis));
            out(s, axis) = Right ? group.vee(d * inv) : group.vee(inv * d);
        }
    });
    return out;
}

}  // namespace

ConnectionForm right_log_derivative(const LieGroup& group, const GroupField& chi) {
    return log_derivative<true>(group, chi);
}

ConnectionForm left_log_derivative(const LieGroup& group, const GroupField& chi) {
    return log_derivative<false>(group, chi);
}

GroupField constant_group_field(const Grid& grid, const GroupElement& g) { return GroupField(grid, g); }

GroupField pointwise_inverse(const LieGroup& group, const GroupField& chi) {
    std::vector<GroupElement> out(chi.size());
    for (std::size_t s = 0; s < chi.size(); ++s) out[s] = group.inverse(chi[s]);
    return GroupField(chi.grid(), std::move(out));
}

GroupField pointwise_product(const GroupField& a, const GroupField& b) {
    require_same_grid(a.grid(), b.grid(), "pointwise_product");
    std::vector<GroupElement> out(a.size());
    for (std::size_t s = 0; s < a.size(); ++s) out[s] = a[s] * b[s];
    return GroupField(a.grid(), std::move(out));
}

DualField flat(const LieGroup& group, const AlgebraField& f) {
    std::vector<DualAlgebraElement> out(f.size());
    for (std::size_t s = 0; s < f.size(); ++s) out[s] = group.flat(f[s]);
    return DualField(f.grid(), std::move(out));
}

DualVectorField flat(const LieGroup& group, const ConnectionForm& f) {
    DualVectorField out(f.grid(), DualAlgebraElement());
    for (std::size_t s = 0; s < f.site_count(); ++s) {
        for (int i = 0; i < f.dim(); ++i) out(s, i) = group.flat(f(s, i));
    }
    return out;
}

AlgebraField sharp(const LieGroup& group, const DualField& f) {
    std::vector<AlgebraElement> out(f.size());
    for (std::size_t s = 0; s < f.size(); ++s) out[s] = group.sharp(f[s]);
    return AlgebraField(f.grid(), std::move(out));
}

namespace {

template <class F>
double max_site_norm(const F& values) {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, v.norm());
    return m;
}

}  // namespace

double max_norm(const AlgebraField& f) { return max_site_norm(f.values()); }
double max_norm(const DualField& f) { return max_site_norm(f.values()); }
double max_norm(const ConnectionForm& f) { return max_site_norm(f.flat()); }
double max_norm(const DualVectorField& f) { return max_site_norm(f.flat()); }

bool all_finite(const AlgebraField& f) {
    return std::all_of(f.begin(), f.end(), [](const AlgebraElement& v) { return v.is_finite(); });
}

bool all_finite(const ConnectionForm& f) {
    const auto vals = f.flat();
    return std::all_of(vals.begin(), vals.end(), [](const AlgebraElement& v) { return v.is_finite(); });
}

}  // namespace epred
