#pragma once

#include "epred/lie.hpp"
#include "epred/parallel.hpp"

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epred {

/// Shape or index errors on lattice fields.
class GridError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Uniform periodic lattice in 1 or 2 dimensions. Sites are numbered in
/// row-major order (last axis fastest).
class Grid {
public:
    Grid() = default;
    Grid(std::vector<int> sizes, std::vector<double> spacing);

    /// N^dim lattice with spacing length/N along every axis.
    static Grid cube(int dim, int n, double length = 1.0);

    int dim() const { return static_cast<int>(sizes_.size()); }
    const std::vector<int>& sizes() const { return sizes_; }
    const std::vector<double>& spacing() const { return spacing_; }
    int size(int axis) const { return sizes_.at(axis); }
    double spacing(int axis) const { return spacing_.at(axis); }
    double length(int axis) const { return sizes_.at(axis) * spacing_.at(axis); }
    std::size_t site_count() const { return sites_; }
    double cell_volume() const;
    double volume() const { return cell_volume() * static_cast<double>(sites_); }

    std::vector<int> coords(std::size_t site) const;
    std::size_t site(const std::vector<int>& coords) const;
    /// Periodic neighbour of `site` displaced by `step` along `axis`.
    std::size_t neighbor(std::size_t site, int axis, int step) const;
    /// Physical coordinate of `site` along `axis`.
    double position(std::size_t site, int axis) const;

    void check_axis(int axis) const;

    friend bool operator==(const Grid& a, const Grid& b) {
        return a.sizes_ == b.sizes_ && a.spacing_ == b.spacing_;
    }

private:
    std::vector<int> sizes_;
    std::vector<double> spacing_;
    std::vector<std::size_t> strides_;
    std::size_t sites_ = 0;
};

void require_same_grid(const Grid& a, const Grid& b, const char* what);

/// One value per lattice site.
template <class T>
class SiteField {
public:
    using value_type = T;

    SiteField() = default;
    SiteField(Grid grid, T fill) : grid_(std::move(grid)), values_(grid_.site_count(), std::move(fill)) {}
    SiteField(Grid grid, std::vector<T> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.site_count()) throw GridError("SiteField: value count does not match the grid");
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    T& operator[](std::size_t site) { return values_[site]; }
    const T& operator[](std::size_t site) const { return values_[site]; }
    std::span<const T> values() const { return values_; }
    auto begin() const { return values_.begin(); }
    auto end() const { return values_.end(); }

    SiteField& operator+=(const SiteField& o) {
        require_same_grid(grid_, o.grid_, "SiteField +=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    SiteField& operator-=(const SiteField& o) {
        require_same_grid(grid_, o.grid_, "SiteField -=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    SiteField& operator*=(double s) {
        for (auto& v : values_) v *= s;
        return *this;
    }
    friend SiteField operator+(SiteField a, const SiteField& b) { return a += b; }
    friend SiteField operator-(SiteField a, const SiteField& b) { return a -= b; }
    friend SiteField operator*(double s, SiteField a) { return a *= s; }
    friend SiteField operator-(SiteField a) { return a *= -1.0; }

private:
    Grid grid_;
    std::vector<T> values_;
};

/// dim values per site: a one-form (algebra-valued) or a vector field
/// (dual-valued). Storage is site-major so the components at one site are
/// contiguous.
template <class T>
class FormField {
public:
    using value_type = T;

    FormField() = default;
    FormField(Grid grid, T fill)
        : grid_(std::move(grid)), values_(grid_.site_count() * static_cast<std::size_t>(grid_.dim()), std::move(fill)) {}

    const Grid& grid() const { return grid_; }
    int dim() const { return grid_.dim(); }
    std::size_t site_count() const { return grid_.site_count(); }

    T& operator()(std::size_t site, int axis) { return values_[site * dim() + axis]; }
    const T& operator()(std::size_t site, int axis) const { return values_[site * dim() + axis]; }
    /// All components at one site.
    std::span<const T> at(std::size_t site) const { return {values_.data() + site * dim(), static_cast<std::size_t>(dim())}; }
    std::span<const T> flat() const { return values_; }

    SiteField<T> component(int axis) const {
        grid_.check_axis(axis);
        std::vector<T> out;
        out.reserve(site_count());
        for (std::size_t s = 0; s < site_count(); ++s) out.push_back((*this)(s, axis));
        return SiteField<T>(grid_, std::move(out));
    }
    void set_component(int axis, const SiteField<T>& f) {
        grid_.check_axis(axis);
        require_same_grid(grid_, f.grid(), "FormField::set_component");
        for (std::size_t s = 0; s < site_count(); ++s) (*this)(s, axis) = f[s];
    }

    FormField& operator+=(const FormField& o) {
        require_same_grid(grid_, o.grid_, "FormField +=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    FormField& operator-=(const FormField& o) {
        require_same_grid(grid_, o.grid_, "FormField -=");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    FormField& operator*=(double s) {
        for (auto& v : values_) v *= s;
        return *this;
    }
    friend FormField operator+(FormField a, const FormField& b) { return a += b; }
    friend FormField operator-(FormField a, const FormField& b) { return a -= b; }
    friend FormField operator*(double s, FormField a) { return a *= s; }
    friend FormField operator-(FormField a) { return a *= -1.0; }

private:
    Grid grid_;
    std::vector<T> values_;
};

using AlgebraField = SiteField<AlgebraElement>;
using DualField = SiteField<DualAlgebraElement>;
using GroupField = SiteField<GroupElement>;
using ConnectionForm = FormField<AlgebraElement>;
using DualVectorField = FormField<DualAlgebraElement>;

/// Centered difference (f(m+e) - f(m-e)) / 2h along `axis`, periodic.
template <class T>
SiteField<T> central_diff(const SiteField<T>& f, int axis) {
    const Grid& g = f.grid();
    g.check_axis(axis);
    const double inv = 1.0 / (2.0 * g.spacing(axis));
    std::vector<T> out(g.site_count());
    parallel_for(g.site_count(), [&](std::size_t s) {
        out[s] = (f[g.neighbor(s, axis, +1)] - f[g.neighbor(s, axis, -1)]) * inv;
    });
    return SiteField<T>(g, std::move(out));
}

ConnectionForm d_alg(const AlgebraField& zeta);
DualField div_dual(const DualVectorField& w);

/// Pairwise sum with a fixed, data-independent association order.
double pairwise_sum(std::span<const double> values);
/// cell_volume * sum over sites.
double integrate(const Grid& grid, std::span<const double> per_site);

double l2_pair(const DualField& a, const AlgebraField& b);
double l2_pair(const DualVectorField& a, const ConnectionForm& b);

/// Per axis: projection onto the algebra of D_i(chi) * chi^{-1}.
ConnectionForm right_log_derivative(const LieGroup& group, const GroupField& chi);
/// Per axis: projection onto the algebra of chi^{-1} * D_i(chi).
ConnectionForm left_log_derivative(const LieGroup& group, const GroupField& chi);

/// Pointwise helpers.
GroupField constant_group_field(const Grid& grid, const GroupElement& g);
GroupField pointwise_inverse(const LieGroup& group, const GroupField& chi);
GroupField pointwise_product(const GroupField& a, const GroupField& b);
DualField flat(const LieGroup& group, const AlgebraField& f);
DualVectorField flat(const LieGroup& group, const ConnectionForm& f);
AlgebraField sharp(const LieGroup& group, const DualField& f);

/// max over sites (and components) of the coefficient 2-norm.
double max_norm(const AlgebraField& f);
double max_norm(const DualField& f);
double max_norm(const ConnectionForm& f);
double max_norm(const DualVectorField& f);

bool all_finite(const AlgebraField& f);
bool all_finite(const ConnectionForm& f);

}  // namespace epred
