#include "epred/snapshot.hpp"

#include <stdexcept>

namespace epred {

using nlohmann::json;

namespace {

json flatten(const AlgebraField& f) {
    json a = json::array();
    for (const auto& v : f) {
        for (int k = 0; k < v.size(); ++k) a.push_back(v[k]);
    }
    return a;
}

AlgebraField unflatten(const Grid& grid, const json& a, int algebra_dim) {
    if (!a.is_array() || a.size() != grid.site_count() * static_cast<std::size_t>(algebra_dim)) {
        throw std::invalid_argument("snapshot: algebra array has the wrong length");
    }
    std::vector<AlgebraElement> out(grid.site_count());
    for (std::size_t s = 0; s < out.size(); ++s) {
        Eigen::VectorXd c(algebra_dim);
        for (int k = 0; k < algebra_dim; ++k) c[k] = a[s * algebra_dim + k].get<double>();
        out[s] = AlgebraElement(std::move(c));
    }
    return AlgebraField(grid, std::move(out));
}

void expect_kind(const json& j, const char* kind) {
    if (j.at("header").at("kind").get<std::string>() != kind) {
        throw std::invalid_argument(std::string("snapshot: expected kind '") + kind + "'");
    }
}

json form_arrays(const ConnectionForm& f) {
    json comps = json::array();
    for (int i = 0; i < f.dim(); ++i) comps.push_back(flatten(f.component(i)));
    return comps;
}

ConnectionForm form_from_arrays(const Grid& grid, const json& comps, int algebra_dim) {
    if (!comps.is_array() || comps.size() != static_cast<std::size_t>(grid.dim())) {
        throw std::invalid_argument("snapshot: one-form needs one array per axis");
    }
    ConnectionForm out(grid, AlgebraElement());
    for (int i = 0; i < grid.dim(); ++i) out.set_component(i, unflatten(grid, comps[i], algebra_dim));
    return out;
}

}  // namespace

json snapshot_header(const Grid& grid, const std::string& group, const std::string& kind) {
    return json{{"dim", grid.dim()}, {"sizes", grid.sizes()}, {"spacing", grid.spacing()}, {"group", group}, {"kind", kind}};
}

json to_snapshot(const AlgebraField& f, const std::string& group) {
    return json{{"header", snapshot_header(f.grid(), group, "algebra_field")}, {"values", flatten(f)}};
}

json to_snapshot(const ConnectionForm& f, const std::string& group) {
    return json{{"header", snapshot_header(f.grid(), group, "connection_form")}, {"values", form_arrays(f)}};
}

json to_snapshot(const GroupField& f, const std::string& group) {
    json a = json::array();
    for (const auto& g : f) {
        const auto& m = g.matrix();
        for (int r = 0; r < m.rows(); ++r) {
            for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
        }
    }
    return json{{"header", snapshot_header(f.grid(), group, "group_field")}, {"values", std::move(a)}};
}

json to_snapshot(const ReducedState& s, const std::string& group) {
    return json{{"header", snapshot_header(s.nu.grid(), group, "reduced_state")},
                {"t", s.t},
                {"nu", flatten(s.nu)},
                {"gamma", form_arrays(s.gamma)}};
}

Grid grid_from_snapshot(const json& j) {
    const json& h = j.at("header");
    const auto sizes = h.at("sizes").get<std::vector<int>>();
    if (static_cast<int>(sizes.size()) != h.at("dim").get<int>()) {
        throw std::invalid_argument("snapshot: header dim disagrees with sizes");
    }
    return Grid(sizes, h.at("spacing").get<std::vector<double>>());
}

AlgebraField algebra_field_from_snapshot(const json& j, int algebra_dim) {
    expect_kind(j, "algebra_field");
    return unflatten(grid_from_snapshot(j), j.at("values"), algebra_dim);
}

ConnectionForm connection_from_snapshot(const json& j, int algebra_dim) {
    expect_kind(j, "connection_form");
    return form_from_arrays(grid_from_snapshot(j), j.at("values"), algebra_dim);
}

GroupField group_field_from_snapshot(const json& j, int matrix_dim) {
    expect_kind(j, "group_field");
    const Grid grid = grid_from_snapshot(j);
    const json& a = j.at("values");
    const std::size_t per = static_cast<std::size_t>(matrix_dim) * matrix_dim;
    if (!a.is_array() || a.size() != grid.site_count() * per) {
        throw std::invalid_argument("snapshot: group array has the wrong length");
    }
    std::vector<GroupElement> out(grid.site_count());
    for (std::size_t s = 0; s < out.size(); ++s) {
        Eigen::MatrixXd m(matrix_dim, matrix_dim);
        for (int r = 0; r < matrix_dim; ++r) {
            for (int c = 0; c < matrix_dim; ++c) m(r, c) = a[s * per + r * matrix_dim + c].get<double>();
        }
        out[s] = GroupElement(std::move(m));
    }
    return GroupField(grid, std::move(out));
}

ReducedState state_from_snapshot(const json& j, int algebra_dim) {
    expect_kind(j, "reduced_state");
    const Grid grid = grid_from_snapshot(j);
    return {unflatten(grid, j.at("nu"), algebra_dim), form_from_arrays(grid, j.at("gamma"), algebra_dim),
            j.at("t").get<double>()};
}

}  // namespace epred
