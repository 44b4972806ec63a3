#pragma once

#include "epred/fields.hpp"

#include <json.hpp>

#include <string>

namespace epred {

/// Field snapshots: a header {dim, sizes, spacing, group, kind} followed by
/// flat arrays in row-major site order. Algebra values contribute
/// algebra_dim numbers per site; one-forms store one array per axis; group
/// values store matrix_dim^2 numbers per site, row-major.
nlohmann::json snapshot_header(const Grid& grid, const std::string& group, const std::string& kind);

nlohmann::json to_snapshot(const AlgebraField& f, const std::string& group);
nlohmann::json to_snapshot(const ConnectionForm& f, const std::string& group);
nlohmann::json to_snapshot(const GroupField& f, const std::string& group);
/// kind "reduced_state": arrays "nu" and "gamma" plus "t".
nlohmann::json to_snapshot(const ReducedState& s, const std::string& group);

Grid grid_from_snapshot(const nlohmann::json& j);
AlgebraField algebra_field_from_snapshot(const nlohmann::json& j, int algebra_dim);
ConnectionForm connection_from_snapshot(const nlohmann::json& j, int algebra_dim);
GroupField group_field_from_snapshot(const nlohmann::json& j, int matrix_dim);
ReducedState state_from_snapshot(const nlohmann::json& j, int algebra_dim);

}  // namespace epred
