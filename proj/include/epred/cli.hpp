#pragma once

#include "epred/dynamics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace epred::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;

inline constexpr const char* kSeriesHeader =
    "t,l_value,energy,advection_residual,curvature_max,covariant_residual,exact_advect_gap";

/// Parses the simulation part of a config document; throws ConfigError
/// naming the offending key.
SimConfig parse_sim_config(const nlohmann::json& doc);

struct ConvergenceConfig {
    SimConfig base;
    std::vector<int> sizes;
    int probes = 0;  // <= 0: every (step, site, direction)
    double eps = 1e-5;
    std::uint64_t seed = 0;
    double min_order = 1.7;
    /// Metrics whose orders are fitted and gated; default all of kLadderMetrics.
    std::vector<std::string> metrics;
};

inline const std::vector<std::string> kLadderMetrics = {
    "variational_residual", "covariant_residual", "advection_residual", "curvature_max", "exact_advect_gap"};

ConvergenceConfig parse_convergence_config(const nlohmann::json& doc);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// One row of series.csv.
struct SeriesRow {
    double t = 0.0;
    double l_value = 0.0;
    double energy = 0.0;
    double advection_residual = 0.0;
    double curvature_max = 0.0;
    double covariant_residual = 0.0;
    double exact_advect_gap = 0.0;
};

std::vector<SeriesRow> series_rows(const LieGroup& group, const DensitySpec& spec, const Trajectory& traj);
/// CSV text with 17 significant digits per number.
std::string format_series(const std::vector<SeriesRow>& rows);

/// Least-squares slope of log(value) against log(h).
double fit_order(const std::vector<double>& h, const std::vector<double>& values);

struct LadderLevel {
    int n = 0;
    double h = 0.0;
    double dt = 0.0;
    int steps = 0;
    TrajectoryMetrics metrics;
};

struct LadderResult {
    std::vector<LadderLevel> levels;
    /// Fitted order per metric; nullopt when the metric is at roundoff on
    /// every level (e.g. curvature on 1-D grids).
    std::map<std::string, std::optional<double>> orders;
    bool passed = false;
};

LadderResult run_ladder(const ConvergenceConfig& cfg);
nlohmann::json ladder_to_json(const LadderResult& r, const ConvergenceConfig& cfg);

int run_simulate(const std::filesystem::path& config, const std::filesystem::path& outdir, std::ostream& out,
                 std::ostream& err);

struct VerifyOptions {
    std::uint64_t seed = 1;
    std::vector<int> sizes{16};
    /// Test hook: negate the analytic dl/dgamma before comparing with the oracle.
    bool flip_gamma_derivative = false;
};

struct PropertyResult {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    bool passed = false;
};

std::vector<PropertyResult> verify_properties(const VerifyOptions& opts);
int run_verify(const VerifyOptions& opts, std::ostream& out);

int run_convergence(const std::filesystem::path& config, const std::filesystem::path& outdir, std::ostream& out,
                    std::ostream& err);

}  // namespace epred::cli
