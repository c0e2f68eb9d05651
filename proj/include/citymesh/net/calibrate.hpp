#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "citymesh/net/throughput.hpp"

namespace citymesh::net {

// ============================================================================
// Analytic model calibration
// ============================================================================

/// Fit of one empirical row against the analytic model.
struct CalibrationCell {
  std::size_t group_size = 0;
  std::string signature;
  std::vector<double> measured;  // Mbps, canonical flow order
  std::vector<double> fitted;    // model Mbps at the fitted parameters
  std::vector<double> weights;   // fitted airtime shares (sum to 1)
  double max_relative_error = 0.0;
  /// Rows with two or more concurrent flows. Single-flow rows have no free
  /// weight, so their residual is irreducible model error; they are reported
  /// but not held against the error bound.
  bool concurrent = false;
};

struct CalibrationReport {
  std::map<std::size_t, double> c_med_by_size;
  std::vector<CalibrationCell> cells;  // table order: by (size, signature)
  double error_bound = 0.25;
  double worst_concurrent_error = 0.0;
  bool within_bound = true;  // every concurrent cell within error_bound
};

/// Fits the analytic model to an empirical table. Per group size, the medium
/// capacity C is pinned by the single owner-to-client row when present
/// (that flow occupies the whole medium at one hop), otherwise chosen by a
/// deterministic golden-section search minimizing the summed squared
/// relative errors. Per concurrent row, airtime weights are the closed-form
/// least-squares minimizer of the squared relative errors under the
/// sum-to-one constraint.
[[nodiscard]] CalibrationReport calibrate_throughput(const EmpiricalTable& table,
                                                     double error_bound = 0.25);

/// Packages a calibration into model params (empirical table left as the
/// shipped default; mode unchanged). default_c_med becomes the largest
/// fitted size's capacity, the natural extrapolation for bigger groups.
[[nodiscard]] ThroughputModelParams params_from_calibration(
    const CalibrationReport& report, double bridge_rate_mbps = 6.8);

/// Analytic params text format, line-oriented:
///   default_c_med <mbps>
///   bridge_rate <mbps>
///   c_med <size> <mbps>
///   weights <size> <signature> <w>...
/// Values round-trip exactly (17 significant digits).
[[nodiscard]] std::string serialize_analytic_params(const ThroughputModelParams& params);

/// Parses a params file into `params`, overwriting the fitted fields.
void merge_analytic_params(ThroughputModelParams& params, std::string_view text);
void load_analytic_params(ThroughputModelParams& params, const std::filesystem::path& path);

}  // namespace citymesh::net
