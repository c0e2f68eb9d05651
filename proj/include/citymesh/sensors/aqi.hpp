#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace citymesh::sensors {

// ============================================================================
// Air-quality index
// ============================================================================

/// Qualitative color band for a 0..100 air-quality index.
enum class IndexBand { green, yellow, orange, red };

[[nodiscard]] const char* to_string(IndexBand band);

/// Band boundaries: green [0,25), yellow [25,50), orange [50,75), red [75,100].
[[nodiscard]] IndexBand band_for_index(double index);

/// One node of a piecewise-linear mapping from pollutant concentration to
/// subindex points.
struct Breakpoint {
  double concentration = 0.0;
  double subindex = 0.0;

  bool operator==(const Breakpoint&) const = default;
};

/// Per-pollutant breakpoint rows. Each row must start at (0, 0), end at
/// subindex 100, have strictly increasing concentrations and nondecreasing
/// subindexes; violations throw ValidationError at construction.
class BreakpointTable {
 public:
  using Rows = std::map<std::string, std::vector<Breakpoint>>;

  explicit BreakpointTable(Rows rows);

  /// Loads a table from a JSON object mapping pollutant names to arrays of
  /// [concentration, subindex] pairs.
  [[nodiscard]] static BreakpointTable from_json_text(std::string_view text);
  [[nodiscard]] static BreakpointTable from_json_file(const std::filesystem::path& path);

  /// Hourly-scale defaults for the pollutants the bundled scenarios use
  /// (PM10, PM2.5, NO2, O3).
  [[nodiscard]] static BreakpointTable builtin_default();

  [[nodiscard]] bool knows(const std::string& property) const;

  /// Piecewise-linear subindex for a concentration. Concentrations above the
  /// last breakpoint saturate at 100. Negative or non-finite concentrations
  /// and unknown pollutants throw ValidationError.
  [[nodiscard]] double subindex(const std::string& property, double concentration) const;

  [[nodiscard]] const Rows& rows() const { return rows_; }

 private:
  Rows rows_;
};

/// A station-level index: the worst (maximum) pollutant subindex.
struct AirQualityIndex {
  std::string station_id;
  double value = 0.0;
  IndexBand band = IndexBand::green;
  /// Pollutant responsible for the maximum subindex; ties resolve to the
  /// lexicographically smallest name.
  std::string dominant_property;

  bool operator==(const AirQualityIndex&) const = default;
};

/// Combines the latest reading per pollutant into one index. The readings map
/// must be non-empty and every pollutant must be present in the table.
/// `station_id` of the result is left empty for the caller to fill.
[[nodiscard]] AirQualityIndex compute_air_quality_index(
    const std::map<std::string, double>& latest_by_property,
    const BreakpointTable& table);

}  // namespace citymesh::sensors
