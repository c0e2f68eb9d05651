#include "citymesh/sensors/aqi.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "citymesh/error.hpp"

namespace citymesh::sensors {

const char* to_string(IndexBand band) {
  switch (band) {
    case IndexBand::green: return "green";
    case IndexBand::yellow: return "yellow";
    case IndexBand::orange: return "orange";
    case IndexBand::red: return "red";
  }
  return "unknown";
}

IndexBand band_for_index(double index) {
  if (!std::isfinite(index) || index < 0.0 || index > 100.0) {
    throw ValidationError{"air-quality index must lie in [0, 100]"};
  }
  if (index < 25.0) return IndexBand::green;
  if (index < 50.0) return IndexBand::yellow;
  if (index < 75.0) return IndexBand::orange;
  return IndexBand::red;
}

// ============================================================================
// BreakpointTable
// ============================================================================

BreakpointTable::BreakpointTable(Rows rows) : rows_(std::move(rows)) {
  if (rows_.empty()) {
    throw ValidationError{"breakpoint table must define at least one pollutant"};
  }
  for (const auto& [property, points] : rows_) {
    if (property.empty()) {
      throw ValidationError{"breakpoint table pollutant name must be non-empty"};
    }
    if (points.size() < 2) {
      throw ValidationError{"pollutant '" + property + "' needs at least two breakpoints"};
    }
    for (const auto& point : points) {
      if (!std::isfinite(point.concentration) || !std::isfinite(point.subindex) ||
          point.concentration < 0.0 || point.subindex < 0.0) {
        throw ValidationError{"pollutant '" + property + "' has a non-finite or negative breakpoint"};
      }
    }
    if (points.front().concentration != 0.0 || points.front().subindex != 0.0) {
      throw ValidationError{"pollutant '" + property + "' must start at breakpoint (0, 0)"};
    }
    if (points.back().subindex != 100.0) {
      throw ValidationError{"pollutant '" + property + "' must end at subindex 100"};
    }
    for (std::size_t i = 1; i < points.size(); ++i) {
      if (points[i].concentration <= points[i - 1].concentration) {
        throw ValidationError{"pollutant '" + property + "' concentrations must strictly increase"};
      }
      if (points[i].subindex < points[i - 1].subindex) {
        throw ValidationError{"pollutant '" + property + "' subindexes must not decrease"};
      }
    }
  }
}

BreakpointTable BreakpointTable::from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& error) {
    throw ParseError{std::string{"breakpoint table is not valid JSON: "} + error.what(), 0};
  }
  if (!doc.is_object()) {
    throw ValidationError{"breakpoint table must be a JSON object of pollutant rows"};
  }
  Rows rows;
  for (const auto& [property, row] : doc.items()) {
    if (!row.is_array()) {
      throw ValidationError{"pollutant '" + property + "' must map to an array of pairs"};
    }
    std::vector<Breakpoint> points;
    points.reserve(row.size());
    for (const auto& pair : row) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
        throw ValidationError{"pollutant '" + property +
                              "' breakpoints must be [concentration, subindex] pairs"};
      }
      points.push_back(Breakpoint{pair[0].get<double>(), pair[1].get<double>()});
    }
    rows.emplace(property, std::move(points));
  }
  return BreakpointTable{std::move(rows)};
}

BreakpointTable BreakpointTable::from_json_file(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) {
    throw IoError{"cannot open breakpoint table: " + path.string()};
  }
  std::ostringstream text;
  text << in.rdbuf();
  return from_json_text(text.str());
}

BreakpointTable BreakpointTable::builtin_default() {
  Rows rows;
  rows["PM10"] = {{0, 0}, {25, 25}, {50, 50}, {90, 75}, {180, 100}};
  rows["PM2.5"] = {{0, 0}, {15, 25}, {30, 50}, {55, 75}, {110, 100}};
  rows["NO2"] = {{0, 0}, {50, 25}, {100, 50}, {200, 75}, {400, 100}};
  rows["O3"] = {{0, 0}, {60, 25}, {120, 50}, {180, 75}, {240, 100}};
  return BreakpointTable{std::move(rows)};
}

bool BreakpointTable::knows(const std::string& property) const {
  return rows_.contains(property);
}

double BreakpointTable::subindex(const std::string& property, double concentration) const {
  const auto row = rows_.find(property);
  if (row == rows_.end()) {
    throw ValidationError{"no breakpoints defined for pollutant '" + property + "'"};
  }
  if (!std::isfinite(concentration) || concentration < 0.0) {
    throw ValidationError{"concentration for '" + property + "' must be finite and non-negative"};
  }
  const auto& points = row->second;
  if (concentration >= points.back().concentration) {
    return 100.0;
  }
  std::size_t hi = 1;
  while (points[hi].concentration < concentration) ++hi;
  const auto& a = points[hi - 1];
  const auto& b = points[hi];
  const double fraction = (concentration - a.concentration) / (b.concentration - a.concentration);
  return a.subindex + fraction * (b.subindex - a.subindex);
}

AirQualityIndex compute_air_quality_index(const std::map<std::string, double>& latest_by_property,
                                          const BreakpointTable& table) {
  if (latest_by_property.empty()) {
    throw ValidationError{"air-quality index needs at least one pollutant reading"};
  }
  AirQualityIndex result;
  bool first = true;
  for (const auto& [property, concentration] : latest_by_property) {
    const double sub = table.subindex(property, concentration);
    if (first || sub > result.value) {
      result.value = sub;
      result.dominant_property = property;
      first = false;
    }
  }
  result.band = band_for_index(result.value);
  return result;
}

}  // namespace citymesh::sensors
