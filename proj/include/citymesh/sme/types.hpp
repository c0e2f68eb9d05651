#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "citymesh/timeutil.hpp"

namespace citymesh::sme {

/// One timestamped sensor reading. Values travel as fixed-width signed
/// decimals with six fractional digits, so only doubles that are exactly
/// representable in that grid can be serialized (see value_to_micros).
struct ValueRecord {
  Instant timestamp_ms = 0;
  double value = 0.0;

  friend bool operator==(const ValueRecord& a, const ValueRecord& b) noexcept {
    return a.timestamp_ms == b.timestamp_ms && a.value == b.value;
  }
};

struct TimeWindow {
  Instant start_ms = 0;
  Instant end_ms = 0;  // inclusive

  friend bool operator==(const TimeWindow&, const TimeWindow&) noexcept = default;
};

/// A batch of readings from one sensor covering one observation window.
/// Invariants (enforced at serialize/deserialize time):
///   - records sorted by timestamp, nondecreasing;
///   - every timestamp inside [window.start, window.end];
///   - sensor_id nonempty and free of newlines.
struct ObservationSet {
  std::string sensor_id;
  TimeWindow window;
  std::vector<ValueRecord> records;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) noexcept = default;
};

struct ValueRange {
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const ValueRange&, const ValueRange&) noexcept = default;
};

/// Static metadata describing one physical sensor. vendor may be empty;
/// every other string field must be nonempty. No string field may contain
/// a newline (the wire format is line-oriented).
struct SensorDescription {
  std::string sensor_id;
  std::string vendor;
  std::string observed_property;  // e.g. "PM10"
  std::string unit;               // e.g. "ug/m3"
  double sampling_frequency_hz = 0.0;
  ValueRange valid_range;
  GeoPoint location;

  friend bool operator==(const SensorDescription&, const SensorDescription&) = default;
};

}  // namespace citymesh::sme
