#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "citymesh/sim/trace.hpp"

namespace citymesh::sim {

// ============================================================================
// Metrics
// ============================================================================

struct GroupSummary {
  std::size_t formed = 0;
  double mean_size = 0.0;
  /// Formation to dissolution; groups still alive at the end of the trace
  /// are measured up to the last event time.
  double mean_lifetime_s = 0.0;

  bool operator==(const GroupSummary&) const = default;
};

/// Scenario outcome, a pure function of the event trace.
///
/// An "interested pair" is (peer, item) where the peer's utility for the
/// item met the dissemination threshold when the item was created (the
/// author is never counted); the engine records that set in each
/// content_created event. A pair is satisfied once the peer obtains the item
/// by any path (D2D transfer or WLAN fetch); latency is first obtainment
/// minus creation. With zero interested pairs the delivery ratio is 1.0 by
/// convention (nothing wanted, nothing missed).
struct Metrics {
  double delivery_ratio = 1.0;
  double mean_latency_s = 0.0;
  double median_latency_s = 0.0;
  /// D2D bytes transmitted over D2D bytes first-delivered; 0 when no
  /// delivery occurred, >= 1 otherwise. Redundant re-deliveries (e.g. after
  /// an eviction) raise it above 1.
  double overhead_ratio = 0.0;
  /// Fraction of sensor-data bytes peers obtained via D2D rather than WLAN;
  /// 0 when no sensor bytes moved.
  double infrastructure_offload = 0.0;

  std::size_t interested_pairs = 0;
  std::size_t satisfied_pairs = 0;
  std::uint64_t transmitted_bytes = 0;
  std::uint64_t first_delivery_bytes = 0;
  std::uint64_t sensor_d2d_bytes = 0;
  std::uint64_t sensor_wlan_bytes = 0;
  GroupSummary groups;

  bool operator==(const Metrics&) const = default;
};

/// Computes metrics from a trace. Pure; an exported-then-reimported trace
/// yields identical results. Throws ParseError when the trace is malformed:
/// events out of (time, seq) order, duplicate sequence numbers, transfers or
/// fetches of never-created content, or undecodable detail fields.
[[nodiscard]] Metrics compute_metrics(const std::vector<TraceEvent>& trace);

/// Deterministic JSON rendering (sorted keys, shortest-round-trip numbers).
[[nodiscard]] std::string metrics_to_json(const Metrics& metrics);

}  // namespace citymesh::sim
