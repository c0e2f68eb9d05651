#pragma once

#include <vector>

#include "citymesh/sim/metrics.hpp"
#include "citymesh/sim/scenario.hpp"
#include "citymesh/sim/trace.hpp"

namespace citymesh::sim {

// ============================================================================
// Simulation engine
// ============================================================================

/// Outcome of one run: the full event narration plus the metrics derived
/// from it. `metrics` always equals compute_metrics(trace), so a saved trace
/// replays to the same numbers.
struct RunResult {
  std::vector<TraceEvent> trace;
  Metrics metrics;
};

/// Runs one scenario tick by tick. Each tick, in order: due content is
/// created into its author's buffer, nodes move, proximity contacts open and
/// close, device groups dissolve (members out of the owner's range) and form
/// (greedy mutual-range cliques of ungrouped peers, the highest-intent
/// member becomes owner), declared cross-group bridges activate where the
/// topology allows, every connected pair (same group, or an active bridge)
/// exchanges content at the throughput the contention model assigns to the
/// tick's pending flows, the sensor feed publishes due snapshots, and peers
/// in access-point range fetch interesting sensor items and upload their own
/// stored-remotely content over the shared WLAN budget.
///
/// Deterministic: the same config always yields a byte-identical trace.
/// Internal exchange invariants (no transfer to a peer already holding the
/// item, buffer accounting intact) are enforced on every contact and throw
/// IntegrityError if the engine ever violates them.
[[nodiscard]] RunResult run_scenario(ScenarioConfig config);

}  // namespace citymesh::sim
