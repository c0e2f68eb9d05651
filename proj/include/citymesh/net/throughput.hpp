#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citymesh/ids.hpp"
#include "citymesh/net/group.hpp"

namespace citymesh::net {

// ============================================================================
// Flows and patterns
// ============================================================================

enum class FlowKind { g2c, c2c, bridge };

[[nodiscard]] const char* to_string(FlowKind kind);

/// Intra-group relay hops: owner<->client traffic is direct, client<->client
/// traffic passes through the owner. Bridge flows use a dedicated interface
/// and do not contend for group airtime.
[[nodiscard]] constexpr int hop_count(FlowKind kind) noexcept {
  return kind == FlowKind::c2c ? 2 : 1;
}

struct Flow {
  PeerId src = 0;
  PeerId dst = 0;
  FlowKind kind = FlowKind::g2c;
  /// Airtime weight used by the analytic model when no fitted weights apply.
  double weight = 1.0;
};

/// Concurrent flows evaluated together. Flows may span several groups; each
/// group's flows contend only among themselves.
struct FlowPattern {
  std::vector<Flow> flows;
};

// ============================================================================
// Pattern signatures and the empirical table
// ============================================================================

/// Canonical signature of one group's concurrent flows: one token per flow
/// ("g2c" or "c2c", with a '!' suffix when the flow's sink is shared with
/// another flow of the pattern), sorted g2c-before-c2c and unshared-before-
/// shared, joined by '+'. Example: "g2c!+c2c!+c2c!".
struct PatternSignature {
  std::string text;
  /// canonical position -> index into the input flow list.
  std::vector<std::size_t> canonical;
};

[[nodiscard]] PatternSignature make_pattern_signature(const std::vector<Flow>& flows);

/// (group size, signature) -> measured per-flow Mbps in canonical order.
using EmpiricalKey = std::pair<std::size_t, std::string>;
using EmpiricalTable = std::map<EmpiricalKey, std::vector<double>>;

/// Shipped measured defaults for group sizes 2..4.
[[nodiscard]] EmpiricalTable builtin_empirical_table();

/// Text format, one row per line: `<size> <signature> <mbps>...`
/// ('#' comments and blank lines ignored; signatures must be canonical).
[[nodiscard]] EmpiricalTable parse_empirical_table(std::string_view text);
[[nodiscard]] EmpiricalTable load_empirical_table(const std::filesystem::path& path);

// ============================================================================
// Throughput model
// ============================================================================

enum class ThroughputMode { empirical, analytic };

[[nodiscard]] const char* to_string(ThroughputMode mode);
[[nodiscard]] std::optional<ThroughputMode> throughput_mode_from_string(std::string_view text);

struct ThroughputModelParams {
  ThroughputMode mode = ThroughputMode::empirical;
  EmpiricalTable empirical_table = builtin_empirical_table();
  /// Medium airtime capacity per group size (Mbps); default_c_med covers
  /// sizes with no entry.
  std::map<std::size_t, double> c_med_by_size;
  double default_c_med = 54.4;
  /// Calibrated airtime weights per (group size, signature), canonical order.
  std::map<EmpiricalKey, std::vector<double>> fitted_weights;
  /// Cross-group link rate, applied per bridge flow.
  double bridge_rate_mbps = 6.8;
};

[[nodiscard]] double medium_capacity(const ThroughputModelParams& params,
                                     std::size_t group_size);

struct ThroughputResult {
  /// Mbps per flow, aligned with the input pattern's flow order.
  std::vector<double> per_flow_mbps;
  /// True when empirical mode found no table row and fell back to the
  /// analytic model for at least one group.
  bool extrapolated = false;
};

/// Airtime-conserving shares: flow i gets t_i = (w_i / sum w) * c_med / h_i,
/// so that sum h_i * t_i == c_med. Hops must be >= 1 and weights positive.
[[nodiscard]] std::vector<double> analytic_throughputs(
    const std::vector<std::pair<int, double>>& hops_and_weights, double c_med);

/// Per-flow throughput for a pattern under the current topology.
///   - empirical mode: exact (size, signature) lookup per group; missing
///     rows fall back to the analytic model and set `extrapolated`.
///   - analytic mode: fitted weights when available for the signature,
///     otherwise the flows' own weights.
///   - bridge flows are priced at bridge_rate and never contend for group
///     airtime; they must match one of `links`.
/// Invalid patterns (wrong endpoints for the kind, peers not grouped
/// together, src == dst) throw ValidationError.
[[nodiscard]] ThroughputResult flow_throughputs(const GroupRegistry& registry,
                                                const std::vector<MultiGroupLink>& links,
                                                const FlowPattern& pattern,
                                                const ThroughputModelParams& params);

}  // namespace citymesh::net
