#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "citymesh/ids.hpp"
#include "citymesh/rng.hpp"

namespace citymesh::mobility {

// ============================================================================
// Geometry
// ============================================================================

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vec2&) const = default;
};

[[nodiscard]] double distance(Vec2 a, Vec2 b);

// ============================================================================
// Parameters and node state
// ============================================================================

/// Random-waypoint movement over a rectangular area with a shared
/// communication range for proximity detection.
struct MobilityParams {
  double area_width_m = 1000.0;
  double area_height_m = 1000.0;
  double v_min_mps = 1.0;  // 0 < v_min <= v_max
  double v_max_mps = 2.0;
  double pause_s = 0.0;  // >= 0; +infinity freezes nodes on arrival
  double comm_range_m = 50.0;
};

/// Throws ValidationError unless every field satisfies its constraint.
void validate_mobility_params(const MobilityParams& params);

struct NodeState {
  PeerId peer = 0;
  Vec2 position;
  Vec2 waypoint;
  double speed_mps = 1.0;
  /// Seconds of pause left to consume before drawing the next waypoint
  /// (counts down across steps; +infinity pins the node permanently).
  double pause_remaining_s = 0.0;

  bool operator==(const NodeState&) const = default;
};

/// Throws ValidationError unless all nodes are in-bounds, have positive
/// speeds and non-negative pauses, and carry distinct peer ids.
void validate_node_states(const std::vector<NodeState>& states,
                          const MobilityParams& params);

/// A node pinned at `position` forever (used for scenario-configured fixed
/// layouts and oracle tests).
[[nodiscard]] inline NodeState static_node(PeerId peer, Vec2 position) {
  return NodeState{peer, position, position, 1.0,
                   std::numeric_limits<double>::infinity()};
}

/// Uniformly drawn initial states (position, waypoint, speed; no pause).
/// Draw order per node: position x, y, waypoint x, y, speed.
[[nodiscard]] std::vector<NodeState> random_node_states(const std::vector<PeerId>& peers,
                                                        const MobilityParams& params,
                                                        Rng& rng);

// ============================================================================
// Movement and contact detection
// ============================================================================

/// Advances every node by dt seconds: move toward the waypoint at the node's
/// speed; on arrival, pause, then draw a new uniform waypoint and a uniform
/// speed (waypoint x, y, then speed) and keep going with the remaining time.
/// Positions never leave the area.
[[nodiscard]] std::vector<NodeState> step(std::vector<NodeState> states,
                                          const MobilityParams& params, double dt,
                                          Rng& rng);

/// Every unordered peer pair within range (Euclidean distance <= R, boundary
/// inclusive). Pairs are normalized (smaller id first) and sorted.
[[nodiscard]] std::vector<std::pair<PeerId, PeerId>> contacts(
    const std::vector<NodeState>& states, double comm_range_m);

}  // namespace citymesh::mobility
