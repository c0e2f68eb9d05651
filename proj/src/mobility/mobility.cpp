#include "citymesh/mobility/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "citymesh/error.hpp"

namespace citymesh::mobility {

namespace {

[[nodiscard]] bool in_area(Vec2 p, const MobilityParams& params) {
  return p.x >= 0.0 && p.x <= params.area_width_m && p.y >= 0.0 &&
         p.y <= params.area_height_m;
}

[[nodiscard]] Vec2 draw_point(const MobilityParams& params, Rng& rng) {
  const double x = rng.next_double() * params.area_width_m;
  const double y = rng.next_double() * params.area_height_m;
  return Vec2{x, y};
}

[[nodiscard]] double draw_speed(const MobilityParams& params, Rng& rng) {
  return params.v_min_mps + (params.v_max_mps - params.v_min_mps) * rng.next_double();
}

void advance(NodeState& node, const MobilityParams& params, double dt, Rng& rng) {
  double remaining = dt;
  while (remaining > 0.0) {
    if (node.pause_remaining_s > 0.0) {
      if (std::isinf(node.pause_remaining_s)) return;  // pinned node
      const double consumed = std::min(node.pause_remaining_s, remaining);
      node.pause_remaining_s -= consumed;
      remaining -= consumed;
      if (node.pause_remaining_s > 0.0) return;  // step ends mid-pause
      node.waypoint = draw_point(params, rng);
      node.speed_mps = draw_speed(params, rng);
      continue;
    }

    const double dist = distance(node.position, node.waypoint);
    if (dist == 0.0) {
      // At the waypoint with no pause left: an arrival (or a fresh node).
      if (params.pause_s > 0.0) {
        node.pause_remaining_s = params.pause_s;
        continue;
      }
      node.waypoint = draw_point(params, rng);
      node.speed_mps = draw_speed(params, rng);
      if (node.waypoint == node.position) return;  // zero-length leg; give up the step
      continue;
    }

    const double travel_time = dist / node.speed_mps;
    if (travel_time > remaining) {
      // Partial leg: a convex combination of two in-bounds points.
      const double f = node.speed_mps * remaining / dist;
      node.position.x += (node.waypoint.x - node.position.x) * f;
      node.position.y += (node.waypoint.y - node.position.y) * f;
      return;
    }
    node.position = node.waypoint;  // exact arrival
    remaining -= travel_time;
    node.pause_remaining_s = params.pause_s;
  }
}

}  // namespace

// ============================================================================
// Geometry
// ============================================================================

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// ============================================================================
// Validation
// ============================================================================

void validate_mobility_params(const MobilityParams& params) {
  if (!(params.area_width_m > 0.0) || !(params.area_height_m > 0.0))
    throw ValidationError{"mobility area must have positive extent"};
  if (!(params.v_min_mps > 0.0) || !(params.v_min_mps <= params.v_max_mps) ||
      !std::isfinite(params.v_max_mps))
    throw ValidationError{"mobility speeds need 0 < v_min <= v_max"};
  if (!(params.pause_s >= 0.0))  // rejects NaN; +infinity is allowed
    throw ValidationError{"mobility pause must be non-negative"};
  if (!(params.comm_range_m > 0.0) || !std::isfinite(params.comm_range_m))
    throw ValidationError{"communication range must be positive"};
}

void validate_node_states(const std::vector<NodeState>& states,
                          const MobilityParams& params) {
  std::set<PeerId> seen;
  for (const NodeState& node : states) {
    if (!seen.insert(node.peer).second)
      throw ValidationError{"duplicate peer in mobility states"};
    if (!in_area(node.position, params) || !in_area(node.waypoint, params))
      throw ValidationError{"node position and waypoint must lie inside the area"};
    if (!(node.speed_mps > 0.0) || !std::isfinite(node.speed_mps))
      throw ValidationError{"node speed must be positive"};
    if (!(node.pause_remaining_s >= 0.0))
      throw ValidationError{"node pause must be non-negative"};
  }
}

std::vector<NodeState> random_node_states(const std::vector<PeerId>& peers,
                                          const MobilityParams& params, Rng& rng) {
  validate_mobility_params(params);
  std::vector<NodeState> states;
  states.reserve(peers.size());
  for (const PeerId peer : peers) {
    NodeState node;
    node.peer = peer;
    node.position = draw_point(params, rng);
    node.waypoint = draw_point(params, rng);
    node.speed_mps = draw_speed(params, rng);
    states.push_back(node);
  }
  validate_node_states(states, params);
  return states;
}

// ============================================================================
// Movement and contact detection
// ============================================================================

std::vector<NodeState> step(std::vector<NodeState> states, const MobilityParams& params,
                            double dt, Rng& rng) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ValidationError{"mobility step needs dt > 0"};
  validate_mobility_params(params);
  validate_node_states(states, params);
  for (NodeState& node : states) advance(node, params, dt, rng);
  return states;
}

std::vector<std::pair<PeerId, PeerId>> contacts(const std::vector<NodeState>& states,
                                                double comm_range_m) {
  if (!(comm_range_m > 0.0) || !std::isfinite(comm_range_m))
    throw ValidationError{"communication range must be positive"};
  std::vector<std::pair<PeerId, PeerId>> pairs;
  const double range_sq = comm_range_m * comm_range_m;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      const double dx = states[i].position.x - states[j].position.x;
      const double dy = states[i].position.y - states[j].position.y;
      if (dx * dx + dy * dy <= range_sq) {
        pairs.emplace_back(std::min(states[i].peer, states[j].peer),
                           std::max(states[i].peer, states[j].peer));
      }
    }
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

}  // namespace citymesh::mobility
