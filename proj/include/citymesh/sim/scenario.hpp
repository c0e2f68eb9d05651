#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "citymesh/dissem/content.hpp"
#include "citymesh/dissem/dissemination.hpp"
#include "citymesh/ids.hpp"
#include "citymesh/mobility/mobility.hpp"
#include "citymesh/net/group.hpp"
#include "citymesh/net/throughput.hpp"
#include "citymesh/sensors/service.hpp"
#include "citymesh/workload/workload.hpp"

namespace citymesh::sim {

// ============================================================================
// Scenario configuration
// ============================================================================

/// One simulated participant. Peers must be declared with dense ids 1..N in
/// order; the workload's user ids map straight onto them.
struct PeerConfig {
  PeerId id = 0;
  sensors::Role role = sensors::Role::citizen;
  std::string category = "citizen";
  std::map<std::string, double> interests;
  std::uint64_t buffer_bytes = 0;  ///< 0 = use the dissemination default.
  int go_intent = 7;               ///< Group-owner intent, 0..15.
  bool share_in_proximity = true;
  bool store_remotely = true;
  /// Starting position; mobile peers without one start at a random point.
  std::optional<mobility::Vec2> position;
  /// Static peers never move (sensor kiosks, parked relays, test rigs).
  bool is_static = false;
};

/// Fixed-rate WLAN access point: peers inside `range_m` talk to the
/// infrastructure directly instead of via D2D.
struct AccessPoint {
  mobility::Vec2 position;
  double range_m = 50.0;
  double rate_mbps = 54.4;
};

/// Environmental-data feed: a sensor registry plus observation files served
/// through the sensor service. Every `publish_interval_s` the service
/// publishes one sensor-data content item per station holding data.
struct SensorFeedConfig {
  std::filesystem::path registry_json;
  std::filesystem::path observations_dir;
  double publish_interval_s = 300.0;
  std::vector<std::string> tags = {"air-quality"};
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double duration_s = 600.0;
  double tick_s = 1.0;

  std::vector<PeerConfig> peers;
  mobility::MobilityParams mobility;
  net::GroupConfig group;
  net::ThroughputModelParams throughput;
  dissem::DisseminationParams dissemination;

  /// Social workload: generated from params by default. n_users 0 resolves
  /// to the peer count and session_length_s 0 to the scenario duration.
  workload::WorkloadParams workload{.n_users = 0, .session_length_s = 0.0};
  /// When set, these events are used instead of generation (loaded from
  /// `workload_import` when the config came from a file).
  std::optional<std::vector<dissem::ContentItem>> workload_items;
  std::optional<std::filesystem::path> workload_import;

  std::vector<net::BridgeDeclaration> bridges;
  std::optional<SensorFeedConfig> sensors;
  std::vector<AccessPoint> access_points;
};

/// Checks cross-field invariants: dense peer ids, tick/duration sanity,
/// per-module parameter validity, bridge endpoints and workload authors all
/// declared, static peers positioned, positions inside the area. Throws
/// ValidationError. Also resolves the workload defaults (n_users, session
/// length) in place.
void resolve_and_validate_scenario(ScenarioConfig& config);

// ============================================================================
// JSON round-trip and overrides
// ============================================================================

/// Parses a scenario from JSON text (see README for the schema). Relative
/// paths inside the config resolve against `base_dir`. Overrides are
/// dotted-path assignments ("seed=7", "mobility.v_max_mps=3.5",
/// "peers.0.go_intent=15") applied to the document before decoding; values
/// parse as JSON scalars when possible, else as strings. Throws
/// ValidationError on schema violations, unknown keys, malformed override
/// expressions, or override paths that lead through non-containers.
[[nodiscard]] ScenarioConfig scenario_from_json(const std::string& text,
                                                const std::filesystem::path& base_dir = ".",
                                                const std::vector<std::string>& overrides = {});
[[nodiscard]] ScenarioConfig load_scenario(const std::filesystem::path& path,
                                           const std::vector<std::string>& overrides = {});

/// Renders the fully-resolved config (defaults materialized) back to JSON —
/// the self-describing snapshot written next to every run's outputs.
[[nodiscard]] std::string scenario_to_json(const ScenarioConfig& config);

/// Parses a standalone workload-parameters document: a JSON object with the
/// same keys as a scenario's "workload" section, minus "import". Absent keys
/// keep the library defaults (n_users 22, three-hour session). Throws
/// ValidationError on schema or parameter violations.
[[nodiscard]] workload::WorkloadParams workload_params_from_json(const std::string& text);
[[nodiscard]] workload::WorkloadParams load_workload_params(const std::filesystem::path& path);

}  // namespace citymesh::sim
