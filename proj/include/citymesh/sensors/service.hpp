#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citymesh/dissem/content.hpp"
#include "citymesh/sensors/aqi.hpp"
#include "citymesh/sme/types.hpp"

namespace citymesh::sensors {

// ============================================================================
// Roles and registry model
// ============================================================================

/// Access level of the caller. Citizens receive derived indexes only; raw
/// readings are reserved for experts.
enum class Role { citizen, expert };

[[nodiscard]] const char* to_string(Role role);
[[nodiscard]] std::optional<Role> role_from_string(std::string_view text);

/// A fixed monitoring station hosting one or more sensors.
struct StationInfo {
  std::string station_id;
  sme::GeoPoint location;
  std::vector<sme::SensorDescription> sensors;

  bool operator==(const StationInfo&) const = default;
};

/// The discoverable shape of the service: stations sorted by id, each with
/// its sensors sorted by id.
struct ServiceDescription {
  std::string service_id;
  std::vector<StationInfo> stations;

  bool operator==(const ServiceDescription&) const = default;
};

/// Stored record of an accepted upload.
struct UploadRecord {
  std::uint64_t receipt = 0;
  dissem::ContentItem item;
  std::string payload;
};

// ============================================================================
// SensorService
// ============================================================================

/// In-process model of the city's environmental data service: a sensor
/// registry, an observation store, derived air-quality queries, and an
/// upload endpoint for user-generated content.
///
/// Reads are const and safe to run concurrently; ingesting observations is a
/// setup-phase operation and must not race with queries. Uploads are
/// serialized internally, so concurrent uploads receive distinct receipts.
class SensorService {
 public:
  SensorService(ServiceDescription description, BreakpointTable table);

  /// Movable for factory returns (never move a service with uploads in
  /// flight); not copyable.
  SensorService(SensorService&& other) noexcept;
  SensorService& operator=(SensorService&&) = delete;

  /// Parses and validates a registry JSON document (see README for the
  /// schema). Station and sensor ids must be unique; coordinates, ranges and
  /// sampling frequencies are range-checked.
  [[nodiscard]] static ServiceDescription load_registry_text(std::string_view text);
  [[nodiscard]] static ServiceDescription load_registry_file(const std::filesystem::path& path);

  /// Convenience: registry + every `*.sme` observation file in a directory.
  [[nodiscard]] static SensorService from_files(const std::filesystem::path& registry_json,
                                                const std::filesystem::path& observations_dir,
                                                BreakpointTable table);

  [[nodiscard]] const ServiceDescription& describe() const { return description_; }
  [[nodiscard]] const BreakpointTable& breakpoints() const { return table_; }

  /// Adds an observation set to the store. The sensor must be registered and
  /// the set must satisfy the observation invariants. Duplicate records
  /// (same timestamp and value) collapse to one.
  void ingest_observation(const sme::ObservationSet& observations);

  /// Ingests every `*.sme` file in `dir` in name order.
  void ingest_directory(const std::filesystem::path& dir);

  /// Raw readings for the requested sensors within the window, one set per
  /// sensor that has data, sorted by sensor id. Requires Role::expert;
  /// citizens get AuthorizationError. Unknown sensor ids -> NotFoundError.
  [[nodiscard]] std::vector<sme::ObservationSet> raw_observations(
      const std::vector<std::string>& sensor_ids, const sme::TimeWindow& window,
      Role role) const;

  /// Air-quality indexes for every station owning at least one requested
  /// sensor, computed from the latest in-window reading of each pollutant
  /// the station measures (all of the station's sensors contribute, not just
  /// the requested ones; properties without breakpoint rows are ignored).
  /// Stations with no usable in-window data are skipped. Available to both
  /// roles.
  [[nodiscard]] std::vector<AirQualityIndex> station_indexes(
      const std::vector<std::string>& sensor_ids, const sme::TimeWindow& window) const;

  /// Accepts a content upload and returns its receipt (1, 2, 3, ...).
  /// The item must carry at least one tag and opt into remote storage
  /// (PolicyError otherwise). A non-empty payload must match
  /// `item.size_bytes`, and sensor_data payloads must parse as observation
  /// wire form -- codec errors propagate unchanged.
  std::uint64_t upload_user_content(dissem::ContentItem item, std::string payload);

  [[nodiscard]] const UploadRecord* upload_by_receipt(std::uint64_t receipt) const;
  [[nodiscard]] std::size_t upload_count() const;

  [[nodiscard]] const sme::SensorDescription* find_sensor(const std::string& sensor_id) const;
  [[nodiscard]] const StationInfo* find_station(const std::string& station_id) const;
  /// Station owning a sensor, or nullptr.
  [[nodiscard]] const StationInfo* station_of_sensor(const std::string& sensor_id) const;

  /// All readings stored for one sensor (sorted by timestamp).
  [[nodiscard]] const std::vector<sme::ValueRecord>* readings_for(
      const std::string& sensor_id) const;

 private:
  struct SensorRef {
    std::size_t station = 0;
    std::size_t sensor = 0;
  };

  ServiceDescription description_;
  BreakpointTable table_;
  std::map<std::string, SensorRef> sensors_by_id_;
  std::map<std::string, std::size_t> stations_by_id_;
  std::map<std::string, std::vector<sme::ValueRecord>> readings_;
  std::deque<UploadRecord> uploads_;  // deque: records stay addressable across uploads
  mutable std::mutex upload_mutex_;
};

}  // namespace citymesh::sensors
