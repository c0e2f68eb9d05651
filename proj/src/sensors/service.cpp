#include "citymesh/sensors/service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "citymesh/error.hpp"
#include "citymesh/sme/codec.hpp"

namespace citymesh::sensors {

namespace {

void require_id(const std::string& value, const std::string& what) {
  if (value.empty()) throw ValidationError(what + " must be non-empty");
  if (value.find('\n') != std::string::npos)
    throw ValidationError(what + " must not contain newlines");
}

void validate_location(const sme::GeoPoint& point, const std::string& context) {
  if (!std::isfinite(point.lat) || point.lat < -90.0 || point.lat > 90.0 ||
      !std::isfinite(point.lon) || point.lon < -180.0 || point.lon > 180.0) {
    throw ValidationError(context + ": location out of bounds");
  }
}

void validate_sensor(const sme::SensorDescription& sensor) {
  require_id(sensor.sensor_id, "sensor_id");
  const std::string context = "sensor '" + sensor.sensor_id + "'";
  require_id(sensor.observed_property, context + ": observed_property");
  require_id(sensor.unit, context + ": unit");
  if (sensor.vendor.find('\n') != std::string::npos)
    throw ValidationError(context + ": vendor must not contain newlines");
  if (!std::isfinite(sensor.sampling_frequency_hz) || sensor.sampling_frequency_hz <= 0.0)
    throw ValidationError(context + ": sampling frequency must be positive");
  if (!std::isfinite(sensor.valid_range.min) || !std::isfinite(sensor.valid_range.max) ||
      sensor.valid_range.min > sensor.valid_range.max)
    throw ValidationError(context + ": valid range must satisfy min <= max");
  validate_location(sensor.location, context);
}

const nlohmann::json& require_field(const nlohmann::json& object, const char* key,
                                    const std::string& context) {
  const auto it = object.find(key);
  if (it == object.end()) throw ValidationError(context + ": missing field '" + key + "'");
  return *it;
}

std::string get_string(const nlohmann::json& object, const char* key,
                       const std::string& context) {
  const auto& value = require_field(object, key, context);
  if (!value.is_string())
    throw ValidationError(context + ": field '" + key + "' must be a string");
  return value.get<std::string>();
}

double get_number(const nlohmann::json& object, const char* key, const std::string& context) {
  const auto& value = require_field(object, key, context);
  if (!value.is_number())
    throw ValidationError(context + ": field '" + key + "' must be a number");
  return value.get<double>();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) throw IoError{"cannot open file: " + path.string()};
  std::ostringstream text;
  text << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError{"cannot read file: " + path.string()};
  return std::move(text).str();
}

/// Span of records with start <= timestamp <= end.
std::pair<std::vector<sme::ValueRecord>::const_iterator,
          std::vector<sme::ValueRecord>::const_iterator>
window_slice(const std::vector<sme::ValueRecord>& records, const sme::TimeWindow& window) {
  const auto first = std::lower_bound(
      records.begin(), records.end(), window.start_ms,
      [](const sme::ValueRecord& r, Instant t) { return r.timestamp_ms < t; });
  const auto last = std::upper_bound(
      records.begin(), records.end(), window.end_ms,
      [](Instant t, const sme::ValueRecord& r) { return t < r.timestamp_ms; });
  return {first, last};
}

void validate_window(const sme::TimeWindow& window) {
  if (!instant_printable(window.start_ms) || !instant_printable(window.end_ms))
    throw ValidationError("query window outside printable instant range");
  if (window.start_ms > window.end_ms)
    throw ValidationError("query window start is after its end");
}

}  // namespace

const char* to_string(Role role) {
  return role == Role::expert ? "expert" : "citizen";
}

std::optional<Role> role_from_string(std::string_view text) {
  if (text == "citizen") return Role::citizen;
  if (text == "expert") return Role::expert;
  return std::nullopt;
}

// ============================================================================
// Registry loading
// ============================================================================

ServiceDescription SensorService::load_registry_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& error) {
    throw ParseError{std::string{"registry is not valid JSON: "} + error.what(), 0};
  }
  if (!doc.is_object()) throw ValidationError{"registry must be a JSON object"};

  ServiceDescription out;
  out.service_id = get_string(doc, "service_id", "registry");
  require_id(out.service_id, "service_id");

  const auto& stations = require_field(doc, "stations", "registry");
  if (!stations.is_array()) throw ValidationError{"registry: 'stations' must be an array"};

  for (const auto& station_doc : stations) {
    if (!station_doc.is_object())
      throw ValidationError{"registry: each station must be an object"};
    StationInfo station;
    station.station_id = get_string(station_doc, "station_id", "station");
    require_id(station.station_id, "station_id");
    const std::string context = "station '" + station.station_id + "'";
    station.location.lat = get_number(station_doc, "lat", context);
    station.location.lon = get_number(station_doc, "lon", context);
    validate_location(station.location, context);

    const auto& sensors = require_field(station_doc, "sensors", context);
    if (!sensors.is_array() || sensors.empty())
      throw ValidationError{context + ": 'sensors' must be a non-empty array"};
    for (const auto& sensor_doc : sensors) {
      if (!sensor_doc.is_object())
        throw ValidationError{context + ": each sensor must be an object"};
      sme::SensorDescription sensor;
      sensor.sensor_id = get_string(sensor_doc, "sensor_id", context);
      if (sensor_doc.contains("vendor"))
        sensor.vendor = get_string(sensor_doc, "vendor", context);
      sensor.observed_property = get_string(sensor_doc, "observed_property", context);
      sensor.unit = get_string(sensor_doc, "unit", context);
      sensor.sampling_frequency_hz =
          get_number(sensor_doc, "sampling_frequency_hz", context);
      const auto& range = require_field(sensor_doc, "valid_range", context);
      if (!range.is_array() || range.size() != 2 || !range[0].is_number() ||
          !range[1].is_number())
        throw ValidationError{context + ": 'valid_range' must be [min, max]"};
      sensor.valid_range = {range[0].get<double>(), range[1].get<double>()};
      sensor.location = station.location;
      if (sensor_doc.contains("lat")) sensor.location.lat = get_number(sensor_doc, "lat", context);
      if (sensor_doc.contains("lon")) sensor.location.lon = get_number(sensor_doc, "lon", context);
      validate_sensor(sensor);
      station.sensors.push_back(std::move(sensor));
    }
    out.stations.push_back(std::move(station));
  }
  return out;
}

ServiceDescription SensorService::load_registry_file(const std::filesystem::path& path) {
  return load_registry_text(read_text_file(path));
}

SensorService SensorService::from_files(const std::filesystem::path& registry_json,
                                        const std::filesystem::path& observations_dir,
                                        BreakpointTable table) {
  SensorService service{load_registry_file(registry_json), std::move(table)};
  service.ingest_directory(observations_dir);
  return service;
}

// ============================================================================
// Construction and ingest
// ============================================================================

SensorService::SensorService(SensorService&& other) noexcept
    : description_(std::move(other.description_)),
      table_(std::move(other.table_)),
      sensors_by_id_(std::move(other.sensors_by_id_)),
      stations_by_id_(std::move(other.stations_by_id_)),
      readings_(std::move(other.readings_)),
      uploads_(std::move(other.uploads_)) {}

SensorService::SensorService(ServiceDescription description, BreakpointTable table)
    : description_(std::move(description)), table_(std::move(table)) {
  require_id(description_.service_id, "service_id");
  std::sort(description_.stations.begin(), description_.stations.end(),
            [](const StationInfo& a, const StationInfo& b) {
              return a.station_id < b.station_id;
            });
  for (std::size_t s = 0; s < description_.stations.size(); ++s) {
    auto& station = description_.stations[s];
    require_id(station.station_id, "station_id");
    validate_location(station.location, "station '" + station.station_id + "'");
    if (!stations_by_id_.emplace(station.station_id, s).second)
      throw ValidationError{"duplicate station id '" + station.station_id + "'"};
    std::sort(station.sensors.begin(), station.sensors.end(),
              [](const sme::SensorDescription& a, const sme::SensorDescription& b) {
                return a.sensor_id < b.sensor_id;
              });
    for (std::size_t i = 0; i < station.sensors.size(); ++i) {
      validate_sensor(station.sensors[i]);
      const auto& id = station.sensors[i].sensor_id;
      if (!sensors_by_id_.emplace(id, SensorRef{s, i}).second)
        throw ValidationError{"duplicate sensor id '" + id + "'"};
    }
  }
}

void SensorService::ingest_observation(const sme::ObservationSet& observations) {
  sme::validate_observation(observations);
  if (!sensors_by_id_.contains(observations.sensor_id))
    throw NotFoundError{"unknown sensor '" + observations.sensor_id + "'"};
  for (const auto& record : observations.records) {
    if (!std::isfinite(record.value))
      throw ValidationError{"readings must be finite"};
  }
  auto& store = readings_[observations.sensor_id];
  store.insert(store.end(), observations.records.begin(), observations.records.end());
  std::sort(store.begin(), store.end(),
            [](const sme::ValueRecord& a, const sme::ValueRecord& b) {
              return std::tie(a.timestamp_ms, a.value) < std::tie(b.timestamp_ms, b.value);
            });
  store.erase(std::unique(store.begin(), store.end()), store.end());
}

void SensorService::ingest_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it{dir, ec};
  if (ec) throw IoError{"cannot list observation directory: " + dir.string()};
  std::vector<std::filesystem::path> files;
  for (const auto& entry : it) {
    if (entry.path().extension() == ".sme") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    ingest_observation(sme::deserialize_observation(read_text_file(file)));
  }
}

// ============================================================================
// Queries
// ============================================================================

std::vector<sme::ObservationSet> SensorService::raw_observations(
    const std::vector<std::string>& sensor_ids, const sme::TimeWindow& window,
    Role role) const {
  if (role != Role::expert)
    throw AuthorizationError{"raw readings require the expert role"};
  validate_window(window);
  if (sensor_ids.empty()) throw ValidationError{"query must name at least one sensor"};
  const std::set<std::string> wanted{sensor_ids.begin(), sensor_ids.end()};
  for (const auto& id : wanted) {
    if (!sensors_by_id_.contains(id)) throw NotFoundError{"unknown sensor '" + id + "'"};
  }

  std::vector<sme::ObservationSet> out;
  for (const auto& id : wanted) {
    const auto store = readings_.find(id);
    if (store == readings_.end()) continue;
    const auto [first, last] = window_slice(store->second, window);
    if (first == last) continue;
    out.push_back(sme::ObservationSet{id, window, {first, last}});
  }
  return out;
}

std::vector<AirQualityIndex> SensorService::station_indexes(
    const std::vector<std::string>& sensor_ids, const sme::TimeWindow& window) const {
  validate_window(window);
  if (sensor_ids.empty()) throw ValidationError{"query must name at least one sensor"};
  std::set<std::size_t> station_rows;
  for (const auto& id : sensor_ids) {
    const auto hit = sensors_by_id_.find(id);
    if (hit == sensors_by_id_.end()) throw NotFoundError{"unknown sensor '" + id + "'"};
    station_rows.insert(hit->second.station);
  }

  std::vector<AirQualityIndex> out;
  for (const std::size_t row : station_rows) {
    const StationInfo& station = description_.stations[row];
    // Latest in-window reading per pollutant; on equal timestamps the sensor
    // earliest in id order wins.
    std::map<std::string, std::pair<Instant, double>> latest;
    for (const auto& sensor : station.sensors) {
      if (!table_.knows(sensor.observed_property)) continue;
      const auto store = readings_.find(sensor.sensor_id);
      if (store == readings_.end()) continue;
      const auto [first, last] = window_slice(store->second, window);
      if (first == last) continue;
      const auto& newest = *(last - 1);
      const auto [slot, inserted] = latest.try_emplace(
          sensor.observed_property, newest.timestamp_ms, newest.value);
      if (!inserted && newest.timestamp_ms > slot->second.first)
        slot->second = {newest.timestamp_ms, newest.value};
    }
    if (latest.empty()) continue;
    std::map<std::string, double> concentrations;
    for (const auto& [property, reading] : latest)
      concentrations.emplace(property, reading.second);
    AirQualityIndex index = compute_air_quality_index(concentrations, table_);
    index.station_id = station.station_id;
    out.push_back(std::move(index));
  }
  return out;
}

// ============================================================================
// Uploads
// ============================================================================

std::uint64_t SensorService::upload_user_content(dissem::ContentItem item,
                                                 std::string payload) {
  dissem::validate_content_item(item);
  if (!item.store_remotely)
    throw PolicyError{"content item is not opted into remote storage"};
  if (!payload.empty() && payload.size() != item.size_bytes)
    throw ValidationError{"payload size does not match the declared item size"};
  if (item.kind == dissem::ContentKind::sensor_data) {
    if (payload.empty())
      throw ValidationError{"sensor_data uploads must carry their payload"};
    (void)sme::deserialize_observation(payload);  // codec errors propagate unchanged
  }
  const std::lock_guard<std::mutex> lock{upload_mutex_};
  const std::uint64_t receipt = uploads_.size() + 1;
  uploads_.push_back(UploadRecord{receipt, std::move(item), std::move(payload)});
  return receipt;
}

const UploadRecord* SensorService::upload_by_receipt(std::uint64_t receipt) const {
  const std::lock_guard<std::mutex> lock{upload_mutex_};
  if (receipt == 0 || receipt > uploads_.size()) return nullptr;
  return &uploads_[receipt - 1];
}

std::size_t SensorService::upload_count() const {
  const std::lock_guard<std::mutex> lock{upload_mutex_};
  return uploads_.size();
}

// ============================================================================
// Lookups
// ============================================================================

const sme::SensorDescription* SensorService::find_sensor(const std::string& sensor_id) const {
  const auto hit = sensors_by_id_.find(sensor_id);
  if (hit == sensors_by_id_.end()) return nullptr;
  return &description_.stations[hit->second.station].sensors[hit->second.sensor];
}

const StationInfo* SensorService::find_station(const std::string& station_id) const {
  const auto hit = stations_by_id_.find(station_id);
  if (hit == stations_by_id_.end()) return nullptr;
  return &description_.stations[hit->second];
}

const StationInfo* SensorService::station_of_sensor(const std::string& sensor_id) const {
  const auto hit = sensors_by_id_.find(sensor_id);
  if (hit == sensors_by_id_.end()) return nullptr;
  return &description_.stations[hit->second.station];
}

const std::vector<sme::ValueRecord>* SensorService::readings_for(
    const std::string& sensor_id) const {
  const auto hit = readings_.find(sensor_id);
  if (hit == readings_.end()) return nullptr;
  return &hit->second;
}

}  // namespace citymesh::sensors
