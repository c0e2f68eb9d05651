#include "citymesh/sim/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "citymesh/error.hpp"
#include "citymesh/net/calibrate.hpp"

namespace citymesh::sim {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ValidationError{"scenario config: " + where + ": " + what};
}

// ----------------------------------------------------------------------------
// Typed JSON access with path-qualified error messages
// ----------------------------------------------------------------------------

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    bool known = false;
    for (const char* name : allowed) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) fail(where, "unknown key '" + key + "'");
  }
}

const json& require_object(const json& node, const std::string& where) {
  if (!node.is_object()) fail(where, "expected an object");
  return node;
}

const json& require_array(const json& node, const std::string& where) {
  if (!node.is_array()) fail(where, "expected an array");
  return node;
}

/// Present-and-non-null lookup; nullptr means "use the default".
const json* opt(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

double as_number(const json& node, const std::string& where) {
  if (!node.is_number()) fail(where, "expected a number");
  return node.get<double>();
}

/// Number that may also be spelled "inf" (JSON itself cannot carry infinity).
double as_extended_number(const json& node, const std::string& where) {
  if (node.is_string()) {
    const auto text = node.get<std::string>();
    if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
    fail(where, "expected a number or \"inf\"");
  }
  return as_number(node, where);
}

std::uint64_t as_uint(const json& node, const std::string& where) {
  if (!node.is_number_unsigned()) fail(where, "expected a non-negative integer");
  return node.get<std::uint64_t>();
}

int as_int(const json& node, const std::string& where) {
  if (!node.is_number_integer()) fail(where, "expected an integer");
  return node.get<int>();
}

bool as_bool(const json& node, const std::string& where) {
  if (!node.is_boolean()) fail(where, "expected a boolean");
  return node.get<bool>();
}

std::string as_string(const json& node, const std::string& where) {
  if (!node.is_string()) fail(where, "expected a string");
  return node.get<std::string>();
}

std::vector<std::string> as_string_list(const json& node, const std::string& where) {
  std::vector<std::string> out;
  for (const json& entry : require_array(node, where))
    out.push_back(as_string(entry, where + " entry"));
  return out;
}

std::filesystem::path resolve_path(const std::filesystem::path& base_dir,
                                   const std::string& text, const std::string& where) {
  if (text.empty()) fail(where, "path must be non-empty");
  std::filesystem::path p{text};
  if (p.is_relative()) p = base_dir / p;
  return p.lexically_normal();
}

// ----------------------------------------------------------------------------
// Section decoders
// ----------------------------------------------------------------------------

mobility::Vec2 decode_vec2(const json& node, const std::string& where) {
  const json& obj = require_object(node, where);
  check_keys(obj, where, {"x", "y"});
  mobility::Vec2 v;
  if (const json* x = opt(obj, "x")) v.x = as_number(*x, where + ".x");
  if (const json* y = opt(obj, "y")) v.y = as_number(*y, where + ".y");
  return v;
}

PeerConfig decode_peer(const json& node, const std::string& where) {
  const json& obj = require_object(node, where);
  check_keys(obj, where,
             {"id", "role", "category", "interests", "buffer_bytes", "go_intent",
              "share_in_proximity", "store_remotely", "position", "is_static"});
  PeerConfig peer;
  if (const json* id = opt(obj, "id"))
    peer.id = static_cast<PeerId>(as_uint(*id, where + ".id"));
  if (const json* role = opt(obj, "role")) {
    const auto text = as_string(*role, where + ".role");
    const auto parsed = sensors::role_from_string(text);
    if (!parsed) fail(where + ".role", "unknown role '" + text + "'");
    peer.role = *parsed;
  }
  if (const json* category = opt(obj, "category"))
    peer.category = as_string(*category, where + ".category");
  if (const json* interests = opt(obj, "interests")) {
    for (const auto& [tag, weight] : require_object(*interests, where + ".interests").items())
      peer.interests[tag] = as_number(weight, where + ".interests." + tag);
  }
  if (const json* buffer = opt(obj, "buffer_bytes"))
    peer.buffer_bytes = as_uint(*buffer, where + ".buffer_bytes");
  if (const json* intent = opt(obj, "go_intent"))
    peer.go_intent = as_int(*intent, where + ".go_intent");
  if (const json* share = opt(obj, "share_in_proximity"))
    peer.share_in_proximity = as_bool(*share, where + ".share_in_proximity");
  if (const json* store = opt(obj, "store_remotely"))
    peer.store_remotely = as_bool(*store, where + ".store_remotely");
  if (const json* position = opt(obj, "position"))
    peer.position = decode_vec2(*position, where + ".position");
  if (const json* is_static = opt(obj, "is_static"))
    peer.is_static = as_bool(*is_static, where + ".is_static");
  return peer;
}

void decode_mobility(const json& node, const std::string& where, mobility::MobilityParams& out) {
  const json& obj = require_object(node, where);
  check_keys(obj, where,
             {"area_width_m", "area_height_m", "v_min_mps", "v_max_mps", "pause_s",
              "comm_range_m"});
  if (const json* v = opt(obj, "area_width_m")) out.area_width_m = as_number(*v, where + ".area_width_m");
  if (const json* v = opt(obj, "area_height_m")) out.area_height_m = as_number(*v, where + ".area_height_m");
  if (const json* v = opt(obj, "v_min_mps")) out.v_min_mps = as_number(*v, where + ".v_min_mps");
  if (const json* v = opt(obj, "v_max_mps")) out.v_max_mps = as_number(*v, where + ".v_max_mps");
  if (const json* v = opt(obj, "pause_s")) out.pause_s = as_extended_number(*v, where + ".pause_s");
  if (const json* v = opt(obj, "comm_range_m")) out.comm_range_m = as_number(*v, where + ".comm_range_m");
}

net::EmpiricalTable decode_empirical_table(const json& node, const std::string& where,
                                           const std::filesystem::path& base_dir) {
  if (node.is_string())
    return net::load_empirical_table(resolve_path(base_dir, node.get<std::string>(), where));
  net::EmpiricalTable table;
  for (const json& row : require_array(node, where)) {
    const json& obj = require_object(row, where + " row");
    check_keys(obj, where + " row", {"size", "signature", "mbps"});
    const json* size = opt(obj, "size");
    const json* signature = opt(obj, "signature");
    const json* mbps = opt(obj, "mbps");
    if (!size || !signature || !mbps)
      fail(where + " row", "needs size, signature and mbps");
    std::vector<double> rates;
    for (const json& rate : require_array(*mbps, where + " row mbps"))
      rates.push_back(as_number(rate, where + " row mbps entry"));
    table[{static_cast<std::size_t>(as_uint(*size, where + " row size")),
           as_string(*signature, where + " row signature")}] = std::move(rates);
  }
  return table;
}

void decode_throughput(const json& node, const std::string& where,
                       const std::filesystem::path& base_dir,
                       net::ThroughputModelParams& out) {
  const json& obj = require_object(node, where);
  check_keys(obj, where,
             {"mode", "empirical_table", "analytic_params", "c_med_by_size", "fitted_weights",
              "default_c_med", "bridge_rate_mbps"});
  if (const json* mode = opt(obj, "mode")) {
    const auto text = as_string(*mode, where + ".mode");
    const auto parsed = net::throughput_mode_from_string(text);
    if (!parsed) fail(where + ".mode", "unknown mode '" + text + "'");
    out.mode = *parsed;
  }
  if (const json* table = opt(obj, "empirical_table"))
    out.empirical_table = decode_empirical_table(*table, where + ".empirical_table", base_dir);
  if (const json* params = opt(obj, "analytic_params"))
    net::load_analytic_params(
        out, resolve_path(base_dir, as_string(*params, where + ".analytic_params"),
                          where + ".analytic_params"));
  if (const json* c_med = opt(obj, "c_med_by_size")) {
    for (const auto& [key, value] : require_object(*c_med, where + ".c_med_by_size").items()) {
      std::size_t size = 0;
      try {
        size = static_cast<std::size_t>(std::stoul(key));
      } catch (const std::exception&) {
        fail(where + ".c_med_by_size", "key '" + key + "' is not a group size");
      }
      out.c_med_by_size[size] = as_number(value, where + ".c_med_by_size." + key);
    }
  }
  if (const json* weights = opt(obj, "fitted_weights")) {
    for (const json& row : require_array(*weights, where + ".fitted_weights")) {
      const json& entry = require_object(row, where + ".fitted_weights row");
      check_keys(entry, where + ".fitted_weights row", {"size", "signature", "weights"});
      const json* size = opt(entry, "size");
      const json* signature = opt(entry, "signature");
      const json* values = opt(entry, "weights");
      if (!size || !signature || !values)
        fail(where + ".fitted_weights row", "needs size, signature and weights");
      std::vector<double> parsed;
      for (const json& w : require_array(*values, where + ".fitted_weights row weights"))
        parsed.push_back(as_number(w, where + ".fitted_weights row weight"));
      out.fitted_weights[{static_cast<std::size_t>(as_uint(*size, where + ".fitted_weights row size")),
                          as_string(*signature, where + ".fitted_weights row signature")}] =
          std::move(parsed);
    }
  }
  if (const json* c = opt(obj, "default_c_med")) out.default_c_med = as_number(*c, where + ".default_c_med");
  if (const json* rate = opt(obj, "bridge_rate_mbps"))
    out.bridge_rate_mbps = as_number(*rate, where + ".bridge_rate_mbps");
}

void decode_dissemination(const json& node, const std::string& where,
                          dissem::DisseminationParams& out) {
  const json& obj = require_object(node, where);
  check_keys(obj, where, {"alpha", "theta", "buffer_capacity_bytes", "pairing_setup_s"});
  if (const json* v = opt(obj, "alpha")) out.alpha = as_number(*v, where + ".alpha");
  if (const json* v = opt(obj, "theta")) out.theta = as_number(*v, where + ".theta");
  if (const json* v = opt(obj, "buffer_capacity_bytes"))
    out.buffer_capacity_bytes = as_uint(*v, where + ".buffer_capacity_bytes");
  if (const json* v = opt(obj, "pairing_setup_s"))
    out.pairing_setup_s = as_number(*v, where + ".pairing_setup_s");
}

void decode_measure(const json& node, const std::string& where, workload::CountMeasure& out) {
  const json& obj = require_object(node, where);
  check_keys(obj, where, {"mean", "sd", "min", "max"});
  if (const json* v = opt(obj, "mean")) out.mean = as_number(*v, where + ".mean");
  if (const json* v = opt(obj, "sd")) out.sd = as_number(*v, where + ".sd");
  if (const json* v = opt(obj, "min")) out.min = as_int(*v, where + ".min");
  if (const json* v = opt(obj, "max")) out.max = as_int(*v, where + ".max");
}

void decode_workload_params(const json& obj, const std::string& where,
                            workload::WorkloadParams& params) {
  if (const json* v = opt(obj, "n_users"))
    params.n_users = static_cast<std::size_t>(as_uint(*v, where + ".n_users"));
  if (const json* v = opt(obj, "session_length_s"))
    params.session_length_s = as_number(*v, where + ".session_length_s");
  if (const json* v = opt(obj, "posts_per_user"))
    decode_measure(*v, where + ".posts_per_user", params.posts_per_user);
  if (const json* v = opt(obj, "tags_per_post"))
    decode_measure(*v, where + ".tags_per_post", params.tags_per_post);
  if (const json* v = opt(obj, "comments_per_user"))
    decode_measure(*v, where + ".comments_per_user", params.comments_per_user);
  if (const json* v = opt(obj, "tags_created_per_user"))
    decode_measure(*v, where + ".tags_created_per_user", params.tags_created_per_user);
  if (const json* v = opt(obj, "photos_per_post"))
    decode_measure(*v, where + ".photos_per_post", params.photos_per_post);
  if (const json* v = opt(obj, "photo_attach_probability"))
    params.photo_attach_probability = as_number(*v, where + ".photo_attach_probability");
  if (const json* v = opt(obj, "vocabulary"))
    params.vocabulary = as_string_list(*v, where + ".vocabulary");
  if (const json* v = opt(obj, "post_size_bytes"))
    params.post_size_bytes = as_uint(*v, where + ".post_size_bytes");
  if (const json* v = opt(obj, "comment_size_bytes"))
    params.comment_size_bytes = as_uint(*v, where + ".comment_size_bytes");
  if (const json* v = opt(obj, "photo_size_bytes"))
    params.photo_size_bytes = as_uint(*v, where + ".photo_size_bytes");
}

void decode_workload(const json& node, const std::string& where,
                     const std::filesystem::path& base_dir, ScenarioConfig& out) {
  const json& obj = require_object(node, where);
  check_keys(obj, where,
             {"n_users", "session_length_s", "posts_per_user", "tags_per_post",
              "comments_per_user", "tags_created_per_user", "photos_per_post",
              "photo_attach_probability", "vocabulary", "post_size_bytes",
              "comment_size_bytes", "photo_size_bytes", "import"});
  decode_workload_params(obj, where, out.workload);
  if (const json* v = opt(obj, "import")) {
    out.workload_import = resolve_path(base_dir, as_string(*v, where + ".import"), where + ".import");
    out.workload_items = workload::load_workload_csv(*out.workload_import);
  }
}

void decode_sensors(const json& node, const std::string& where,
                    const std::filesystem::path& base_dir, SensorFeedConfig& out) {
  const json& obj = require_object(node, where);
  check_keys(obj, where, {"registry_json", "observations_dir", "publish_interval_s", "tags"});
  const json* registry = opt(obj, "registry_json");
  const json* observations = opt(obj, "observations_dir");
  if (!registry || !observations)
    fail(where, "needs registry_json and observations_dir");
  out.registry_json = resolve_path(base_dir, as_string(*registry, where + ".registry_json"),
                                   where + ".registry_json");
  out.observations_dir = resolve_path(
      base_dir, as_string(*observations, where + ".observations_dir"), where + ".observations_dir");
  if (const json* v = opt(obj, "publish_interval_s"))
    out.publish_interval_s = as_number(*v, where + ".publish_interval_s");
  if (const json* v = opt(obj, "tags")) out.tags = as_string_list(*v, where + ".tags");
}

AccessPoint decode_access_point(const json& node, const std::string& where) {
  const json& obj = require_object(node, where);
  check_keys(obj, where, {"position", "range_m", "rate_mbps"});
  AccessPoint ap;
  const json* position = opt(obj, "position");
  if (!position) fail(where, "needs a position");
  ap.position = decode_vec2(*position, where + ".position");
  if (const json* v = opt(obj, "range_m")) ap.range_m = as_number(*v, where + ".range_m");
  if (const json* v = opt(obj, "rate_mbps")) ap.rate_mbps = as_number(*v, where + ".rate_mbps");
  return ap;
}

ScenarioConfig decode_scenario(const json& doc, const std::filesystem::path& base_dir) {
  const json& obj = require_object(doc, "top level");
  check_keys(obj, "top level",
             {"seed", "duration_s", "tick_s", "peers", "mobility", "group", "throughput",
              "dissemination", "workload", "bridges", "sensors", "access_points"});
  ScenarioConfig config;
  if (const json* v = opt(obj, "seed")) config.seed = as_uint(*v, "seed");
  if (const json* v = opt(obj, "duration_s")) config.duration_s = as_number(*v, "duration_s");
  if (const json* v = opt(obj, "tick_s")) config.tick_s = as_number(*v, "tick_s");
  if (const json* peers = opt(obj, "peers")) {
    std::size_t index = 0;
    for (const json& entry : require_array(*peers, "peers"))
      config.peers.push_back(decode_peer(entry, "peers." + std::to_string(index++)));
  }
  if (const json* v = opt(obj, "mobility")) decode_mobility(*v, "mobility", config.mobility);
  if (const json* v = opt(obj, "group")) {
    const json& group = require_object(*v, "group");
    check_keys(group, "group", {"max_size"});
    if (const json* size = opt(group, "max_size"))
      config.group.max_size = static_cast<std::size_t>(as_uint(*size, "group.max_size"));
  }
  if (const json* v = opt(obj, "throughput"))
    decode_throughput(*v, "throughput", base_dir, config.throughput);
  if (const json* v = opt(obj, "dissemination"))
    decode_dissemination(*v, "dissemination", config.dissemination);
  if (const json* v = opt(obj, "workload")) decode_workload(*v, "workload", base_dir, config);
  if (const json* bridges = opt(obj, "bridges")) {
    std::size_t index = 0;
    for (const json& entry : require_array(*bridges, "bridges")) {
      const std::string where = "bridges." + std::to_string(index++);
      const json& bridge = require_object(entry, where);
      check_keys(bridge, where, {"bridge", "remote_owner"});
      const json* peer = opt(bridge, "bridge");
      const json* owner = opt(bridge, "remote_owner");
      if (!peer || !owner) fail(where, "needs bridge and remote_owner");
      config.bridges.push_back(
          {static_cast<PeerId>(as_uint(*peer, where + ".bridge")),
           static_cast<PeerId>(as_uint(*owner, where + ".remote_owner"))});
    }
  }
  if (const json* v = opt(obj, "sensors")) {
    SensorFeedConfig sensors;
    decode_sensors(*v, "sensors", base_dir, sensors);
    config.sensors = std::move(sensors);
  }
  if (const json* aps = opt(obj, "access_points")) {
    std::size_t index = 0;
    for (const json& entry : require_array(*aps, "access_points"))
      config.access_points.push_back(
          decode_access_point(entry, "access_points." + std::to_string(index++)));
  }
  return config;
}

// ----------------------------------------------------------------------------
// Encoding (resolved snapshot)
// ----------------------------------------------------------------------------

json encode_extended_number(double value) {
  if (std::isinf(value) && value > 0.0) return json("inf");
  return json(value);
}

json encode_vec2(mobility::Vec2 v) { return json{{"x", v.x}, {"y", v.y}}; }

json encode_measure(const workload::CountMeasure& m) {
  return json{{"mean", m.mean}, {"sd", m.sd}, {"min", m.min}, {"max", m.max}};
}

json encode_scenario(const ScenarioConfig& config) {
  json doc;
  doc["seed"] = config.seed;
  doc["duration_s"] = config.duration_s;
  doc["tick_s"] = config.tick_s;

  json peers = json::array();
  for (const PeerConfig& peer : config.peers) {
    json entry{{"id", peer.id},
               {"role", sensors::to_string(peer.role)},
               {"category", peer.category},
               {"interests", json::object()},
               {"buffer_bytes", peer.buffer_bytes},
               {"go_intent", peer.go_intent},
               {"share_in_proximity", peer.share_in_proximity},
               {"store_remotely", peer.store_remotely},
               {"is_static", peer.is_static}};
    for (const auto& [tag, weight] : peer.interests) entry["interests"][tag] = weight;
    if (peer.position) entry["position"] = encode_vec2(*peer.position);
    peers.push_back(std::move(entry));
  }
  doc["peers"] = std::move(peers);

  doc["mobility"] = json{{"area_width_m", config.mobility.area_width_m},
                         {"area_height_m", config.mobility.area_height_m},
                         {"v_min_mps", config.mobility.v_min_mps},
                         {"v_max_mps", config.mobility.v_max_mps},
                         {"pause_s", encode_extended_number(config.mobility.pause_s)},
                         {"comm_range_m", config.mobility.comm_range_m}};
  doc["group"] = json{{"max_size", config.group.max_size}};

  json table = json::array();
  for (const auto& [key, rates] : config.throughput.empirical_table)
    table.push_back(json{{"size", key.first}, {"signature", key.second}, {"mbps", rates}});
  json c_med = json::object();
  for (const auto& [size, capacity] : config.throughput.c_med_by_size)
    c_med[std::to_string(size)] = capacity;
  json weights = json::array();
  for (const auto& [key, values] : config.throughput.fitted_weights)
    weights.push_back(json{{"size", key.first}, {"signature", key.second}, {"weights", values}});
  doc["throughput"] = json{{"mode", net::to_string(config.throughput.mode)},
                           {"empirical_table", std::move(table)},
                           {"c_med_by_size", std::move(c_med)},
                           {"fitted_weights", std::move(weights)},
                           {"default_c_med", config.throughput.default_c_med},
                           {"bridge_rate_mbps", config.throughput.bridge_rate_mbps}};

  doc["dissemination"] = json{{"alpha", config.dissemination.alpha},
                              {"theta", config.dissemination.theta},
                              {"buffer_capacity_bytes", config.dissemination.buffer_capacity_bytes},
                              {"pairing_setup_s", config.dissemination.pairing_setup_s}};

  json workload{{"n_users", config.workload.n_users},
                {"session_length_s", config.workload.session_length_s},
                {"posts_per_user", encode_measure(config.workload.posts_per_user)},
                {"tags_per_post", encode_measure(config.workload.tags_per_post)},
                {"comments_per_user", encode_measure(config.workload.comments_per_user)},
                {"tags_created_per_user", encode_measure(config.workload.tags_created_per_user)},
                {"photos_per_post", encode_measure(config.workload.photos_per_post)},
                {"photo_attach_probability", config.workload.photo_attach_probability},
                {"vocabulary", config.workload.vocabulary},
                {"post_size_bytes", config.workload.post_size_bytes},
                {"comment_size_bytes", config.workload.comment_size_bytes},
                {"photo_size_bytes", config.workload.photo_size_bytes}};
  if (config.workload_import) workload["import"] = config.workload_import->string();
  doc["workload"] = std::move(workload);

  json bridges = json::array();
  for (const net::BridgeDeclaration& declared : config.bridges)
    bridges.push_back(json{{"bridge", declared.bridge}, {"remote_owner", declared.remote_owner}});
  doc["bridges"] = std::move(bridges);

  if (config.sensors) {
    doc["sensors"] = json{{"registry_json", config.sensors->registry_json.string()},
                          {"observations_dir", config.sensors->observations_dir.string()},
                          {"publish_interval_s", config.sensors->publish_interval_s},
                          {"tags", config.sensors->tags}};
  }

  json aps = json::array();
  for (const AccessPoint& ap : config.access_points)
    aps.push_back(json{{"position", encode_vec2(ap.position)},
                       {"range_m", ap.range_m},
                       {"rate_mbps", ap.rate_mbps}});
  doc["access_points"] = std::move(aps);
  return doc;
}

// ----------------------------------------------------------------------------
// Dotted-path overrides
// ----------------------------------------------------------------------------

void apply_override(json& doc, const std::string& expression) {
  const auto eq = expression.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError{"override '" + expression + "' must look like path.to.key=value"};
  const std::string path = expression.substr(0, eq);
  const std::string text = expression.substr(eq + 1);

  json value = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded()) value = json(text);  // bare words are strings

  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    tokens.push_back(path.substr(start, dot == std::string::npos ? dot : dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  for (const std::string& token : tokens)
    if (token.empty())
      throw ValidationError{"override path '" + path + "' has an empty segment"};

  json* node = &doc;
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    const std::string& token = tokens[i];
    if (node->is_array()) {
      std::size_t index = 0;
      try {
        index = std::stoul(token);
      } catch (const std::exception&) {
        throw ValidationError{"override path '" + path + "': '" + token +
                              "' is not an array index"};
      }
      if (index >= node->size())
        throw ValidationError{"override path '" + path + "': index " + token +
                              " is out of range"};
      node = &(*node)[index];
    } else if (node->is_object() || node->is_null()) {
      node = &(*node)[token];
    } else {
      throw ValidationError{"override path '" + path + "' passes through a scalar at '" +
                            token + "'"};
    }
  }
  const std::string& last = tokens.back();
  if (node->is_array()) {
    std::size_t index = 0;
    try {
      index = std::stoul(last);
    } catch (const std::exception&) {
      throw ValidationError{"override path '" + path + "': '" + last +
                            "' is not an array index"};
    }
    if (index >= node->size())
      throw ValidationError{"override path '" + path + "': index " + last + " is out of range"};
    (*node)[index] = std::move(value);
  } else if (node->is_object() || node->is_null()) {
    (*node)[last] = std::move(value);
  } else {
    throw ValidationError{"override path '" + path + "' assigns into a scalar"};
  }
}

}  // namespace

// ============================================================================
// Public API
// ============================================================================

void resolve_and_validate_scenario(ScenarioConfig& config) {
  if (!std::isfinite(config.tick_s) || config.tick_s <= 0.0)
    throw ValidationError{"scenario config: tick_s must be positive and finite"};
  if (!std::isfinite(config.duration_s) || config.duration_s < config.tick_s)
    throw ValidationError{"scenario config: duration_s must cover at least one tick"};

  mobility::validate_mobility_params(config.mobility);
  if (config.group.max_size < 2)
    throw ValidationError{"scenario config: group.max_size must admit an owner and a client"};
  dissem::validate_dissemination_params(config.dissemination);

  if (config.peers.empty()) throw ValidationError{"scenario config: at least one peer required"};
  for (std::size_t i = 0; i < config.peers.size(); ++i) {
    PeerConfig& peer = config.peers[i];
    const std::string where = "scenario config: peers." + std::to_string(i);
    if (peer.id != static_cast<PeerId>(i + 1))
      throw ValidationError{where + ": peer ids must be dense 1..N in declaration order"};
    if (peer.go_intent < 0 || peer.go_intent > 15)
      throw ValidationError{where + ": go_intent must lie in 0..15"};
    dissem::validate_profile(dissem::UserProfile{peer.id, peer.category, peer.interests,
                                                 peer.share_in_proximity, peer.store_remotely});
    if (peer.buffer_bytes == 0) peer.buffer_bytes = config.dissemination.buffer_capacity_bytes;
    if (peer.is_static && !peer.position)
      throw ValidationError{where + ": static peers need a fixed position"};
    if (peer.position) {
      const bool inside = peer.position->x >= 0.0 &&
                          peer.position->x <= config.mobility.area_width_m &&
                          peer.position->y >= 0.0 &&
                          peer.position->y <= config.mobility.area_height_m;
      if (!std::isfinite(peer.position->x) || !std::isfinite(peer.position->y) || !inside)
        throw ValidationError{where + ": position must lie inside the simulation area"};
    }
  }

  const auto check_rate = [](double value, const char* name) {
    if (!std::isfinite(value) || value <= 0.0)
      throw ValidationError{std::string{"scenario config: "} + name + " must be positive and finite"};
  };
  check_rate(config.throughput.default_c_med, "throughput.default_c_med");
  check_rate(config.throughput.bridge_rate_mbps, "throughput.bridge_rate_mbps");
  for (const auto& [size, capacity] : config.throughput.c_med_by_size) {
    (void)size;
    check_rate(capacity, "throughput.c_med_by_size entry");
  }

  if (config.workload.n_users == 0) config.workload.n_users = config.peers.size();
  if (config.workload.session_length_s <= 0.0)
    config.workload.session_length_s = config.duration_s;
  workload::validate_workload_params(config.workload);
  if (config.workload.n_users > config.peers.size())
    throw ValidationError{"scenario config: workload.n_users exceeds the peer count"};
  if (config.workload_items) {
    for (const dissem::ContentItem& item : *config.workload_items) {
      if (item.author == 0 || item.author > config.peers.size())
        throw ValidationError{"scenario config: imported workload item " +
                              std::to_string(item.id) + " has no matching peer"};
      if (!std::isfinite(item.created_at) || item.created_at < 0.0)
        throw ValidationError{"scenario config: imported workload item " +
                              std::to_string(item.id) + " has an invalid creation time"};
    }
  }

  for (std::size_t i = 0; i < config.bridges.size(); ++i) {
    const net::BridgeDeclaration& declared = config.bridges[i];
    const std::string where = "scenario config: bridges." + std::to_string(i);
    const auto known = [&](PeerId peer) { return peer >= 1 && peer <= config.peers.size(); };
    if (!known(declared.bridge) || !known(declared.remote_owner))
      throw ValidationError{where + ": endpoints must be declared peers"};
    if (declared.bridge == declared.remote_owner)
      throw ValidationError{where + ": a peer cannot bridge to itself"};
  }

  if (config.sensors) {
    if (!std::isfinite(config.sensors->publish_interval_s) ||
        config.sensors->publish_interval_s <= 0.0)
      throw ValidationError{"scenario config: sensors.publish_interval_s must be positive"};
    if (config.sensors->tags.empty())
      throw ValidationError{"scenario config: sensors.tags must be non-empty"};
    for (const std::string& tag : config.sensors->tags)
      if (tag.empty()) throw ValidationError{"scenario config: sensors.tags must be non-empty"};
    if (config.sensors->registry_json.empty() || config.sensors->observations_dir.empty())
      throw ValidationError{"scenario config: sensors need registry_json and observations_dir"};
  }

  for (std::size_t i = 0; i < config.access_points.size(); ++i) {
    const AccessPoint& ap = config.access_points[i];
    const std::string where = "scenario config: access_points." + std::to_string(i);
    if (!std::isfinite(ap.position.x) || !std::isfinite(ap.position.y))
      throw ValidationError{where + ": position must be finite"};
    if (!std::isfinite(ap.range_m) || ap.range_m <= 0.0)
      throw ValidationError{where + ": range_m must be positive"};
    if (!std::isfinite(ap.rate_mbps) || ap.rate_mbps <= 0.0)
      throw ValidationError{where + ": rate_mbps must be positive"};
  }
}

ScenarioConfig scenario_from_json(const std::string& text, const std::filesystem::path& base_dir,
                                  const std::vector<std::string>& overrides) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded())
    throw ValidationError{"scenario config: not valid JSON"};
  for (const std::string& expression : overrides) apply_override(doc, expression);
  ScenarioConfig config = decode_scenario(doc, base_dir);
  resolve_and_validate_scenario(config);
  return config;
}

ScenarioConfig load_scenario(const std::filesystem::path& path,
                             const std::vector<std::string>& overrides) {
  std::ifstream in{path, std::ios::binary};
  if (!in) throw IoError{"cannot open scenario config " + path.string()};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError{"cannot read scenario config " + path.string()};
  const std::filesystem::path base_dir =
      path.has_parent_path() ? path.parent_path() : std::filesystem::path{"."};
  return scenario_from_json(buffer.str(), base_dir, overrides);
}

std::string scenario_to_json(const ScenarioConfig& config) {
  return encode_scenario(config).dump(2) + "\n";
}

workload::WorkloadParams workload_params_from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded())
    throw ValidationError{"scenario config: workload params: not valid JSON"};
  const std::string where = "workload";
  const json& obj = require_object(doc, where);
  check_keys(obj, where,
             {"n_users", "session_length_s", "posts_per_user", "tags_per_post",
              "comments_per_user", "tags_created_per_user", "photos_per_post",
              "photo_attach_probability", "vocabulary", "post_size_bytes",
              "comment_size_bytes", "photo_size_bytes"});
  workload::WorkloadParams params;
  decode_workload_params(obj, where, params);
  workload::validate_workload_params(params);
  return params;
}

workload::WorkloadParams load_workload_params(const std::filesystem::path& path) {
  std::ifstream in{path, std::ios::binary};
  if (!in) throw IoError{"cannot open workload params " + path.string()};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError{"cannot read workload params " + path.string()};
  return workload_params_from_json(buffer.str());
}

}  // namespace citymesh::sim
