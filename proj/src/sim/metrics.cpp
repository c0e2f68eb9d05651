#include "citymesh/sim/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "citymesh/error.hpp"

namespace citymesh::sim {

namespace {

struct CreatedInfo {
  double time = 0.0;
  PeerId author = 0;
  std::uint64_t bytes = 0;
  bool is_sensor_data = false;
  std::set<PeerId> interested;
};

[[nodiscard]] std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

[[nodiscard]] CreatedInfo parse_created(const TraceEvent& e, std::size_t index) {
  const std::size_t bar = e.detail.find('|');
  if (bar == std::string::npos) {
    throw ParseError("trace: content_created detail must be \"<kind>|<interested ids>\"",
                     index);
  }
  CreatedInfo info;
  info.time = e.time;
  info.author = e.peer_a;
  info.bytes = e.bytes;
  info.is_sensor_data = std::string_view(e.detail).substr(0, bar) == "sensor_data";
  const std::string_view ids = std::string_view(e.detail).substr(bar + 1);
  if (!ids.empty()) {
    for (std::string_view part : split(ids, ';')) {
      PeerId peer = 0;
      const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), peer);
      if (ec != std::errc{} || ptr != part.data() + part.size()) {
        throw ParseError("trace: bad interested peer id \"" + std::string(part) + "\"", index);
      }
      info.interested.insert(peer);
    }
  }
  return info;
}

}  // namespace

Metrics compute_metrics(const std::vector<TraceEvent>& trace) {
  Metrics m;

  std::map<ContentId, CreatedInfo> created;
  // First time each peer obtained each item, by any path.
  std::map<std::pair<PeerId, ContentId>, double> obtained;
  std::set<std::pair<PeerId, ContentId>> first_transfers;
  struct GroupLife {
    double formed_at = 0.0;
    std::size_t size = 0;
    double dissolved_at = -1.0;
  };
  std::map<GroupId, GroupLife> group_lives;
  std::size_t groups_formed = 0;
  double size_sum = 0.0;

  double horizon = 0.0;
  double prev_time = 0.0;
  std::uint64_t prev_seq = 0;
  bool first = true;

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceEvent& e = trace[i];
    if (!first) {
      if (e.seq <= prev_seq || e.time < prev_time) {
        throw ParseError("trace: events out of (time, seq) order at row " + std::to_string(i),
                         i);
      }
    }
    first = false;
    prev_seq = e.seq;
    prev_time = e.time;
    horizon = e.time;

    const auto require_created = [&](ContentId id) -> const CreatedInfo& {
      const auto it = created.find(id);
      if (it == created.end()) {
        throw ParseError("trace: event references never-created content " + std::to_string(id),
                         i);
      }
      return it->second;
    };

    switch (e.kind) {
      case EventKind::content_created: {
        if (!created.emplace(e.content, parse_created(e, i)).second) {
          throw ParseError("trace: content " + std::to_string(e.content) + " created twice", i);
        }
        break;
      }
      case EventKind::transfer: {
        const CreatedInfo& info = require_created(e.content);
        m.transmitted_bytes += e.bytes;
        if (info.is_sensor_data) m.sensor_d2d_bytes += e.bytes;
        if (first_transfers.emplace(e.peer_b, e.content).second) {
          m.first_delivery_bytes += e.bytes;
        }
        obtained.try_emplace({e.peer_b, e.content}, e.time);
        break;
      }
      case EventKind::sensor_fetch: {
        const CreatedInfo& info = require_created(e.content);
        if (info.is_sensor_data) m.sensor_wlan_bytes += e.bytes;
        obtained.try_emplace({e.peer_b, e.content}, e.time);
        break;
      }
      case EventKind::consume: {
        require_created(e.content);
        if (!obtained.contains({e.peer_b, e.content})) {
          throw ParseError("trace: consume before delivery of content " +
                               std::to_string(e.content),
                           i);
        }
        break;
      }
      case EventKind::group_formed: {
        if (e.detail.empty()) {
          throw ParseError("trace: group_formed without a member list", i);
        }
        const std::size_t members = split(e.detail, ';').size();
        groups_formed++;
        size_sum += static_cast<double>(members);
        group_lives[static_cast<GroupId>(e.content)] = {e.time, members, -1.0};
        break;
      }
      case EventKind::group_dissolved: {
        const auto it = group_lives.find(static_cast<GroupId>(e.content));
        if (it == group_lives.end() || it->second.dissolved_at >= 0.0) {
          throw ParseError("trace: dissolution of unknown group " + std::to_string(e.content),
                           i);
        }
        it->second.dissolved_at = e.time;
        break;
      }
      case EventKind::contact_begin:
      case EventKind::contact_end:
      case EventKind::upload:
        break;
    }
  }

  // Interested-pair satisfaction and latency.
  std::vector<double> latencies;
  for (const auto& [content, info] : created) {
    m.interested_pairs += info.interested.size();
    for (PeerId peer : info.interested) {
      const auto it = obtained.find({peer, content});
      if (it != obtained.end()) {
        m.satisfied_pairs++;
        latencies.push_back(it->second - info.time);
      }
    }
  }
  m.delivery_ratio = m.interested_pairs == 0
                         ? 1.0
                         : static_cast<double>(m.satisfied_pairs) /
                               static_cast<double>(m.interested_pairs);
  if (!latencies.empty()) {
    double sum = 0.0;
    for (double l : latencies) sum += l;
    m.mean_latency_s = sum / static_cast<double>(latencies.size());
    std::sort(latencies.begin(), latencies.end());
    const std::size_t n = latencies.size();
    m.median_latency_s =
        n % 2 == 1 ? latencies[n / 2] : 0.5 * (latencies[n / 2 - 1] + latencies[n / 2]);
  }

  m.overhead_ratio = m.first_delivery_bytes == 0
                         ? 0.0
                         : static_cast<double>(m.transmitted_bytes) /
                               static_cast<double>(m.first_delivery_bytes);
  const std::uint64_t sensor_total = m.sensor_d2d_bytes + m.sensor_wlan_bytes;
  m.infrastructure_offload =
      sensor_total == 0 ? 0.0
                        : static_cast<double>(m.sensor_d2d_bytes) /
                              static_cast<double>(sensor_total);

  m.groups.formed = groups_formed;
  if (groups_formed > 0) {
    m.groups.mean_size = size_sum / static_cast<double>(groups_formed);
    double lifetime_sum = 0.0;
    for (const auto& [id, life] : group_lives) {
      lifetime_sum += (life.dissolved_at >= 0.0 ? life.dissolved_at : horizon) - life.formed_at;
    }
    m.groups.mean_lifetime_s = lifetime_sum / static_cast<double>(groups_formed);
  }
  return m;
}

std::string metrics_to_json(const Metrics& m) {
  nlohmann::json doc;
  doc["delivery_ratio"] = m.delivery_ratio;
  doc["mean_latency_s"] = m.mean_latency_s;
  doc["median_latency_s"] = m.median_latency_s;
  doc["overhead_ratio"] = m.overhead_ratio;
  doc["infrastructure_offload"] = m.infrastructure_offload;
  doc["interested_pairs"] = m.interested_pairs;
  doc["satisfied_pairs"] = m.satisfied_pairs;
  doc["transmitted_bytes"] = m.transmitted_bytes;
  doc["first_delivery_bytes"] = m.first_delivery_bytes;
  doc["sensor_d2d_bytes"] = m.sensor_d2d_bytes;
  doc["sensor_wlan_bytes"] = m.sensor_wlan_bytes;
  doc["groups"]["formed"] = m.groups.formed;
  doc["groups"]["mean_size"] = m.groups.mean_size;
  doc["groups"]["mean_lifetime_s"] = m.groups.mean_lifetime_s;
  return doc.dump(2) + "\n";
}

}  // namespace citymesh::sim
