#include "citymesh/sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "citymesh/dissem/content.hpp"
#include "citymesh/dissem/dissemination.hpp"
#include "citymesh/error.hpp"
#include "citymesh/mobility/mobility.hpp"
#include "citymesh/net/group.hpp"
#include "citymesh/net/throughput.hpp"
#include "citymesh/rng.hpp"
#include "citymesh/sensors/aqi.hpp"
#include "citymesh/sensors/service.hpp"
#include "citymesh/sme/codec.hpp"
#include "citymesh/workload/workload.hpp"

namespace citymesh::sim {
namespace {

using dissem::ContentItem;

[[nodiscard]] std::string join_ids(const std::vector<PeerId>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(ids[i]);
  }
  return out;
}

/// One snapshot the sensor feed publishes per interval: the station id and
/// the serialized size of everything it currently stores.
struct PublishSource {
  std::string station_id;
  std::uint64_t bytes = 0;
};

class Engine {
 public:
  explicit Engine(ScenarioConfig config)
      : config_(std::move(config)),
        mobility_rng_(Rng{config_.seed}.derive("mobility")),
        registry_(config_.group) {
    resolve_and_validate_scenario(config_);
    init_workload();
    init_peers();
    init_sensors();
  }

  RunResult run() {
    const double duration = config_.duration_s;
    const double tick = config_.tick_s;
    const auto n_ticks =
        static_cast<std::uint64_t>(std::ceil(duration / tick - 1e-9));
    for (std::uint64_t index = 0; index < n_ticks; ++index) {
      const double now = static_cast<double>(index) * tick;
      const double span = std::min(tick, duration - now);
      create_due_content(now);
      states_ = mobility::step(std::move(states_), config_.mobility, span, mobility_rng_);
      update_contacts(now);
      maintain_groups(now);
      exchange(now, span);
      infrastructure(now, span);
    }
    for (const auto& [a, b] : active_contacts_)
      emit(EventKind::contact_end, duration, a, b, 0, 0, 0.0, {});

    RunResult result;
    result.metrics = compute_metrics(trace_);
    result.trace = std::move(trace_);
    return result;
  }

 private:
  // --------------------------------------------------------------------------
  // Setup
  // --------------------------------------------------------------------------

  void init_workload() {
    items_ = config_.workload_items
                 ? *config_.workload_items
                 : workload::generate_workload(config_.workload, config_.seed);
    std::stable_sort(items_.begin(), items_.end(),
                     [](const ContentItem& a, const ContentItem& b) {
                       if (a.created_at != b.created_at) return a.created_at < b.created_at;
                       return a.id < b.id;
                     });
    next_content_id_ = 1;
    for (const ContentItem& item : items_)
      next_content_id_ = std::max(next_content_id_, item.id + 1);
  }

  void init_peers() {
    std::vector<PeerId> ids;
    for (const PeerConfig& peer : config_.peers) ids.push_back(peer.id);
    states_ = mobility::random_node_states(ids, config_.mobility, mobility_rng_);
    for (std::size_t i = 0; i < config_.peers.size(); ++i) {
      const PeerConfig& peer = config_.peers[i];
      if (peer.is_static) {
        states_[i] = mobility::static_node(peer.id, *peer.position);
      } else if (peer.position) {
        states_[i].position = *peer.position;
      }
      dissem::PeerState state;
      state.profile = dissem::UserProfile{peer.id, peer.category, peer.interests,
                                          peer.share_in_proximity, peer.store_remotely};
      state.cache.peer = peer.id;
      state.cache.capacity_bytes = peer.buffer_bytes;
      peers_.emplace(peer.id, std::move(state));
    }
    mobility::validate_node_states(states_, config_.mobility);
  }

  void init_sensors() {
    if (config_.sensors) {
      service_.emplace(sensors::SensorService::from_files(
          config_.sensors->registry_json, config_.sensors->observations_dir,
          sensors::BreakpointTable::builtin_default()));
      for (const sensors::StationInfo& station : service_->describe().stations) {
        std::uint64_t bytes = 0;
        for (const sme::SensorDescription& sensor : station.sensors) {
          const auto* readings = service_->readings_for(sensor.sensor_id);
          if (readings != nullptr && !readings->empty())
            bytes += sme::estimate_payload_size(readings->size());
        }
        if (bytes > 0) publish_sources_.push_back({station.station_id, bytes});
      }
    } else {
      service_.emplace(sensors::SensorService{
          sensors::ServiceDescription{"local", {}},
          sensors::BreakpointTable::builtin_default()});
    }
  }

  // --------------------------------------------------------------------------
  // Tick steps
  // --------------------------------------------------------------------------

  void create_due_content(double now) {
    while (created_cursor_ < items_.size() &&
           items_[created_cursor_].created_at <= now + 1e-9) {
      const ContentItem& item = items_[created_cursor_++];
      emit_created(item, item.created_at);
      dissem::PeerState& author = peers_.at(item.author);
      const dissem::EvictOutcome outcome = dissem::evict(author.cache, item, author.profile);
      (void)outcome;  // the author may fail to keep even their own item
      dissem::validate_cache(author.cache);
    }
  }

  void update_contacts(double now) {
    const auto current = mobility::contacts(states_, config_.mobility.comm_range_m);
    const std::set<std::pair<PeerId, PeerId>> current_set(current.begin(), current.end());
    for (auto it = active_contacts_.begin(); it != active_contacts_.end();) {
      if (!current_set.contains(*it)) {
        const auto [a, b] = *it;
        emit(EventKind::contact_end, now, a, b, 0, 0, 0.0, {});
        peers_.at(a).pairing_progress_s.erase(b);
        peers_.at(b).pairing_progress_s.erase(a);
        it = active_contacts_.erase(it);
      } else {
        ++it;
      }
    }
    for (const auto& [a, b] : current) {
      if (active_contacts_.emplace(a, b).second)
        emit(EventKind::contact_begin, now, a, b, 0, 0, 0.0, {});
    }
  }

  void maintain_groups(double now) {
    // Members drifting out of the owner's radio range fall off; the group
    // dissolves when its last client leaves.
    for (const net::Group& group : registry_.groups()) {
      for (PeerId client : group.clients) {
        if (!registry_.is_grouped(client)) continue;  // released by a dissolution
        if (mobility::distance(position_of(client), position_of(group.owner)) <=
            config_.mobility.comm_range_m)
          continue;
        const net::RemovalResult removed = registry_.remove_peer(client);
        if (removed.dissolved)
          emit(EventKind::group_dissolved, now, group.owner, 0, removed.group, 0, 0.0, {});
      }
    }

    // Ungrouped peers cluster into new groups: greedy mutual-range cliques
    // in ascending id order, capped at the configured group size. Existing
    // groups never admit newcomers; peers wait for the next formation.
    std::vector<PeerId> free;
    for (const PeerConfig& peer : config_.peers)
      if (!registry_.is_grouped(peer.id)) free.push_back(peer.id);
    std::set<PeerId> taken;
    for (PeerId seed : free) {
      if (taken.contains(seed)) continue;
      std::vector<PeerId> clique{seed};
      for (PeerId candidate : free) {
        if (candidate == seed || taken.contains(candidate)) continue;
        if (clique.size() >= config_.group.max_size) break;
        const bool reachable =
            std::all_of(clique.begin(), clique.end(), [&](PeerId member) {
              return mobility::distance(position_of(candidate), position_of(member)) <=
                     config_.mobility.comm_range_m;
            });
        if (reachable) clique.push_back(candidate);
      }
      if (clique.size() < 2) continue;
      for (PeerId member : clique) taken.insert(member);
      std::vector<std::pair<PeerId, int>> candidates;
      for (PeerId member : clique)
        candidates.emplace_back(member, config_.peers[member - 1].go_intent);
      const PeerId owner = net::elect_group_owner(candidates);
      std::vector<PeerId> clients;
      for (PeerId member : clique)
        if (member != owner) clients.push_back(member);
      const GroupId id = registry_.form_group(owner, clients);
      emit(EventKind::group_formed, now, owner, 0, id, 0, 0.0, join_ids(clique));
    }

    // Re-activate declared bridges that the current topology supports.
    links_.clear();
    for (const net::BridgeDeclaration& declared : config_.bridges) {
      try {
        const net::MultiGroupLink link =
            net::create_bridge(registry_, declared, config_.bridges);
        if (std::find(links_.begin(), links_.end(), link) == links_.end())
          links_.push_back(link);
      } catch (const ValidationError&) {
        // topology does not support this bridge right now
      }
    }
  }

  void exchange(double now, double span) {
    // Connected pairs: every unordered pair inside a group (clients relay
    // through the owner) plus the endpoint pair of each active bridge.
    struct Link {
      PeerId a = 0;  // normalized a < b for group pairs; bridge order kept
      PeerId b = 0;
      net::FlowKind kind = net::FlowKind::g2c;
    };
    std::vector<Link> pairs;
    for (const net::Group& group : registry_.groups()) {
      std::vector<PeerId> members{group.owner};
      members.insert(members.end(), group.clients.begin(), group.clients.end());
      std::sort(members.begin(), members.end());
      for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
          const bool with_owner =
              members[i] == group.owner || members[j] == group.owner;
          pairs.push_back({members[i], members[j],
                           with_owner ? net::FlowKind::g2c : net::FlowKind::c2c});
        }
      }
    }
    for (const net::MultiGroupLink& link : links_)
      pairs.push_back({link.bridge, link.remote_owner, net::FlowKind::bridge});

    // Pending flows: a pair contends for airtime only when one side holds
    // something the other side wants right now.
    net::FlowPattern pattern;
    std::vector<std::size_t> flow_of(pairs.size(), SIZE_MAX);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Link& link = pairs[i];
      const bool forward = has_pending(link.a, link.b);
      const bool backward = has_pending(link.b, link.a);
      if (!forward && !backward) continue;
      flow_of[i] = pattern.flows.size();
      const PeerId src = forward ? link.a : link.b;
      const PeerId dst = forward ? link.b : link.a;
      pattern.flows.push_back({src, dst, link.kind, 1.0});
    }
    net::ThroughputResult rates;
    if (!pattern.flows.empty())
      rates = net::flow_throughputs(registry_, links_, pattern, config_.throughput);

    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Link& link = pairs[i];
      const double mbps =
          flow_of[i] == SIZE_MAX ? 0.0 : rates.per_flow_mbps[flow_of[i]];
      contact_pair(now, span, link.a, link.b, mbps);
    }
  }

  void contact_pair(double now, double span, PeerId a, PeerId b, double mbps) {
    dissem::PeerState& pa = peers_.at(a);
    dissem::PeerState& pb = peers_.at(b);
    std::set<ContentId> held_a, held_b;
    for (const auto& [id, item] : pa.cache.items) held_a.insert(id);
    for (const auto& [id, item] : pb.cache.items) held_b.insert(id);

    const dissem::ContactResult result =
        dissem::handle_contact(pa, pb, span, mbps, config_.dissemination);

    for (const dissem::TransferRecord& record : result.transfers) {
      const std::set<ContentId>& receiver_held = record.receiver == a ? held_a : held_b;
      if (receiver_held.contains(record.content))
        throw IntegrityError{"engine transferred content " + std::to_string(record.content) +
                             " to peer " + std::to_string(record.receiver) +
                             " which already held it"};
      emit(EventKind::transfer, now, record.sender, record.receiver, record.content,
           record.bytes, record.utility, record.stored ? "stored" : "dropped");
      if (record.consumed)
        emit(EventKind::consume, now, 0, record.receiver, record.content, 0,
             record.utility, {});
    }
    dissem::validate_cache(pa.cache);
    dissem::validate_cache(pb.cache);
  }

  void infrastructure(double now, double span) {
    if (config_.sensors) {
      while (next_publish_ <= now + 1e-9) {
        for (const PublishSource& source : publish_sources_) {
          ContentItem item;
          item.id = next_content_id_++;
          item.author = kInfrastructurePeer;
          item.kind = dissem::ContentKind::sensor_data;
          item.tags = config_.sensors->tags;
          item.size_bytes = source.bytes;
          item.created_at = now;
          item.share_in_proximity = true;
          item.store_remotely = false;
          published_.push_back(item);
          emit_created(item, now);
        }
        next_publish_ += config_.sensors->publish_interval_s;
      }
    }

    // Per-peer WLAN budget for the tick, shared by fetches and uploads;
    // the fastest in-range access point wins.
    for (const PeerConfig& peer : config_.peers) {
      std::size_t best_ap = SIZE_MAX;
      double best_rate = 0.0;
      for (std::size_t i = 0; i < config_.access_points.size(); ++i) {
        const AccessPoint& ap = config_.access_points[i];
        if (mobility::distance(position_of(peer.id), ap.position) > ap.range_m) continue;
        if (ap.rate_mbps > best_rate) {
          best_rate = ap.rate_mbps;
          best_ap = i;
        }
      }
      if (best_ap == SIZE_MAX) continue;
      auto budget = static_cast<std::uint64_t>(best_rate * 1e6 / 8.0 * span);
      dissem::PeerState& state = peers_.at(peer.id);

      // Fetch interesting sensor snapshots, oldest first, skipping what no
      // longer fits in the remaining budget.
      for (const ContentItem& item : published_) {
        if (dissem::holds(state.cache, item.id)) continue;
        const double utility = dissem::content_utility(state.profile, item);
        if (utility < config_.dissemination.theta) continue;
        if (item.size_bytes > budget) continue;
        const dissem::EvictOutcome outcome =
            dissem::evict(state.cache, item, state.profile);
        dissem::validate_cache(state.cache);
        budget -= item.size_bytes;
        emit(EventKind::sensor_fetch, now, 0, peer.id, item.id, item.size_bytes, utility,
             "ap=" + std::to_string(best_ap) + ';' +
                 (outcome.stored ? "stored" : "dropped"));
        emit(EventKind::consume, now, 0, peer.id, item.id, 0, utility, {});
        state.profile =
            dissem::update_interests(std::move(state.profile), item, config_.dissemination.alpha);
      }

      // Upload the peer's own remotely-storable content once, when the user
      // opted in; anything over budget waits for a later tick.
      if (!state.profile.store_remotely) continue;
      for (const auto& [id, item] : state.cache.items) {
        if (item.author != peer.id || !item.store_remotely) continue;
        if (uploaded_.contains(id)) continue;
        if (item.size_bytes > budget) continue;
        const std::uint64_t receipt = service_->upload_user_content(item, {});
        uploaded_.insert(id);
        budget -= item.size_bytes;
        emit(EventKind::upload, now, peer.id, 0, id, item.size_bytes, 0.0,
             "receipt=" + std::to_string(receipt));
      }
    }
  }

  // --------------------------------------------------------------------------
  // Shared helpers
  // --------------------------------------------------------------------------

  [[nodiscard]] mobility::Vec2 position_of(PeerId peer) const {
    return states_[peer - 1].position;
  }

  [[nodiscard]] bool has_pending(PeerId from, PeerId to) const {
    const dissem::PeerState& sender = peers_.at(from);
    const dissem::PeerState& receiver = peers_.at(to);
    if (!sender.profile.share_in_proximity || !receiver.profile.share_in_proximity)
      return false;
    for (const auto& [id, item] : sender.cache.items) {
      if (!item.share_in_proximity) continue;
      if (dissem::holds(receiver.cache, id)) continue;
      if (dissem::content_utility(receiver.profile, item) >= config_.dissemination.theta)
        return true;
    }
    return false;
  }

  void emit_created(const ContentItem& item, double time) {
    std::vector<PeerId> interested;
    for (const PeerConfig& peer : config_.peers) {
      if (peer.id == item.author) continue;
      if (dissem::content_utility(peers_.at(peer.id).profile, item) >=
          config_.dissemination.theta)
        interested.push_back(peer.id);
    }
    emit(EventKind::content_created, time, item.author, 0, item.id, item.size_bytes, 0.0,
         std::string{dissem::to_string(item.kind)} + '|' + join_ids(interested));
  }

  void emit(EventKind kind, double time, PeerId a, PeerId b, ContentId content,
            std::uint64_t bytes, double value, std::string detail) {
    trace_.push_back(
        {time, seq_++, kind, a, b, content, bytes, value, std::move(detail)});
  }

  ScenarioConfig config_;
  Rng mobility_rng_;

  std::vector<ContentItem> items_;  // sorted by (created_at, id)
  std::size_t created_cursor_ = 0;
  ContentId next_content_id_ = 1;

  std::vector<mobility::NodeState> states_;  // index = peer id - 1
  std::map<PeerId, dissem::PeerState> peers_;
  std::set<std::pair<PeerId, PeerId>> active_contacts_;

  net::GroupRegistry registry_;
  std::vector<net::MultiGroupLink> links_;

  std::optional<sensors::SensorService> service_;
  std::vector<PublishSource> publish_sources_;  // sorted by station id
  std::vector<ContentItem> published_;
  double next_publish_ = 0.0;
  std::set<ContentId> uploaded_;

  std::vector<TraceEvent> trace_;
  std::uint64_t seq_ = 0;
};

}  // namespace

RunResult run_scenario(ScenarioConfig config) {
  Engine engine{std::move(config)};
  return engine.run();
}

}  // namespace citymesh::sim
