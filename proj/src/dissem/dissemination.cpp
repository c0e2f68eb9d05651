#include "citymesh/dissem/dissemination.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "citymesh/error.hpp"

namespace citymesh::dissem {

namespace {

/// Byte budget for one direction of a contact window.
[[nodiscard]] std::uint64_t direction_budget(double seconds, double throughput_mbps) {
  const double bytes = seconds * throughput_mbps * 1e6 / 8.0 / 2.0;
  if (bytes <= 0.0) return 0;
  if (bytes >= 9.0e18) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(bytes);
}

[[nodiscard]] std::set<ContentId> holdings_of(const Cache& cache) {
  std::set<ContentId> ids;
  for (const auto& [id, item] : cache.items) ids.insert(id);
  return ids;
}

/// One direction of an exchange: pick, ship, store, consume.
void transfer_items(const Cache& sender_snapshot, PeerState& receiver,
                    const UserProfile& receiver_profile_snapshot,
                    const std::set<ContentId>& receiver_holdings, std::uint64_t budget,
                    const DisseminationParams& params,
                    std::vector<TransferRecord>& log) {
  const std::vector<ContentItem> outgoing = select_items_for_transfer(
      sender_snapshot, receiver_profile_snapshot, receiver_holdings, budget, params);
  for (const ContentItem& item : outgoing) {
    TransferRecord record;
    record.sender = sender_snapshot.peer;
    record.receiver = receiver.profile.peer;
    record.content = item.id;
    record.bytes = item.size_bytes;
    record.utility = content_utility(receiver_profile_snapshot, item);
    record.stored = evict(receiver.cache, item, receiver_profile_snapshot).stored;
    // Selection already filtered on the interest threshold, so the receiver
    // consumes what it asked for and adapts toward the item's tags.
    record.consumed = record.utility >= params.theta;
    if (record.consumed)
      receiver.profile = update_interests(std::move(receiver.profile), item, params.alpha);
    log.push_back(std::move(record));
  }
}

}  // namespace

// ============================================================================
// Validation
// ============================================================================

void validate_profile(const UserProfile& profile) {
  for (const auto& [tag, weight] : profile.interests) {
    if (tag.empty()) throw ValidationError{"profile interest tags must be non-empty"};
    if (!(weight >= 0.0) || !(weight <= 1.0))
      throw ValidationError{"interest weight for '" + tag + "' must lie in [0,1]"};
  }
}

void validate_dissemination_params(const DisseminationParams& params) {
  if (!(params.alpha > 0.0) || !(params.alpha <= 1.0))
    throw ValidationError{"adaptation rate alpha must lie in (0,1]"};
  if (!(params.theta >= 0.0) || !(params.theta <= 1.0))
    throw ValidationError{"interest threshold theta must lie in [0,1]"};
  if (params.buffer_capacity_bytes == 0)
    throw ValidationError{"buffer capacity must be positive"};
  if (!(params.pairing_setup_s >= 0.0) || !std::isfinite(params.pairing_setup_s))
    throw ValidationError{"pairing setup delay must be non-negative and finite"};
}

bool holds(const Cache& cache, ContentId id) { return cache.items.count(id) != 0; }

void validate_cache(const Cache& cache) {
  std::uint64_t total = 0;
  for (const auto& [id, item] : cache.items) {
    if (id != item.id) throw IntegrityError{"cache key does not match item id"};
    if (item.size_bytes == 0) throw IntegrityError{"cached item has zero size"};
    total += item.size_bytes;
  }
  if (total != cache.used_bytes) throw IntegrityError{"cache byte accounting is stale"};
  if (total > cache.capacity_bytes) throw IntegrityError{"cache exceeds its capacity"};
}

// ============================================================================
// Matching and adaptation
// ============================================================================

double content_utility(const UserProfile& profile, const ContentItem& item) {
  if (item.tags.empty()) throw ValidationError{"content items must carry at least one tag"};
  double sum = 0.0;
  for (const std::string& tag : item.tags) {
    const auto slot = profile.interests.find(tag);
    if (slot != profile.interests.end()) sum += slot->second;
  }
  return sum / static_cast<double>(item.tags.size());
}

UserProfile update_interests(UserProfile profile, const ContentItem& consumed,
                             double alpha) {
  if (!(alpha > 0.0) || !(alpha <= 1.0))
    throw ValidationError{"adaptation rate alpha must lie in (0,1]"};
  if (consumed.tags.empty())
    throw ValidationError{"content items must carry at least one tag"};
  for (const std::string& tag : consumed.tags) {
    double& weight = profile.interests.try_emplace(tag, 0.0).first->second;
    weight = (1.0 - alpha) * weight + alpha;
  }
  return profile;
}

std::vector<ContentItem> select_items_for_transfer(const Cache& local,
                                                   const UserProfile& remote_profile,
                                                   const std::set<ContentId>& remote_holdings,
                                                   std::uint64_t budget_bytes,
                                                   const DisseminationParams& params) {
  validate_dissemination_params(params);

  struct Candidate {
    double utility;
    const ContentItem* item;
  };
  std::vector<Candidate> candidates;
  for (const auto& [id, item] : local.items) {
    if (remote_holdings.count(id) != 0) continue;
    if (!item.share_in_proximity) continue;
    const double utility = content_utility(remote_profile, item);
    if (utility >= params.theta) candidates.push_back({utility, &item});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.utility, a.item->created_at, a.item->id) <
           std::tie(a.utility, b.item->created_at, b.item->id);
  });

  std::vector<ContentItem> picked;
  std::uint64_t used = 0;
  for (const Candidate& c : candidates) {
    if (used + c.item->size_bytes > budget_bytes) continue;  // keep trying smaller items
    used += c.item->size_bytes;
    picked.push_back(*c.item);
  }
  return picked;
}

// ============================================================================
// Caches
// ============================================================================

EvictOutcome evict(Cache& cache, ContentItem incoming, const UserProfile& owner_profile) {
  if (incoming.size_bytes > cache.capacity_bytes)
    throw CapacityError{"item exceeds the buffer's total capacity"};
  if (holds(cache, incoming.id)) throw ValidationError{"item is already cached"};

  EvictOutcome outcome;
  const std::uint64_t after = cache.used_bytes + incoming.size_bytes;
  if (after > cache.capacity_bytes) {
    const std::uint64_t needed = after - cache.capacity_bytes;

    struct Victim {
      double utility;
      double created_at;
      ContentId id;
      std::uint64_t size;
    };
    std::vector<Victim> victims;
    std::uint64_t droppable = 0;
    for (const auto& [id, item] : cache.items) {
      if (item.author == cache.peer) continue;  // owner content is never dropped
      victims.push_back({content_utility(owner_profile, item), item.created_at, id,
                         item.size_bytes});
      droppable += item.size_bytes;
    }
    if (droppable < needed) return outcome;  // rejection: no change at all

    std::sort(victims.begin(), victims.end(), [](const Victim& a, const Victim& b) {
      return std::tie(a.utility, a.created_at, a.id) <
             std::tie(b.utility, b.created_at, b.id);
    });
    std::uint64_t freed = 0;
    for (const Victim& victim : victims) {
      if (freed >= needed) break;
      auto slot = cache.items.find(victim.id);
      outcome.dropped.push_back(std::move(slot->second));
      cache.items.erase(slot);
      cache.used_bytes -= victim.size;
      freed += victim.size;
    }
  }

  cache.used_bytes += incoming.size_bytes;
  const ContentId id = incoming.id;
  cache.items.emplace(id, std::move(incoming));
  outcome.stored = true;
  return outcome;
}

// ============================================================================
// Contacts
// ============================================================================

ContactResult handle_contact(PeerState& a, PeerState& b, double duration_s,
                             double throughput_mbps, const DisseminationParams& params) {
  validate_dissemination_params(params);
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    throw ValidationError{"contact duration must be positive"};
  if (!(throughput_mbps >= 0.0) || !std::isfinite(throughput_mbps))
    throw ValidationError{"contact throughput must be non-negative"};
  if (a.profile.peer == b.profile.peer)
    throw ValidationError{"a contact needs two distinct peers"};
  if (a.profile.peer != a.cache.peer || b.profile.peer != b.cache.peer)
    throw IntegrityError{"peer state profile/cache ids out of sync"};

  ContactResult result;

  // Charge whatever is left of the one-time pairing handshake.
  const double done_a = a.pairing_progress_s.try_emplace(b.profile.peer, 0.0).first->second;
  const double done_b = b.pairing_progress_s.try_emplace(a.profile.peer, 0.0).first->second;
  if (done_a != done_b) throw IntegrityError{"pairing progress out of sync between peers"};
  double effective = duration_s;
  if (done_a < params.pairing_setup_s) {
    const double charged = std::min(params.pairing_setup_s - done_a, duration_s);
    a.pairing_progress_s[b.profile.peer] = done_a + charged;
    b.pairing_progress_s[a.profile.peer] = done_a + charged;
    effective = duration_s - charged;
  }
  result.effective_duration_s = effective;
  if (effective <= 0.0) return result;

  // Profiles are beaconed for free; opted-out peers exchange nothing.
  if (!a.profile.share_in_proximity || !b.profile.share_in_proximity) return result;

  const std::uint64_t budget = direction_budget(effective, throughput_mbps);

  // Snapshot both ends so the exchange is simultaneous: selections and
  // eviction rankings see the caches and profiles as of contact start.
  const Cache cache_a0 = a.cache;
  const Cache cache_b0 = b.cache;
  const UserProfile profile_a0 = a.profile;
  const UserProfile profile_b0 = b.profile;
  const std::set<ContentId> holdings_a0 = holdings_of(cache_a0);
  const std::set<ContentId> holdings_b0 = holdings_of(cache_b0);

  transfer_items(cache_a0, b, profile_b0, holdings_b0, budget, params, result.transfers);
  transfer_items(cache_b0, a, profile_a0, holdings_a0, budget, params, result.transfers);
  return result;
}

}  // namespace citymesh::dissem
