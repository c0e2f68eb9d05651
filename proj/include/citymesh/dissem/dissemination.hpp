#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "citymesh/dissem/content.hpp"
#include "citymesh/ids.hpp"

namespace citymesh::dissem {

// ============================================================================
// Profiles and parameters
// ============================================================================

/// An application user profile: who the user is and how much each content
/// tag currently interests them. Shared beacon-style with peers in proximity
/// unless share_in_proximity is off.
struct UserProfile {
  PeerId peer = 0;
  std::string category;                      // e.g. "citizen", "sport", "expert"
  std::map<std::string, double> interests;   // tag -> weight in [0,1]
  bool share_in_proximity = true;
  bool store_remotely = true;

  bool operator==(const UserProfile&) const = default;
};

/// Throws ValidationError unless all interest tags are non-empty and all
/// weights lie in [0,1].
void validate_profile(const UserProfile& profile);

struct DisseminationParams {
  double alpha = 0.1;  // interest adaptation rate, (0,1]
  double theta = 0.2;  // interest threshold, [0,1]
  std::uint64_t buffer_capacity_bytes = 50'000'000;
  /// One-time pairing handshake charged against the first contact(s) of every
  /// peer pair; progress accumulates until complete.
  double pairing_setup_s = 2.0;
};

void validate_dissemination_params(const DisseminationParams& params);

// ============================================================================
// Caches
// ============================================================================

/// A peer's store-and-forward content buffer.
struct Cache {
  PeerId peer = 0;
  std::uint64_t capacity_bytes = 50'000'000;
  std::map<ContentId, ContentItem> items;
  std::uint64_t used_bytes = 0;

  bool operator==(const Cache&) const = default;
};

[[nodiscard]] bool holds(const Cache& cache, ContentId id);

/// Throws IntegrityError if the byte accounting, keys, or capacity bound are
/// violated.
void validate_cache(const Cache& cache);

struct EvictOutcome {
  bool stored = false;
  std::vector<ContentItem> dropped;
};

/// Inserts `incoming`, evicting foreign (not owner-authored) items with the
/// lowest utility against the owner's profile first (ties: oldest, then
/// smallest id) until it fits. Owner-authored content is never dropped; if
/// the remaining space cannot be freed the item is rejected with no change.
/// Throws CapacityError when the item alone exceeds the total capacity and
/// ValidationError when the item is already cached.
EvictOutcome evict(Cache& cache, ContentItem incoming, const UserProfile& owner_profile);

// ============================================================================
// Matching and adaptation
// ============================================================================

/// Mean interest weight over the item's tags (tags absent from the profile
/// weigh 0). Always in [0,1] and monotone in every weight.
[[nodiscard]] double content_utility(const UserProfile& profile, const ContentItem& item);

/// Consumption feedback: every tag of the consumed item moves toward full
/// interest, w' = (1-alpha)*w + alpha; unseen tags enter at alpha.
[[nodiscard]] UserProfile update_interests(UserProfile profile, const ContentItem& consumed,
                                           double alpha);

/// Items worth sending to a peer: cached, shareable in proximity, not already
/// held remotely, and at least threshold-interesting to the remote profile.
/// Ordered by utility descending (ties: older first, then smaller id) and
/// packed greedily into the byte budget, skipping items that no longer fit.
[[nodiscard]] std::vector<ContentItem> select_items_for_transfer(
    const Cache& local, const UserProfile& remote_profile,
    const std::set<ContentId>& remote_holdings, std::uint64_t budget_bytes,
    const DisseminationParams& params);

// ============================================================================
// Contacts
// ============================================================================

/// Everything a peer carries through the simulation.
struct PeerState {
  UserProfile profile;
  Cache cache;
  /// Seconds of pairing handshake completed per remote peer.
  std::map<PeerId, double> pairing_progress_s;
};

struct TransferRecord {
  PeerId sender = 0;
  PeerId receiver = 0;
  ContentId content = 0;
  std::uint64_t bytes = 0;
  double utility = 0.0;  // against the receiver's profile at selection time
  bool consumed = false;
  bool stored = false;
};

struct ContactResult {
  std::vector<TransferRecord> transfers;
  /// Contact time left after any pairing handshake was charged.
  double effective_duration_s = 0.0;
};

/// One proximity contact: charge any remaining pairing setup, split the byte
/// budget (duration * throughput) evenly per direction, exchange the
/// highest-utility missing items both ways (a -> b first), store them via
/// evict, and let receivers consume and adapt their interests. Profiles are
/// exchanged for free at contact start; selection and eviction use the
/// profiles as of contact start. If either profile is not shareable in
/// proximity, the contact only advances pairing.
ContactResult handle_contact(PeerState& a, PeerState& b, double duration_s,
                             double throughput_mbps, const DisseminationParams& params);

}  // namespace citymesh::dissem
