#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "citymesh/ids.hpp"

namespace citymesh::net {

// ============================================================================
// Groups
// ============================================================================

struct GroupConfig {
  /// Maximum members per group, owner included.
  std::size_t max_size = 4;
};

/// A star-topology device group: every client links to the owner only, so
/// client-to-client traffic relays through the owner (2 hops).
struct Group {
  GroupId id = 0;
  PeerId owner = 0;
  std::vector<PeerId> clients;  // sorted, never empty

  bool operator==(const Group&) const = default;
};

/// Deterministic owner election: the candidate with the highest intent wins,
/// ties break to the smallest peer id. Intents must lie in 0..15.
[[nodiscard]] PeerId elect_group_owner(
    const std::vector<std::pair<PeerId, int>>& candidates);

/// Outcome of remove_peer: which group was touched, whether it dissolved,
/// and which other peers were released by the dissolution.
struct RemovalResult {
  GroupId group = 0;
  bool dissolved = false;
  std::vector<PeerId> released;
};

/// Owns group membership and enforces the structural invariants:
///   - owner is never one of its clients;
///   - member count (1 + clients) never exceeds max_size;
///   - every peer belongs to at most one group at a time;
///   - no empty groups: removing the last client dissolves the group.
/// Removing an owner dissolves its group and releases all clients.
class GroupRegistry {
 public:
  explicit GroupRegistry(GroupConfig config = {});

  [[nodiscard]] const GroupConfig& config() const { return config_; }

  /// Creates a group with at least one client; returns the new group id.
  GroupId form_group(PeerId owner, const std::vector<PeerId>& clients);

  /// Adds an ungrouped peer as a client.
  void admit_client(GroupId group, PeerId peer);

  /// Removes a peer from its group (dissolving it when the peer owned the
  /// group or was its last client).
  RemovalResult remove_peer(PeerId peer);

  /// Dissolves a group; returns the released members, owner first.
  std::vector<PeerId> dissolve(GroupId group);

  [[nodiscard]] const Group* find(GroupId group) const;
  [[nodiscard]] const Group* group_of(PeerId peer) const;
  [[nodiscard]] bool is_grouped(PeerId peer) const;
  [[nodiscard]] bool is_owner(PeerId peer) const;

  /// Intra-group hop count: 1 for owner<->client, 2 for client<->client.
  /// Peers must be distinct members of the same group.
  [[nodiscard]] int hop_count(PeerId a, PeerId b) const;

  /// Snapshot of all groups, sorted by group id.
  [[nodiscard]] std::vector<Group> groups() const;
  [[nodiscard]] std::size_t group_count() const { return groups_.size(); }

  /// Re-checks every structural invariant; throws IntegrityError on internal
  /// corruption. Intended for property tests.
  void check_invariants() const;

 private:
  GroupConfig config_;
  GroupId next_id_ = 1;
  std::map<GroupId, Group> groups_;
  std::map<PeerId, GroupId> membership_;  // owners and clients alike
};

// ============================================================================
// Multi-group bridges
// ============================================================================

/// A scenario-config entry allowing `bridge` (a client of one group) to
/// attach to `remote_owner`'s group over its secondary interface.
struct BridgeDeclaration {
  PeerId bridge = 0;
  PeerId remote_owner = 0;

  bool operator==(const BridgeDeclaration&) const = default;
};

/// An active cross-group link. Only the bridge peer exchanges data across
/// it; relaying further requires store-and-forward at the application layer.
struct MultiGroupLink {
  PeerId bridge = 0;
  PeerId remote_owner = 0;
  bool manually_configured = true;

  bool operator==(const MultiGroupLink&) const = default;
};

/// Activates a declared bridge against the current topology. The entry must
/// appear in `declared` (PolicyError otherwise -- links are never created
/// programmatically); the bridge peer must currently be a client and the
/// remote owner must own a different group (ValidationError otherwise).
[[nodiscard]] MultiGroupLink create_bridge(
    const GroupRegistry& registry, const BridgeDeclaration& entry,
    const std::vector<BridgeDeclaration>& declared);

}  // namespace citymesh::net
