#include "citymesh/net/group.hpp"

#include <algorithm>
#include <string>

#include "citymesh/error.hpp"

namespace citymesh::net {

namespace {

[[nodiscard]] std::string peer_text(PeerId peer) { return std::to_string(peer); }

}  // namespace

PeerId elect_group_owner(const std::vector<std::pair<PeerId, int>>& candidates) {
  if (candidates.empty()) throw ValidationError{"owner election needs at least one candidate"};
  std::vector<PeerId> seen;
  seen.reserve(candidates.size());
  const std::pair<PeerId, int>* best = nullptr;
  for (const auto& candidate : candidates) {
    if (candidate.second < 0 || candidate.second > 15)
      throw ValidationError{"owner intent must lie in 0..15"};
    seen.push_back(candidate.first);
    if (best == nullptr || candidate.second > best->second ||
        (candidate.second == best->second && candidate.first < best->first)) {
      best = &candidate;
    }
  }
  std::sort(seen.begin(), seen.end());
  if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
    throw ValidationError{"owner election candidates must be unique"};
  return best->first;
}

// ============================================================================
// GroupRegistry
// ============================================================================

GroupRegistry::GroupRegistry(GroupConfig config) : config_(config) {
  if (config_.max_size < 2)
    throw ValidationError{"group max_size must allow an owner and a client"};
}

GroupId GroupRegistry::form_group(PeerId owner, const std::vector<PeerId>& clients) {
  if (clients.empty()) throw ValidationError{"a group needs at least one client"};
  std::vector<PeerId> members = clients;
  std::sort(members.begin(), members.end());
  if (std::adjacent_find(members.begin(), members.end()) != members.end())
    throw ValidationError{"duplicate client in group formation"};
  if (std::binary_search(members.begin(), members.end(), owner))
    throw ValidationError{"owner cannot be its own client"};
  if (1 + members.size() > config_.max_size)
    throw CapacityError{"group would exceed max_size"};
  if (membership_.contains(owner))
    throw MembershipError{"peer " + peer_text(owner) + " is already grouped"};
  for (const PeerId peer : members) {
    if (membership_.contains(peer))
      throw MembershipError{"peer " + peer_text(peer) + " is already grouped"};
  }

  const GroupId id = next_id_++;
  groups_.emplace(id, Group{id, owner, std::move(members)});
  membership_.emplace(owner, id);
  for (const PeerId peer : groups_.at(id).clients) membership_.emplace(peer, id);
  return id;
}

void GroupRegistry::admit_client(GroupId group, PeerId peer) {
  const auto slot = groups_.find(group);
  if (slot == groups_.end()) throw NotFoundError{"no such group"};
  if (membership_.contains(peer))
    throw MembershipError{"peer " + peer_text(peer) + " is already grouped"};
  Group& target = slot->second;
  if (1 + target.clients.size() + 1 > config_.max_size)
    throw CapacityError{"group is full"};
  target.clients.insert(
      std::upper_bound(target.clients.begin(), target.clients.end(), peer), peer);
  membership_.emplace(peer, group);
}

RemovalResult GroupRegistry::remove_peer(PeerId peer) {
  const auto slot = membership_.find(peer);
  if (slot == membership_.end())
    throw MembershipError{"peer " + peer_text(peer) + " is not grouped"};
  const GroupId id = slot->second;
  Group& group = groups_.at(id);

  RemovalResult result;
  result.group = id;
  if (group.owner == peer) {
    result.dissolved = true;
    result.released = group.clients;
    for (const PeerId client : group.clients) membership_.erase(client);
    membership_.erase(peer);
    groups_.erase(id);
    return result;
  }

  group.clients.erase(
      std::find(group.clients.begin(), group.clients.end(), peer));
  membership_.erase(peer);
  if (group.clients.empty()) {
    result.dissolved = true;
    result.released = {group.owner};
    membership_.erase(group.owner);
    groups_.erase(id);
  }
  return result;
}

std::vector<PeerId> GroupRegistry::dissolve(GroupId group) {
  const auto slot = groups_.find(group);
  if (slot == groups_.end()) throw NotFoundError{"no such group"};
  std::vector<PeerId> released;
  released.reserve(1 + slot->second.clients.size());
  released.push_back(slot->second.owner);
  released.insert(released.end(), slot->second.clients.begin(),
                  slot->second.clients.end());
  for (const PeerId peer : released) membership_.erase(peer);
  groups_.erase(slot);
  return released;
}

const Group* GroupRegistry::find(GroupId group) const {
  const auto slot = groups_.find(group);
  return slot == groups_.end() ? nullptr : &slot->second;
}

const Group* GroupRegistry::group_of(PeerId peer) const {
  const auto slot = membership_.find(peer);
  return slot == membership_.end() ? nullptr : &groups_.at(slot->second);
}

bool GroupRegistry::is_grouped(PeerId peer) const {
  return membership_.contains(peer);
}

bool GroupRegistry::is_owner(PeerId peer) const {
  const Group* group = group_of(peer);
  return group != nullptr && group->owner == peer;
}

int GroupRegistry::hop_count(PeerId a, PeerId b) const {
  if (a == b) throw ValidationError{"hop count needs two distinct peers"};
  const Group* group = group_of(a);
  if (group == nullptr || group_of(b) != group)
    throw MembershipError{"peers are not members of the same group"};
  return (group->owner == a || group->owner == b) ? 1 : 2;
}

std::vector<Group> GroupRegistry::groups() const {
  std::vector<Group> out;
  out.reserve(groups_.size());
  for (const auto& [id, group] : groups_) out.push_back(group);
  return out;
}

void GroupRegistry::check_invariants() const {
  std::size_t members = 0;
  for (const auto& [id, group] : groups_) {
    if (group.id != id) throw IntegrityError{"group id mismatch"};
    if (group.clients.empty()) throw IntegrityError{"empty group survived"};
    if (1 + group.clients.size() > config_.max_size)
      throw IntegrityError{"group exceeds max_size"};
    if (!std::is_sorted(group.clients.begin(), group.clients.end()))
      throw IntegrityError{"client list unsorted"};
    if (std::adjacent_find(group.clients.begin(), group.clients.end()) !=
        group.clients.end())
      throw IntegrityError{"duplicate client"};
    if (std::binary_search(group.clients.begin(), group.clients.end(), group.owner))
      throw IntegrityError{"owner listed as client"};
    if (const auto slot = membership_.find(group.owner);
        slot == membership_.end() || slot->second != id)
      throw IntegrityError{"owner membership out of sync"};
    for (const PeerId client : group.clients) {
      if (const auto slot = membership_.find(client);
          slot == membership_.end() || slot->second != id)
        throw IntegrityError{"client membership out of sync"};
    }
    members += 1 + group.clients.size();
  }
  if (members != membership_.size())
    throw IntegrityError{"membership index out of sync"};
}

// ============================================================================
// Bridges
// ============================================================================

MultiGroupLink create_bridge(const GroupRegistry& registry,
                             const BridgeDeclaration& entry,
                             const std::vector<BridgeDeclaration>& declared) {
  if (std::find(declared.begin(), declared.end(), entry) == declared.end())
    throw PolicyError{
        "cross-group links require manual configuration; "
        "programmatic bridge creation is not supported"};

  const Group* local = registry.group_of(entry.bridge);
  if (local == nullptr || local->owner == entry.bridge)
    throw ValidationError{"bridge peer must currently be a client of a group"};
  const Group* remote = registry.group_of(entry.remote_owner);
  if (remote == nullptr || remote->owner != entry.remote_owner)
    throw ValidationError{"bridge target must currently own a group"};
  if (local->id == remote->id)
    throw ValidationError{"bridge endpoints must lie in different groups"};

  return MultiGroupLink{entry.bridge, entry.remote_owner, true};
}

}  // namespace citymesh::net
