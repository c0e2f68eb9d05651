#pragma once

#include <cstdint>

namespace citymesh {

/// Peers are dense small integers assigned by scenario config order.
using PeerId = std::uint32_t;

using ContentId = std::uint64_t;
using GroupId = std::uint32_t;

/// Pseudo-peer that authors content fetched from the infrastructure (sensor
/// payloads). Never a member of any group and never counted as a real peer.
inline constexpr PeerId kInfrastructurePeer = 0xFFFFFFFFu;

}  // namespace citymesh
