#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "citymesh/ids.hpp"

namespace citymesh::dissem {

// ============================================================================
// Content model
// ============================================================================

enum class ContentKind { post, comment, photo, sensor_data };

[[nodiscard]] const char* to_string(ContentKind kind);
[[nodiscard]] std::optional<ContentKind> content_kind_from_string(std::string_view text);

/// A shareable item of user- or sensor-generated content. Only metadata moves
/// through the simulator; payloads are represented by their size.
struct ContentItem {
  ContentId id = 0;
  PeerId author = 0;
  ContentKind kind = ContentKind::post;
  /// Comments and photos point at the post they belong to.
  std::optional<ContentId> parent;
  /// Sorted, unique, non-empty interest tags describing the item.
  std::vector<std::string> tags;
  std::uint64_t size_bytes = 0;
  /// Simulation time (seconds) at which the item was created.
  double created_at = 0.0;
  /// Privacy flags: owners decide whether an item may be offered to nearby
  /// peers and whether it may be uploaded to infrastructure storage.
  bool share_in_proximity = true;
  bool store_remotely = true;

  bool operator==(const ContentItem&) const = default;
};

/// Normalizes tags in place (sort + dedupe) and checks item invariants:
/// at least one non-empty tag, positive size. Throws ValidationError.
void validate_content_item(ContentItem& item);

}  // namespace citymesh::dissem
