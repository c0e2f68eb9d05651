#include "citymesh/dissem/content.hpp"

#include <algorithm>

#include "citymesh/error.hpp"

namespace citymesh::dissem {

const char* to_string(ContentKind kind) {
  switch (kind) {
    case ContentKind::post: return "post";
    case ContentKind::comment: return "comment";
    case ContentKind::photo: return "photo";
    case ContentKind::sensor_data: return "sensor_data";
  }
  return "unknown";
}

std::optional<ContentKind> content_kind_from_string(std::string_view text) {
  if (text == "post") return ContentKind::post;
  if (text == "comment") return ContentKind::comment;
  if (text == "photo") return ContentKind::photo;
  if (text == "sensor_data") return ContentKind::sensor_data;
  return std::nullopt;
}

void validate_content_item(ContentItem& item) {
  std::sort(item.tags.begin(), item.tags.end());
  item.tags.erase(std::unique(item.tags.begin(), item.tags.end()), item.tags.end());
  if (item.tags.empty()) {
    throw ValidationError{"content item must carry at least one tag"};
  }
  for (const auto& tag : item.tags) {
    if (tag.empty()) {
      throw ValidationError{"content tags must be non-empty"};
    }
  }
  if (item.size_bytes == 0) {
    throw ValidationError{"content item must have a positive size"};
  }
}

}  // namespace citymesh::dissem
