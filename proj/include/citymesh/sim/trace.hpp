#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citymesh/ids.hpp"

namespace citymesh::sim {

// ============================================================================
// Event trace
// ============================================================================

/// Everything the engine does is narrated as a flat event stream; metrics
/// are a pure function of it, so an exported trace replays to the exact
/// same numbers.
enum class EventKind {
  content_created,
  contact_begin,
  contact_end,
  group_formed,
  group_dissolved,
  transfer,
  consume,
  sensor_fetch,
  upload,
};

[[nodiscard]] const char* to_string(EventKind kind);
[[nodiscard]] std::optional<EventKind> event_kind_from_string(std::string_view text);

/// One trace row. Field use by kind (unused fields stay zero/empty):
///   content_created: a=author, content, bytes=size,
///                    detail="<kind>|<interested peer ids ';'>"
///   contact_begin/contact_end: a, b (normalized a < b)
///   group_formed:   a=owner, content=group id, detail="<member ids ';'>"
///   group_dissolved: a=owner, content=group id
///   transfer:       a=sender, b=receiver, content, bytes, value=utility,
///                   detail="stored" or "dropped"
///   consume:        b=consumer, content, value=utility
///   sensor_fetch:   b=peer, content, bytes, value=utility,
///                   detail="ap=<index>;stored" or "ap=<index>;dropped"
///   upload:         a=peer, content, bytes, detail="receipt=<n>"
struct TraceEvent {
  double time = 0.0;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::content_created;
  PeerId peer_a = 0;
  PeerId peer_b = 0;
  ContentId content = 0;
  std::uint64_t bytes = 0;
  double value = 0.0;
  std::string detail;

  bool operator==(const TraceEvent&) const = default;
};

/// CSV with a fixed header, one event per line; doubles in shortest
/// round-trip form so export/import is byte-exact.
[[nodiscard]] std::string trace_to_csv(const std::vector<TraceEvent>& trace);

/// Parses trace CSV. Throws ParseError (with the offending byte offset) on
/// malformed input.
[[nodiscard]] std::vector<TraceEvent> trace_from_csv(std::string_view text);

/// File wrappers; throw IoError on failure.
void save_trace_csv(const std::filesystem::path& path, const std::vector<TraceEvent>& trace);
[[nodiscard]] std::vector<TraceEvent> load_trace_csv(const std::filesystem::path& path);

}  // namespace citymesh::sim
