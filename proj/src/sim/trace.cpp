#include "citymesh/sim/trace.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "citymesh/error.hpp"

namespace citymesh::sim {

namespace {

constexpr std::string_view kHeader = "time,seq,kind,peer_a,peer_b,content,bytes,value,detail";

[[nodiscard]] std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

template <typename T>
[[nodiscard]] T parse_number(std::string_view field, std::string_view what,
                             std::size_t offset) {
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw ParseError("trace CSV: bad " + std::string(what) + " \"" + std::string(field) + "\"",
                     offset);
  }
  return value;
}

}  // namespace

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::content_created: return "content_created";
    case EventKind::contact_begin: return "contact_begin";
    case EventKind::contact_end: return "contact_end";
    case EventKind::group_formed: return "group_formed";
    case EventKind::group_dissolved: return "group_dissolved";
    case EventKind::transfer: return "transfer";
    case EventKind::consume: return "consume";
    case EventKind::sensor_fetch: return "sensor_fetch";
    case EventKind::upload: return "upload";
  }
  return "unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view text) {
  if (text == "content_created") return EventKind::content_created;
  if (text == "contact_begin") return EventKind::contact_begin;
  if (text == "contact_end") return EventKind::contact_end;
  if (text == "group_formed") return EventKind::group_formed;
  if (text == "group_dissolved") return EventKind::group_dissolved;
  if (text == "transfer") return EventKind::transfer;
  if (text == "consume") return EventKind::consume;
  if (text == "sensor_fetch") return EventKind::sensor_fetch;
  if (text == "upload") return EventKind::upload;
  return std::nullopt;
}

std::string trace_to_csv(const std::vector<TraceEvent>& trace) {
  std::string out(kHeader);
  out.push_back('\n');
  for (const TraceEvent& e : trace) {
    if (e.detail.find_first_of(",\n\r") != std::string::npos) {
      throw ValidationError("trace detail field contains a CSV metacharacter: \"" + e.detail +
                            "\"");
    }
    out += format_double(e.time);
    out.push_back(',');
    out += std::to_string(e.seq);
    out.push_back(',');
    out += to_string(e.kind);
    out.push_back(',');
    out += std::to_string(e.peer_a);
    out.push_back(',');
    out += std::to_string(e.peer_b);
    out.push_back(',');
    out += std::to_string(e.content);
    out.push_back(',');
    out += std::to_string(e.bytes);
    out.push_back(',');
    out += format_double(e.value);
    out.push_back(',');
    out += e.detail;
    out.push_back('\n');
  }
  return out;
}

std::vector<TraceEvent> trace_from_csv(std::string_view text) {
  std::vector<TraceEvent> trace;
  std::size_t offset = 0;
  bool saw_header = false;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(offset, end - offset);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::size_t line_offset = offset;
    offset = end + 1;
    if (!saw_header) {
      if (line != kHeader) {
        throw ParseError("trace CSV: missing or unexpected header", line_offset);
      }
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;

    // The first eight fields are fixed; everything after the eighth comma is
    // the (comma-free) detail payload.
    std::string_view fields[8];
    std::string_view rest = line;
    for (int i = 0; i < 8; ++i) {
      const std::size_t pos = rest.find(',');
      if (pos == std::string_view::npos) {
        throw ParseError("trace CSV: expected 9 fields", line_offset);
      }
      fields[i] = rest.substr(0, pos);
      rest.remove_prefix(pos + 1);
    }

    TraceEvent e;
    e.time = parse_number<double>(fields[0], "time", line_offset);
    e.seq = parse_number<std::uint64_t>(fields[1], "seq", line_offset);
    const auto kind = event_kind_from_string(fields[2]);
    if (!kind) {
      throw ParseError("trace CSV: unknown event kind \"" + std::string(fields[2]) + "\"",
                       line_offset);
    }
    e.kind = *kind;
    e.peer_a = parse_number<PeerId>(fields[3], "peer_a", line_offset);
    e.peer_b = parse_number<PeerId>(fields[4], "peer_b", line_offset);
    e.content = parse_number<ContentId>(fields[5], "content", line_offset);
    e.bytes = parse_number<std::uint64_t>(fields[6], "bytes", line_offset);
    e.value = parse_number<double>(fields[7], "value", line_offset);
    e.detail = std::string(rest);
    trace.push_back(std::move(e));
  }
  if (!saw_header) {
    throw ParseError("trace CSV: missing or unexpected header", 0);
  }
  return trace;
}

void save_trace_csv(const std::filesystem::path& path, const std::vector<TraceEvent>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const std::string text = trace_to_csv(trace);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed to write " + path.string());
}

std::vector<TraceEvent> load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed to read " + path.string());
  return trace_from_csv(text);
}

}  // namespace citymesh::sim
