#include "citymesh/sme/codec.hpp"

#include <charconv>
#include <cstring>
#include <tuple>

#include "citymesh/error.hpp"
#include "citymesh/sme/record_kernels.hpp"

namespace citymesh::sme {

namespace {

constexpr std::string_view kObservationMagic = "SME/1.0 OBSERVATION\n";
constexpr std::string_view kSensorMagic = "SME/1.0 SENSOR\n";

void require_line_safe(std::string_view value, const char* field) {
  if (value.find('\n') != std::string_view::npos)
    throw ValidationError(std::string(field) + " must not contain newlines");
}

[[nodiscard]] const char* reason_text(BatchResult::Reason r) noexcept {
  switch (r) {
    case BatchResult::Reason::bad_timestamp: return "malformed timestamp";
    case BatchResult::Reason::bad_value: return "malformed value";
    case BatchResult::Reason::bad_separator: return "bad separator byte";
    default: return "ok";
  }
}

/// Line scanner over the fixed-size envelope region.
class EnvelopeReader {
 public:
  explicit EnvelopeReader(std::string_view payload) : payload_(payload) {}

  [[nodiscard]] std::size_t pos() const noexcept { return pos_; }

  void expect_literal(std::string_view lit) {
    if (payload_.size() < pos_ + lit.size() ||
        payload_.substr(pos_, lit.size()) != lit)
      throw ParseError("expected \"" + std::string(lit) + "\"", pos_);
    pos_ += lit.size();
  }

  /// Reads up to the next '\n' (which must sit inside the envelope).
  [[nodiscard]] std::string_view read_line_value() {
    const std::size_t nl = payload_.find('\n', pos_);
    if (nl == std::string_view::npos || nl >= kEnvelopeBytes)
      throw ParseError("header line not terminated inside envelope", pos_);
    std::string_view v = payload_.substr(pos_, nl - pos_);
    pos_ = nl + 1;
    return v;
  }

  void expect_padding_to(std::size_t offset) {
    for (; pos_ < offset; ++pos_)
      if (payload_[pos_] != ' ')
        throw ParseError("envelope padding is not a space", pos_);
  }

 private:
  std::string_view payload_;
  std::size_t pos_ = 0;
};

Instant parse_instant_or_throw(std::string_view text, std::size_t offset) {
  if (text.size() < static_cast<std::size_t>(kInstantTextWidth))
    throw ParseError("truncated timestamp", offset);
  const auto t = parse_instant(text.data());
  if (!t) throw ParseError("malformed timestamp", offset);
  return *t;
}

std::string fixed_value_or_throw(double v, const char* field) {
  char buf[kValueTextWidth];
  if (!format_fixed_value(v, buf))
    throw ValidationError(std::string(field) +
                          " has no exact 13.6 fixed-decimal representation");
  return std::string(buf, sizeof buf);
}

double parse_fixed_or_throw(std::string_view text, std::size_t offset) {
  if (text.size() != static_cast<std::size_t>(kValueTextWidth))
    throw ParseError("fixed decimal field has wrong width", offset);
  const auto v = parse_fixed_value(text.data());
  if (!v) throw ParseError("malformed fixed decimal", offset);
  return *v;
}

}  // namespace

void validate_observation(const ObservationSet& obs) {
  if (obs.sensor_id.empty()) throw ValidationError("sensor_id must be nonempty");
  require_line_safe(obs.sensor_id, "sensor_id");
  if (!instant_printable(obs.window.start_ms) || !instant_printable(obs.window.end_ms))
    throw ValidationError("window bounds outside printable instant range");
  if (obs.window.start_ms > obs.window.end_ms)
    throw ValidationError("window start is after window end");
  for (std::size_t i = 0; i < obs.records.size(); ++i) {
    const Instant t = obs.records[i].timestamp_ms;
    if (i > 0 && t < obs.records[i - 1].timestamp_ms)
      throw ValidationError("record " + std::to_string(i) + " out of order");
    if (t < obs.window.start_ms || t > obs.window.end_ms)
      throw ValidationError("record " + std::to_string(i) + " outside window");
  }
}

std::size_t estimate_payload_size(std::size_t records) noexcept {
  return kEnvelopeBytes + records * kRecordBytes;
}

std::string serialize_observation(const ObservationSet& obs) {
  validate_observation(obs);

  std::string header;
  header.reserve(128);
  header += kObservationMagic;
  header += "sensor_id=";
  header += obs.sensor_id;
  header += '\n';
  header += "window=";
  header += format_instant(obs.window.start_ms);
  header += '/';
  header += format_instant(obs.window.end_ms);
  header += '\n';
  header += "count=";
  header += std::to_string(obs.records.size());
  header += '\n';
  if (header.size() > kEnvelopeBytes)
    throw ValidationError("header does not fit the " +
                          std::to_string(kEnvelopeBytes) +
                          "-byte envelope (sensor_id too long)");

  std::string out(estimate_payload_size(obs.records.size()), ' ');
  std::memcpy(out.data(), header.data(), header.size());

  const BatchResult r = active_record_kernel().encode(
      obs.records.data(), obs.records.size(), out.data() + kEnvelopeBytes);
  if (r.ok != obs.records.size())
    throw ValidationError("record " + std::to_string(r.ok) + ": " +
                          (r.reason == BatchResult::Reason::bad_value
                               ? "value has no exact 13.6 fixed-decimal representation"
                               : "timestamp outside printable range"));
  return out;
}

ObservationSet deserialize_observation(std::string_view payload) {
  if (payload.size() < kEnvelopeBytes)
    throw ParseError("payload shorter than the envelope", payload.size());

  EnvelopeReader rd(payload);
  rd.expect_literal(kObservationMagic);

  rd.expect_literal("sensor_id=");
  ObservationSet obs;
  obs.sensor_id = std::string(rd.read_line_value());

  rd.expect_literal("window=");
  const std::size_t window_off = rd.pos();
  const std::string_view window = rd.read_line_value();
  if (window.size() != 2 * kInstantTextWidth + 1 || window[kInstantTextWidth] != '/')
    throw ParseError("window must be <start>/<end>", window_off);
  obs.window.start_ms = parse_instant_or_throw(window, window_off);
  obs.window.end_ms = parse_instant_or_throw(window.substr(kInstantTextWidth + 1),
                                             window_off + kInstantTextWidth + 1);

  rd.expect_literal("count=");
  const std::size_t count_off = rd.pos();
  const std::string_view count_text = rd.read_line_value();
  std::size_t count = 0;
  const auto [ptr, ec] = std::from_chars(count_text.data(),
                                         count_text.data() + count_text.size(), count);
  if (ec != std::errc{} || ptr != count_text.data() + count_text.size() ||
      count_text.empty())
    throw ParseError("malformed count", count_off);

  rd.expect_padding_to(kEnvelopeBytes);

  const std::size_t expected = estimate_payload_size(count);
  if (payload.size() != expected)
    throw IntegrityError("count=" + std::to_string(count) + " implies " +
                         std::to_string(expected) + " bytes, payload has " +
                         std::to_string(payload.size()));

  obs.records.resize(count);
  const BatchResult r = active_record_kernel().decode(
      payload.data() + kEnvelopeBytes, count, obs.records.data());
  if (r.ok != count)
    throw ParseError("record " + std::to_string(r.ok) + ": " + reason_text(r.reason),
                     kEnvelopeBytes + r.ok * kRecordBytes, r.ok);

  for (std::size_t i = 0; i < count; ++i) {
    const Instant t = obs.records[i].timestamp_ms;
    if (i > 0 && t < obs.records[i - 1].timestamp_ms)
      throw ValidationError("record " + std::to_string(i) + " out of order");
    if (t < obs.window.start_ms || t > obs.window.end_ms)
      throw ValidationError("record " + std::to_string(i) + " outside window");
  }
  if (obs.sensor_id.empty()) throw ValidationError("sensor_id must be nonempty");
  return obs;
}

std::string serialize_description(const SensorDescription& d) {
  if (d.sensor_id.empty()) throw ValidationError("sensor_id must be nonempty");
  if (d.observed_property.empty())
    throw ValidationError("observed_property must be nonempty");
  if (d.unit.empty()) throw ValidationError("unit must be nonempty");
  require_line_safe(d.sensor_id, "sensor_id");
  require_line_safe(d.vendor, "vendor");
  require_line_safe(d.observed_property, "observed_property");
  require_line_safe(d.unit, "unit");
  if (!(d.sampling_frequency_hz > 0))
    throw ValidationError("sampling_frequency_hz must be positive");
  if (d.valid_range.min > d.valid_range.max)
    throw ValidationError("valid_range min exceeds max");
  if (d.location.lat < -90.0 || d.location.lat > 90.0 || d.location.lon < -180.0 ||
      d.location.lon > 180.0)
    throw ValidationError("location outside lat/lon bounds");

  std::string out;
  out.reserve(256);
  out += kSensorMagic;
  out += "sensor_id=";
  out += d.sensor_id;
  out += '\n';
  out += "vendor=";
  out += d.vendor;
  out += '\n';
  out += "observed_property=";
  out += d.observed_property;
  out += '\n';
  out += "unit=";
  out += d.unit;
  out += '\n';
  out += "sampling_frequency_hz=";
  out += fixed_value_or_throw(d.sampling_frequency_hz, "sampling_frequency_hz");
  out += '\n';
  out += "valid_range=";
  out += fixed_value_or_throw(d.valid_range.min, "valid_range.min");
  out += '/';
  out += fixed_value_or_throw(d.valid_range.max, "valid_range.max");
  out += '\n';
  out += "location=";
  out += fixed_value_or_throw(d.location.lat, "location.lat");
  out += '/';
  out += fixed_value_or_throw(d.location.lon, "location.lon");
  out += '\n';
  return out;
}

SensorDescription deserialize_description(std::string_view payload) {
  std::size_t pos = 0;
  auto expect = [&](std::string_view lit) {
    if (payload.size() < pos + lit.size() || payload.substr(pos, lit.size()) != lit)
      throw ParseError("expected \"" + std::string(lit) + "\"", pos);
    pos += lit.size();
  };
  auto line_value = [&]() -> std::string_view {
    const std::size_t nl = payload.find('\n', pos);
    if (nl == std::string_view::npos)
      throw ParseError("unterminated line", pos);
    std::string_view v = payload.substr(pos, nl - pos);
    pos = nl + 1;
    return v;
  };
  auto fixed_pair = [&](std::string_view text,
                        std::size_t offset) -> std::pair<double, double> {
    if (text.size() != 2 * kValueTextWidth + 1 || text[kValueTextWidth] != '/')
      throw ParseError("expected <value>/<value>", offset);
    return {parse_fixed_or_throw(text.substr(0, kValueTextWidth), offset),
            parse_fixed_or_throw(text.substr(kValueTextWidth + 1),
                                 offset + kValueTextWidth + 1)};
  };

  SensorDescription d;
  expect(kSensorMagic);
  expect("sensor_id=");
  d.sensor_id = std::string(line_value());
  expect("vendor=");
  d.vendor = std::string(line_value());
  expect("observed_property=");
  d.observed_property = std::string(line_value());
  expect("unit=");
  d.unit = std::string(line_value());
  expect("sampling_frequency_hz=");
  {
    const std::size_t off = pos;
    d.sampling_frequency_hz = parse_fixed_or_throw(line_value(), off);
  }
  expect("valid_range=");
  {
    const std::size_t off = pos;
    std::tie(d.valid_range.min, d.valid_range.max) = fixed_pair(line_value(), off);
  }
  expect("location=");
  {
    const std::size_t off = pos;
    std::tie(d.location.lat, d.location.lon) = fixed_pair(line_value(), off);
  }
  if (pos != payload.size())
    throw ParseError("trailing bytes after sensor description", pos);

  if (d.sensor_id.empty()) throw ValidationError("sensor_id must be nonempty");
  if (d.observed_property.empty())
    throw ValidationError("observed_property must be nonempty");
  if (d.unit.empty()) throw ValidationError("unit must be nonempty");
  if (!(d.sampling_frequency_hz > 0))
    throw ValidationError("sampling_frequency_hz must be positive");
  if (d.valid_range.min > d.valid_range.max)
    throw ValidationError("valid_range min exceeds max");
  return d;
}

std::size_t first_out_of_range(const ObservationSet& obs,
                               const SensorDescription& desc) noexcept {
  for (std::size_t i = 0; i < obs.records.size(); ++i) {
    const double v = obs.records[i].value;
    if (v < desc.valid_range.min || v > desc.valid_range.max) return i;
  }
  return npos;
}

}  // namespace citymesh::sme
