#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace citymesh {

/// Milliseconds since the Unix epoch, UTC. The wire format renders instants
/// as fixed-width "YYYY-MM-DDTHH:MM:SS.mmmZ" (24 bytes), so the printable
/// range is years 0000..9999.
using Instant = std::int64_t;

inline constexpr int kInstantTextWidth = 24;

/// Smallest/largest instants that fit the 24-byte text form.
[[nodiscard]] Instant min_printable_instant() noexcept;
[[nodiscard]] Instant max_printable_instant() noexcept;

[[nodiscard]] bool instant_printable(Instant t) noexcept;

/// Renders t into out[0..23] (no terminator). Returns false if t is outside
/// the printable range; out is untouched in that case.
bool format_instant(Instant t, char* out) noexcept;

/// Convenience wrapper returning a 24-char string; throws ValidationError
/// when out of range.
[[nodiscard]] std::string format_instant(Instant t);

/// Parses exactly 24 bytes. Rejects anything but the canonical form
/// (digits in the right places, real calendar date, 'Z' suffix).
[[nodiscard]] std::optional<Instant> parse_instant(const char* text) noexcept;

/// Days from 1970-01-01 for a civil date (proleptic Gregorian).
[[nodiscard]] std::int64_t days_from_civil(int y, unsigned m, unsigned d) noexcept;

struct CivilDate {
  int year;
  unsigned month;  // 1..12
  unsigned day;    // 1..31
};

[[nodiscard]] CivilDate civil_from_days(std::int64_t z) noexcept;

[[nodiscard]] unsigned days_in_month(int y, unsigned m) noexcept;

}  // namespace citymesh
