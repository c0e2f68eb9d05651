#include "citymesh/timeutil.hpp"

#include "citymesh/error.hpp"

namespace citymesh {

namespace {

constexpr std::int64_t kMsPerDay = 86'400'000;

// Floor division/modulo for possibly-negative dividends.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  std::int64_t q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) --q;
  return q;
}

constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) noexcept {
  return a - floor_div(a, b) * b;
}

}  // namespace

std::int64_t days_from_civil(int y, unsigned m, unsigned d) noexcept {
  // Howard Hinnant's algorithm, public domain.
  y -= m <= 2;
  const std::int64_t era = floor_div(y, 400);
  const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t z) noexcept {
  z += 719468;
  const std::int64_t era = floor_div(z, 146097);
  const unsigned doe = static_cast<unsigned>(z - era * 146097);           // [0, 146096]
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);           // [0, 365]
  const unsigned mp = (5 * doy + 2) / 153;                                // [0, 11]
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;                        // [1, 31]
  const unsigned m = mp + (mp < 10 ? 3 : -9);                             // [1, 12]
  return CivilDate{static_cast<int>(y + (m <= 2)), m, d};
}

unsigned days_in_month(int y, unsigned m) noexcept {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12) return 0;
  if (m == 2) {
    const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[m - 1];
}

Instant min_printable_instant() noexcept {
  return days_from_civil(0, 1, 1) * kMsPerDay;
}

Instant max_printable_instant() noexcept {
  return (days_from_civil(9999, 12, 31) + 1) * kMsPerDay - 1;
}

bool instant_printable(Instant t) noexcept {
  return t >= min_printable_instant() && t <= max_printable_instant();
}

bool format_instant(Instant t, char* out) noexcept {
  if (!instant_printable(t)) return false;
  const std::int64_t days = floor_div(t, kMsPerDay);
  std::int64_t rem = floor_mod(t, kMsPerDay);
  const CivilDate cd = civil_from_days(days);

  const unsigned ms = static_cast<unsigned>(rem % 1000);
  rem /= 1000;
  const unsigned sec = static_cast<unsigned>(rem % 60);
  rem /= 60;
  const unsigned min = static_cast<unsigned>(rem % 60);
  const unsigned hour = static_cast<unsigned>(rem / 60);

  auto put2 = [&out](int pos, unsigned v) {
    out[pos] = static_cast<char>('0' + v / 10);
    out[pos + 1] = static_cast<char>('0' + v % 10);
  };
  unsigned y = static_cast<unsigned>(cd.year);
  out[3] = static_cast<char>('0' + y % 10);
  y /= 10;
  out[2] = static_cast<char>('0' + y % 10);
  y /= 10;
  out[1] = static_cast<char>('0' + y % 10);
  out[0] = static_cast<char>('0' + y / 10);
  out[4] = '-';
  put2(5, cd.month);
  out[7] = '-';
  put2(8, cd.day);
  out[10] = 'T';
  put2(11, hour);
  out[13] = ':';
  put2(14, min);
  out[16] = ':';
  put2(17, sec);
  out[19] = '.';
  out[20] = static_cast<char>('0' + ms / 100);
  out[21] = static_cast<char>('0' + (ms / 10) % 10);
  out[22] = static_cast<char>('0' + ms % 10);
  out[23] = 'Z';
  return true;
}

std::string format_instant(Instant t) {
  std::string s(kInstantTextWidth, '\0');
  if (!format_instant(t, s.data()))
    throw ValidationError("instant outside printable range 0000..9999: " +
                          std::to_string(t));
  return s;
}

std::optional<Instant> parse_instant(const char* p) noexcept {
  auto digit = [p](int pos) -> int {
    const char c = p[pos];
    return (c >= '0' && c <= '9') ? c - '0' : -1;
  };
  auto num = [&digit](int pos, int n) -> int {
    int v = 0;
    for (int i = 0; i < n; ++i) {
      const int d = digit(pos + i);
      if (d < 0) return -1;
      v = v * 10 + d;
    }
    return v;
  };

  if (p[4] != '-' || p[7] != '-' || p[10] != 'T' || p[13] != ':' ||
      p[16] != ':' || p[19] != '.' || p[23] != 'Z')
    return std::nullopt;

  const int year = num(0, 4);
  const int month = num(5, 2);
  const int day = num(8, 2);
  const int hour = num(11, 2);
  const int min = num(14, 2);
  const int sec = num(17, 2);
  const int ms = num(20, 3);
  if (year < 0 || month < 0 || day < 0 || hour < 0 || min < 0 || sec < 0 || ms < 0)
    return std::nullopt;
  if (month < 1 || month > 12) return std::nullopt;
  if (day < 1 || day > static_cast<int>(days_in_month(year, static_cast<unsigned>(month))))
    return std::nullopt;
  if (hour > 23 || min > 59 || sec > 59) return std::nullopt;

  const std::int64_t days =
      days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  return days * kMsPerDay +
         ((static_cast<std::int64_t>(hour) * 60 + min) * 60 + sec) * 1000 + ms;
}

}  // namespace citymesh
