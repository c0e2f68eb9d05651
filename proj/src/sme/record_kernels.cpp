#include "citymesh/sme/record_kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace citymesh::sme {

namespace {

// Largest magnitude expressible in 13.6 fixed decimal, in micro-units.
constexpr std::uint64_t kMicrosLimit = 10'000'000'000'000'000'000ull;  // 10^19
constexpr double kMagnitudeLimit = 1e13;

constexpr char kDigitPairs[201] =
    "00010203040506070809"
    "10111213141516171819"
    "20212223242526272829"
    "30313233343536373839"
    "40414243444546474849"
    "50515253545556575859"
    "60616263646566676869"
    "70717273747576777879"
    "80818283848586878889"
    "90919293949596979899";

}  // namespace

std::optional<std::uint64_t> value_to_micros(double magnitude) noexcept {
  if (!(magnitude >= 0.0) || magnitude >= kMagnitudeLimit) return std::nullopt;
  // m -> double(m)/1e6 is monotone, so the preimages of `magnitude` form a
  // contiguous range. Near 10^19 the scaled estimate can be off by up to
  // ~2.2e3 ulps' worth of integers, so search a window comfortably wider
  // than that and take the smallest preimage.
  const double scaled = magnitude * 1e6;  // < 1e19 < 2^64, conversion safe
  const std::uint64_t base = static_cast<std::uint64_t>(scaled);
  std::uint64_t lo = base > 4096 ? base - 4096 : 0;
  std::uint64_t hi = base + 4096;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (static_cast<double>(mid) / 1e6 >= magnitude)
      hi = mid;
    else
      lo = mid + 1;
  }
  if (lo >= kMicrosLimit) return std::nullopt;
  if (static_cast<double>(lo) / 1e6 == magnitude) return lo;
  return std::nullopt;
}

double micros_to_value(std::uint64_t micros, bool negative) noexcept {
  const double v = static_cast<double>(micros) / 1e6;
  return negative ? -v : v;
}

bool format_fixed_value(double v, char* out) noexcept {
  const auto micros = value_to_micros(std::fabs(v));
  if (!micros) return false;
  out[0] = std::signbit(v) ? '-' : '+';
  std::uint64_t d = *micros / 1'000'000;
  for (int i = kValueIntDigits; i >= 1; --i) {
    out[i] = static_cast<char>('0' + d % 10);
    d /= 10;
  }
  out[14] = '.';
  std::uint64_t f = *micros % 1'000'000;
  for (int i = kValueFracDigits - 1; i >= 0; --i) {
    out[15 + i] = static_cast<char>('0' + f % 10);
    f /= 10;
  }
  return true;
}

std::optional<double> parse_fixed_value(const char* p) noexcept {
  const char sign = p[0];
  if ((sign != '+' && sign != '-') || p[14] != '.') return std::nullopt;
  std::uint64_t int_part = 0;
  std::uint64_t frac_part = 0;
  auto digits = [](const char* q, int n, std::uint64_t& out_v) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      const unsigned d = static_cast<unsigned char>(q[i]) - '0';
      if (d > 9) return false;
      v = v * 10 + d;
    }
    out_v = v;
    return true;
  };
  if (!digits(p + 1, kValueIntDigits, int_part) ||
      !digits(p + 15, kValueFracDigits, frac_part))
    return std::nullopt;
  return micros_to_value(int_part * 1'000'000 + frac_part, sign == '-');
}

// ============================================================================
// Scalar reference kernel
// ============================================================================

namespace {

void put_fixed_digits(std::uint64_t v, int digits, char* out) noexcept {
  int i = digits;
  while (i >= 2) {
    const unsigned pair = static_cast<unsigned>(v % 100) * 2;
    v /= 100;
    out[--i] = kDigitPairs[pair + 1];
    out[--i] = kDigitPairs[pair];
  }
  if (i == 1) out[0] = static_cast<char>('0' + v % 10);
}

BatchResult scalar_encode(const ValueRecord* in, std::size_t count, char* out) {
  for (std::size_t i = 0; i < count; ++i, out += kRecordBytes) {
    const ValueRecord& r = in[i];
    if (!format_instant(r.timestamp_ms, out))
      return {i, BatchResult::Reason::bad_timestamp};
    const bool neg = std::signbit(r.value);
    const auto micros = value_to_micros(std::fabs(r.value));
    if (!micros) return {i, BatchResult::Reason::bad_value};
    out[24] = ',';
    out[25] = neg ? '-' : '+';
    put_fixed_digits(*micros / 1'000'000, kValueIntDigits, out + 26);
    out[39] = '.';
    put_fixed_digits(*micros % 1'000'000, kValueFracDigits, out + 40);
    out[46] = ';';
    out[47] = '\n';
  }
  return {count, BatchResult::Reason::none};
}

// Accumulates `digits` decimal digits; returns false on a non-digit byte.
bool read_digits(const char* p, int digits, std::uint64_t& out) noexcept {
  std::uint64_t v = 0;
  for (int i = 0; i < digits; ++i) {
    const unsigned d = static_cast<unsigned char>(p[i]) - '0';
    if (d > 9) return false;
    v = v * 10 + d;
  }
  out = v;
  return true;
}

BatchResult scalar_decode(const char* in, std::size_t count, ValueRecord* out) {
  for (std::size_t i = 0; i < count; ++i, in += kRecordBytes) {
    if (in[24] != ',' || in[39] != '.' || in[46] != ';' || in[47] != '\n')
      return {i, BatchResult::Reason::bad_separator};
    const auto ts = parse_instant(in);
    if (!ts) return {i, BatchResult::Reason::bad_timestamp};
    const char sign = in[25];
    std::uint64_t int_part = 0;
    std::uint64_t frac_part = 0;
    if ((sign != '+' && sign != '-') ||
        !read_digits(in + 26, kValueIntDigits, int_part) ||
        !read_digits(in + 40, kValueFracDigits, frac_part))
      return {i, BatchResult::Reason::bad_value};
    out[i].timestamp_ms = *ts;
    out[i].value = micros_to_value(int_part * 1'000'000 + frac_part, sign == '-');
  }
  return {count, BatchResult::Reason::none};
}

}  // namespace

const RecordKernel& scalar_record_kernel() noexcept {
  static constexpr RecordKernel kScalar{"scalar", &scalar_encode, &scalar_decode};
  return kScalar;
}

// ============================================================================
// Kernel selection
// ============================================================================

namespace {

const RecordKernel* detect_kernel() noexcept {
  if (const char* env = std::getenv("CITYMESH_RECORD_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_record_kernel();
    if (std::strcmp(env, "avx2") == 0 && avx2_record_kernel() != nullptr)
      return avx2_record_kernel();
  }
  if (const RecordKernel* k = avx2_record_kernel()) return k;
  return &scalar_record_kernel();
}

std::atomic<const RecordKernel*> g_forced{nullptr};

}  // namespace

const RecordKernel& active_record_kernel() noexcept {
  if (const RecordKernel* f = g_forced.load(std::memory_order_acquire)) return *f;
  static const RecordKernel* detected = detect_kernel();
  return *detected;
}

void force_record_kernel(const RecordKernel* kernel) noexcept {
  g_forced.store(kernel, std::memory_order_release);
}

}  // namespace citymesh::sme
