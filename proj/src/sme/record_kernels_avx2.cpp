// AVX2 variant of the value-record codec kernel. One record (48 bytes) is
// handled per iteration: structure is validated with two wide compares and
// the 19 value digits collapse through the usual maddubs/madd tree. Records
// that fail the wide checks are re-decoded by the scalar kernel so that
// error classification is identical between kernels by construction.

#include "citymesh/sme/record_kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>

#include "citymesh/timeutil.hpp"

namespace citymesh::sme {

namespace {

#define CM_AVX2 __attribute__((target("avx2")))

// --------------------------------------------------------------------------
// Record layout masks (byte positions within the 48-byte record).
//
//   0         1         2         3         4
//   012345678901234567890123456789012345678901234567
//   YYYY-MM-DDTHH:MM:SS.mmmZ,+iiiiiiiiiiiii.ffffff;\n
// --------------------------------------------------------------------------

constexpr std::uint32_t kFixedMask0 = 0x01892490;  // -,-,T,:,:,.,Z,, in bytes 0..31
constexpr std::uint32_t kDigitMask0 = 0xFC76DB6F;
constexpr std::uint32_t kSignMask0 = 0x02000000;   // byte 25
constexpr std::uint32_t kFixedMask1 = 0xC080;      // .,;,\n in bytes 32..47
constexpr std::uint32_t kDigitMask1 = 0x3F7F;

// Sums a 16-lane digit vector into hi/lo 8-digit halves:
// result = digits[0..7] and digits[8..15] as two decimal numbers.
CM_AVX2 inline void convert16(__m128i digits, std::uint32_t& hi8, std::uint32_t& lo8) {
  const __m128i pairs = _mm_maddubs_epi16(digits, _mm_set1_epi16(0x010A));
  const __m128i quads = _mm_madd_epi16(pairs, _mm_set1_epi32(0x00010064));
  const __m128i packed = _mm_packus_epi32(quads, quads);
  const __m128i octs = _mm_madd_epi16(packed, _mm_set1_epi32(0x00012710));
  hi8 = static_cast<std::uint32_t>(_mm_cvtsi128_si32(octs));
  lo8 = static_cast<std::uint32_t>(_mm_extract_epi32(octs, 1));
}

CM_AVX2 BatchResult avx2_decode(const char* in, std::size_t count, ValueRecord* out) {
  const __m256i tmpl0 = _mm256_setr_epi8(
      0, 0, 0, 0, '-', 0, 0, '-', 0, 0, 'T', 0, 0, ':', 0, 0,
      ':', 0, 0, '.', 0, 0, 0, 'Z', ',', 0, 0, 0, 0, 0, 0, 0);
  const __m128i tmpl1 = _mm_setr_epi8(
      0, 0, 0, 0, 0, 0, 0, '.', 0, 0, 0, 0, 0, 0, ';', '\n');
  const __m256i zero_ch = _mm256_set1_epi8('0');
  const __m256i nine = _mm256_set1_epi8(9);
  // Collect yyyy mm dd hh mi (12 digits, right-aligned) from bytes 0..15.
  const __m128i date_idx = _mm_setr_epi8(
      (char)0x80, (char)0x80, (char)0x80, (char)0x80,
      0, 1, 2, 3, 5, 6, 8, 9, 11, 12, 14, 15);
  // Collect value digits 4..12 and the 6 fraction digits from bytes 30..45.
  const __m128i mant_idx = _mm_setr_epi8(
      (char)0x80, 0, 1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 12, 13, 14, 15);

  for (std::size_t i = 0; i < count; ++i, in += kRecordBytes) {
    const __m256i b0 = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(in));
    const __m128i b1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(in + 32));

    const auto eq0 = static_cast<std::uint32_t>(
        _mm256_movemask_epi8(_mm256_cmpeq_epi8(b0, tmpl0)));
    const auto eq1 = static_cast<std::uint32_t>(
        _mm_movemask_epi8(_mm_cmpeq_epi8(b1, tmpl1)));

    const __m256i d0 = _mm256_sub_epi8(b0, zero_ch);
    const auto dig0 = static_cast<std::uint32_t>(_mm256_movemask_epi8(
        _mm256_cmpeq_epi8(_mm256_min_epu8(d0, nine), d0)));
    const __m128i d1 = _mm_sub_epi8(b1, _mm256_castsi256_si128(zero_ch));
    const auto dig1 = static_cast<std::uint32_t>(_mm_movemask_epi8(
        _mm_cmpeq_epi8(_mm_min_epu8(d1, _mm256_castsi256_si128(nine)), d1)));

    const auto sign0 = static_cast<std::uint32_t>(_mm256_movemask_epi8(
        _mm256_or_si256(_mm256_cmpeq_epi8(b0, _mm256_set1_epi8('+')),
                        _mm256_cmpeq_epi8(b0, _mm256_set1_epi8('-')))));

    const bool structure_ok =
        (eq0 & kFixedMask0) == kFixedMask0 && (eq1 & kFixedMask1) == kFixedMask1 &&
        (dig0 & kDigitMask0) == kDigitMask0 && (dig1 & kDigitMask1) == kDigitMask1 &&
        (sign0 & kSignMask0) != 0;
    if (!structure_ok) {
      // Let the reference kernel classify the failure.
      BatchResult r = scalar_record_kernel().decode(in, 1, out + i);
      return {i + r.ok, r.reason};
    }

    std::uint32_t year_part = 0, mdhm = 0;
    convert16(_mm_shuffle_epi8(_mm256_castsi256_si128(d0), date_idx), year_part, mdhm);
    const unsigned year = year_part;
    const unsigned month = mdhm / 1'000'000;
    const unsigned day = (mdhm / 10'000) % 100;
    const unsigned hour = (mdhm / 100) % 100;
    const unsigned minute = mdhm % 100;
    const unsigned sec = static_cast<unsigned>(in[17] - '0') * 10 +
                         static_cast<unsigned>(in[18] - '0');
    const unsigned ms = static_cast<unsigned>(in[20] - '0') * 100 +
                        static_cast<unsigned>(in[21] - '0') * 10 +
                        static_cast<unsigned>(in[22] - '0');
    if (month < 1 || month > 12 || day < 1 ||
        day > days_in_month(static_cast<int>(year), month) || hour > 23 ||
        minute > 59 || sec > 59)
      return {i, BatchResult::Reason::bad_timestamp};

    const __m128i mid = _mm_loadu_si128(reinterpret_cast<const __m128i*>(in + 30));
    const __m128i mid_digits = _mm_shuffle_epi8(
        _mm_sub_epi8(mid, _mm256_castsi256_si128(zero_ch)), mant_idx);
    std::uint32_t mant_hi = 0, mant_lo = 0;
    convert16(mid_digits, mant_hi, mant_lo);
    const std::uint64_t top4 =
        static_cast<std::uint64_t>(in[26] - '0') * 1000 +
        static_cast<std::uint64_t>(in[27] - '0') * 100 +
        static_cast<std::uint64_t>(in[28] - '0') * 10 +
        static_cast<std::uint64_t>(in[29] - '0');
    const std::uint64_t micros = top4 * 1'000'000'000'000'000ull +
                                 static_cast<std::uint64_t>(mant_hi) * 100'000'000ull +
                                 mant_lo;

    out[i].timestamp_ms =
        days_from_civil(static_cast<int>(year), month, day) * 86'400'000ll +
        ((static_cast<std::int64_t>(hour) * 60 + minute) * 60 + sec) * 1000 + ms;
    out[i].value = micros_to_value(micros, in[25] == '-');
  }
  return {count, BatchResult::Reason::none};
}

// --------------------------------------------------------------------------
// Encode
// --------------------------------------------------------------------------

// v < 1e8 -> 8 zero-padded ascii digits in the low qword.
CM_AVX2 inline __m128i digits8(std::uint32_t v) {
  const std::uint32_t hi = v / 10'000;
  const std::uint32_t lo = v % 10'000;
  const __m128i n = _mm_cvtsi32_si128(static_cast<int>(hi | (lo << 16)));
  const __m128i t0 = _mm_srli_epi16(_mm_mulhi_epu16(n, _mm_set1_epi16(8389)), 7);
  const __m128i r0 = _mm_sub_epi16(n, _mm_mullo_epi16(t0, _mm_set1_epi16(1000)));
  const __m128i t1 = _mm_srli_epi16(_mm_mulhi_epu16(r0, _mm_set1_epi16(5243)), 3);
  const __m128i r1 = _mm_sub_epi16(r0, _mm_mullo_epi16(t1, _mm_set1_epi16(100)));
  const __m128i t2 = _mm_mulhi_epu16(r1, _mm_set1_epi16(6554));
  const __m128i t3 = _mm_sub_epi16(r1, _mm_mullo_epi16(t2, _mm_set1_epi16(10)));
  const __m128i v01 = _mm_or_si128(t0, _mm_slli_epi16(t1, 8));
  const __m128i v23 = _mm_or_si128(t2, _mm_slli_epi16(t3, 8));
  return _mm_add_epi8(_mm_unpacklo_epi16(v01, v23), _mm_set1_epi8('0'));
}

CM_AVX2 BatchResult avx2_encode(const ValueRecord* in, std::size_t count, char* out) {
  const __m128i idx0 = _mm_setr_epi8(
      0, 1, 2, 3, (char)0x80, 4, 5, (char)0x80, 6, 7, (char)0x80,
      12, 13, (char)0x80, 14, 15);
  const __m128i tmpl0 = _mm_setr_epi8(
      0, 0, 0, 0, '-', 0, 0, '-', 0, 0, 'T', 0, 0, ':', 0, 0);
  const __m128i idx1 = _mm_setr_epi8(
      (char)0x80, 3, 4, (char)0x80, 5, 6, 7, (char)0x80, (char)0x80,
      (char)0x80, 11, 12, 13, 14, 15, (char)0x80);
  const __m128i idx1_l8 = _mm_setr_epi8(
      (char)0x80, (char)0x80, (char)0x80, (char)0x80, (char)0x80, (char)0x80,
      (char)0x80, (char)0x80, (char)0x80, (char)0x80, (char)0x80, (char)0x80,
      (char)0x80, (char)0x80, (char)0x80, 0);
  const __m128i tmpl1 = _mm_setr_epi8(
      ':', 0, 0, '.', 0, 0, 0, 'Z', ',', 0, 0, 0, 0, 0, 0, 0);
  const __m128i idx2_l8 = _mm_setr_epi8(
      1, 2, 3, 4, 5, 6, 7, (char)0x80, (char)0x80, (char)0x80, (char)0x80,
      (char)0x80, (char)0x80, (char)0x80, (char)0x80, (char)0x80);
  const __m128i idx2_f6 = _mm_setr_epi8(
      (char)0x80, (char)0x80, (char)0x80, (char)0x80, (char)0x80, (char)0x80,
      (char)0x80, (char)0x80, 0, 1, 2, 3, 4, 5, (char)0x80, (char)0x80);
  const __m128i tmpl2 = _mm_setr_epi8(
      0, 0, 0, 0, 0, 0, 0, '.', 0, 0, 0, 0, 0, 0, ';', '\n');

  for (std::size_t i = 0; i < count; ++i, out += kRecordBytes) {
    const ValueRecord& r = in[i];
    if (!instant_printable(r.timestamp_ms))
      return {i, BatchResult::Reason::bad_timestamp};
    const auto micros = value_to_micros(std::fabs(r.value));
    if (!micros) return {i, BatchResult::Reason::bad_value};

    const std::int64_t t = r.timestamp_ms;
    std::int64_t days = t / 86'400'000;
    std::int64_t rem = t % 86'400'000;
    if (rem < 0) {
      rem += 86'400'000;
      --days;
    }
    const CivilDate cd = civil_from_days(days);
    const auto ms = static_cast<std::uint32_t>(rem % 1000);
    const auto sec = static_cast<std::uint32_t>((rem / 1000) % 60);
    const auto minute = static_cast<std::uint32_t>((rem / 60'000) % 60);
    const auto hour = static_cast<std::uint32_t>(rem / 3'600'000);

    const std::uint64_t int_part = *micros / 1'000'000;
    const auto frac_part = static_cast<std::uint32_t>(*micros % 1'000'000);

    const __m128i ymd = digits8(static_cast<std::uint32_t>(cd.year) * 10'000 +
                                cd.month * 100 + cd.day);
    const __m128i hm = digits8(hour * 100 + minute);
    const __m128i sms = digits8(sec * 1000 + ms);
    const __m128i top5 = digits8(static_cast<std::uint32_t>(int_part / 100'000'000));
    const __m128i low8 = digits8(static_cast<std::uint32_t>(int_part % 100'000'000));
    const __m128i fr6 = digits8(frac_part * 100);

    const __m128i v0 = _mm_or_si128(
        _mm_shuffle_epi8(_mm_unpacklo_epi64(ymd, hm), idx0), tmpl0);
    __m128i v1 = _mm_or_si128(
        _mm_shuffle_epi8(_mm_unpacklo_epi64(sms, top5), idx1),
        _mm_or_si128(_mm_shuffle_epi8(low8, idx1_l8), tmpl1));
    v1 = _mm_insert_epi8(v1, std::signbit(r.value) ? '-' : '+', 9);
    const __m128i v2 = _mm_or_si128(
        _mm_shuffle_epi8(low8, idx2_l8),
        _mm_or_si128(_mm_shuffle_epi8(fr6, idx2_f6), tmpl2));

    _mm_storeu_si128(reinterpret_cast<__m128i*>(out), v0);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out + 16), v1);
    _mm_storeu_si128(reinterpret_cast<__m128i*>(out + 32), v2);
  }
  return {count, BatchResult::Reason::none};
}

#undef CM_AVX2

}  // namespace

const RecordKernel* avx2_record_kernel() noexcept {
  static const RecordKernel kAvx2{"avx2", &avx2_encode, &avx2_decode};
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
}

}  // namespace citymesh::sme

#else  // non-x86 targets fall back to the scalar kernel

namespace citymesh::sme {

const RecordKernel* avx2_record_kernel() noexcept { return nullptr; }

}  // namespace citymesh::sme

#endif
