#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "citymesh/sme/types.hpp"

namespace citymesh::sme {

/// Byte length of one encoded value record:
///   24-char instant + ',' + 21-char signed fixed decimal + ';' + '\n'.
inline constexpr std::size_t kRecordBytes = 48;

/// Width of the decimal value field: sign + 13 integer digits + '.' +
/// 6 fractional digits.
inline constexpr int kValueTextWidth = 21;
inline constexpr int kValueIntDigits = 13;
inline constexpr int kValueFracDigits = 6;

/// Decoded value arithmetic is defined in integer micro-units:
///   value = +/- double(micros) / 1e6.
/// Encoding inverts that exactly: it finds the micro-unit integer whose
/// decoded double equals |v| bit-for-bit (smallest such integer wins), and
/// rejects doubles with no preimage. This is what makes encode->decode an
/// identity for every accepted value, independent of libc/locale.
[[nodiscard]] std::optional<std::uint64_t> value_to_micros(double magnitude) noexcept;

[[nodiscard]] double micros_to_value(std::uint64_t micros, bool negative) noexcept;

/// Renders one value as the 21-byte fixed decimal into out[0..20]. Returns
/// false (out untouched) when the value has no exact representation.
bool format_fixed_value(double v, char* out) noexcept;

/// Parses a 21-byte fixed decimal; nullopt when malformed.
[[nodiscard]] std::optional<double> parse_fixed_value(const char* text) noexcept;

/// Outcome of a batch kernel run. ok == count means success; otherwise ok is
/// the index of the first record that failed and `reason` says why.
struct BatchResult {
  std::size_t ok = 0;
  enum class Reason : std::uint8_t {
    none,
    bad_timestamp,   // encode: unprintable instant; decode: malformed/invalid date
    bad_value,       // encode: no fixed-decimal preimage; decode: bad digits
    bad_separator,   // decode only: fixed punctuation byte is wrong
  } reason = Reason::none;
};

/// A record codec kernel: encodes/decodes `count` records to/from a buffer
/// of count * kRecordBytes bytes. Implementations must be observationally
/// identical; the test suite cross-checks every available kernel pair.
struct RecordKernel {
  const char* name;
  BatchResult (*encode)(const ValueRecord* in, std::size_t count, char* out);
  BatchResult (*decode)(const char* in, std::size_t count, ValueRecord* out);
};

/// Portable reference implementation (always available).
[[nodiscard]] const RecordKernel& scalar_record_kernel() noexcept;

/// AVX2 implementation, or nullptr when the build target or running CPU
/// lacks AVX2.
[[nodiscard]] const RecordKernel* avx2_record_kernel() noexcept;

/// Kernel used by the envelope codec. Picks the widest variant the CPU
/// supports unless overridden (nullptr restores auto-detection). The
/// CITYMESH_RECORD_KERNEL environment variable ("scalar" or "avx2") takes
/// effect at first use.
[[nodiscard]] const RecordKernel& active_record_kernel() noexcept;
void force_record_kernel(const RecordKernel* kernel) noexcept;

}  // namespace citymesh::sme
