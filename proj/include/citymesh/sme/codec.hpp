#pragma once

#include <cstddef>
#include <string>

#include "citymesh/sme/types.hpp"

namespace citymesh::sme {

/// Fixed byte length of the observation envelope: the header lines are
/// space-padded up to this offset, and record lines start right after it.
inline constexpr std::size_t kEnvelopeBytes = 1946;

/// Exact encoded size of an observation with `records` value records.
[[nodiscard]] std::size_t estimate_payload_size(std::size_t records) noexcept;

/// Checks the structural invariants of an observation set: non-empty
/// single-line sensor id, a printable, ordered window, and records sorted by
/// timestamp and contained in the window. Throws ValidationError.
void validate_observation(const ObservationSet& obs);

/// Renders an observation set to its wire form. The output is a pure
/// function of the input: byte-identical across runs and platforms.
///
/// Throws ValidationError when the set violates an invariant (unsorted
/// records, timestamp outside the window, value with no fixed-decimal
/// representation, header fields that do not fit the envelope).
[[nodiscard]] std::string serialize_observation(const ObservationSet& obs);

/// Parses a wire-form observation payload.
///   - malformed envelope          -> ParseError with byte offset
///   - header/body count mismatch  -> IntegrityError
///   - bad record token            -> ParseError with record index
///   - invariant violations        -> ValidationError naming the record
[[nodiscard]] ObservationSet deserialize_observation(std::string_view payload);

/// Sensor description wire form: "SME/1.0 SENSOR" plus key=value lines,
/// no padding. Same determinism and round-trip guarantees as observations.
[[nodiscard]] std::string serialize_description(const SensorDescription& desc);
[[nodiscard]] SensorDescription deserialize_description(std::string_view payload);

/// Checks records against a sensor's declared valid range. Returns the
/// index of the first out-of-range record, or npos when all pass.
inline constexpr std::size_t npos = static_cast<std::size_t>(-1);
[[nodiscard]] std::size_t first_out_of_range(const ObservationSet& obs,
                                             const SensorDescription& desc) noexcept;

}  // namespace citymesh::sme
