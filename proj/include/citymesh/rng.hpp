#pragma once

#include <cstdint>
#include <string_view>

namespace citymesh {

/// Deterministic 64-bit generator (splitmix64). Small, fast, and identical
/// on every platform, which is what the replayable-simulation contract
/// needs; statistical quality is plenty for a desk-scale simulator.
///
/// Independent subsystems must not share a stream: derive one per subsystem
/// with derive("mobility"), derive("workload"), ... so adding draws in one
/// subsystem never perturbs another.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept : state_(seed) {}

  [[nodiscard]] std::uint64_t next_u64() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  [[nodiscard]] double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [0, n). n == 0 returns 0. Fixed-point scaling instead of
  /// modulo: bias is < 2^-64 and the result is platform-independent.
  [[nodiscard]] std::uint64_t next_below(std::uint64_t n) noexcept {
    if (n == 0) return 0;
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Uniform in [lo, hi). Degenerate ranges return lo.
  [[nodiscard]] double next_in(double lo, double hi) noexcept {
    return lo + (hi - lo) * next_double();
  }

  /// Child stream keyed by a stable label. The child's sequence is
  /// independent of how many draws the parent has made so far only if
  /// derived before any parent draw; derive all subsystem streams up front.
  [[nodiscard]] Rng derive(std::string_view label) const noexcept {
    // FNV-1a over the label, folded into the current state.
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    Rng child(state_ ^ h);
    (void)child.next_u64();  // decorrelate from the parent state
    return child;
  }

 private:
  std::uint64_t state_;
};

}  // namespace citymesh
