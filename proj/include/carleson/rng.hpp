#pragma once

// Counter-based random streams.
//
// Every draw is a pure function of (seed, stream, counter): the 64-bit
// SplitMix64 finalizer is applied to a key derived from (seed, stream) mixed
// with the counter. There is no hidden state shared between streams, so a
// path or trial indexed by its number reproduces bit-for-bit on any platform
// and independently of evaluation order. Floating conversions use only
// integer arithmetic and exact scaling.

#include <cmath>
#include <cstdint>

#include "carleson/core.hpp"

namespace carleson {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  static constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;

  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(splitmix64_mix(splitmix64_mix(seed + golden) ^ (stream * 0xd1b54a32d192ed03ULL + golden))) {}

  /// Random word at an explicit counter position (does not advance).
  constexpr std::uint64_t word_at(std::uint64_t counter) const {
    return splitmix64_mix(key_ ^ splitmix64_mix(counter * golden + 0x632be59bd9b4e019ULL));
  }

  /// Uniform double in [0, 1) at an explicit counter position.
  double uniform_at(std::uint64_t counter) const {
    return static_cast<double>(word_at(counter) >> 11) * 0x1.0p-53;
  }

  std::uint64_t next_word() { return word_at(counter_++); }
  double uniform() { return uniform_at(counter_++); }

  /// Uniform integer in [lo, hi] (inclusive); rejection keeps it unbiased.
  Index uniform_int(Index lo, Index hi) {
    auto const span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<Index>(next_word());
    std::uint64_t const limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t w = next_word();
    while (w >= limit) w = next_word();
    return lo + static_cast<Index>(w % span);
  }

  /// Standard normal via Box-Muller (one value per call, two draws).
  double normal() {
    double u1 = uniform();
    double const u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace carleson
