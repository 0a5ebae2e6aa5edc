#pragma once

#include <cstdint>

namespace bfly {

/// Small counter-friendly PRNG (splitmix64). Used instead of <random>
/// engines where bit-for-bit reproducibility across platforms and worker
/// counts is part of the contract: std::uniform_int_distribution is not
/// portable, and seeding one mt19937_64 per trial is too slow.
struct SplitMix64 {
  std::uint64_t state = 0;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, bound) by rejection; bound must be nonzero.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % bound;
  }

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

/// Independent per-index stream derived from a master seed: serial and
/// parallel executions that process index i with derive_stream(seed, i)
/// produce identical results regardless of scheduling.
inline SplitMix64 derive_stream(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 mix(seed ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
  mix.next();
  return mix;
}

}  // namespace bfly
