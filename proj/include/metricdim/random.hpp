#pragma once

#include <cstdint>
#include <random>

namespace metricdim {

// The standard distributions are implementation-defined, so seeded
// sampling goes through these helpers to stay bit-identical across toolchains.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection; bound must be positive.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % bound + 1) % bound;
  for (;;) {
    const std::uint64_t draw = rng();
    if (draw <= limit) return draw % bound;
  }
}

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace metricdim
