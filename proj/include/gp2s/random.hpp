#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gp2s {

/// All randomness flows through explicitly seeded engines of this type.
using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits.
inline double unit_real(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, n), n > 0, by rejection.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

}  // namespace gp2s
