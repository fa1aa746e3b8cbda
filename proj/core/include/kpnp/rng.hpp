#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "kpnp/vec.hpp"

namespace kpnp {

/// xoshiro256++ seeded from a 64-bit value through splitmix64.
///
/// The stream is part of the reproducibility contract: masks, noise and
/// random initializations depend only on the seed, so the generator and the
/// derived distributions below are spelled out rather than delegated to
/// <random>, whose distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound) via the 128-bit multiply-high map.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// n i.i.d. N(0, sigma^2) draws. Box-Muller on consecutive uniform pairs
/// (u1, u2), both outputs used in order; u1 is taken as 1 - uniform() so the
/// logarithm never sees zero.
Vec gaussian_noise(Rng& rng, std::size_t n, double sigma);

/// n i.i.d. uniform draws in [0, 1).
Vec uniform_vector(Rng& rng, std::size_t n);

}  // namespace kpnp
