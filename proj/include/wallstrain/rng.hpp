// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace wallstrain::rng {

// Philox-4x32-10 counter-based generator (Salmon et al., SC'11).
// Stateless: the output block is a pure function of (counter, key), so every
// random draw in the pipeline is addressable as (seed, element, draw, stream)
// and reproducible independent of evaluation order and worker count.

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32(Counter ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kM0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kM1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Stream tags keep independent subsystems on disjoint counter spaces.
enum Stream : std::uint32_t {
  kPerturbStream = 1,
  kMlesacStream = 2,
  kSeedDeriveStream = 3,
  kLatticeStream = 4,
};

inline Key make_key(std::uint64_t seed) {
  return {std::uint32_t(seed), std::uint32_t(seed >> 32)};
}

/// Raw 128-bit block for (seed, element, draw, stream).
inline Counter block(std::uint64_t seed, std::uint64_t element, std::uint32_t draw,
                     std::uint32_t stream) {
  return philox4x32(
      {std::uint32_t(element), std::uint32_t(element >> 32), draw, stream},
      make_key(seed));
}

/// Uniform double strictly inside (0, 1) from 64 random bits.
/// 52 bits of the counter give k * 2^-52 + 2^-53, whose extremes 2^-53 and
/// 1 - 2^-53 are exactly representable, so neither endpoint is ever hit.
inline double uniform01(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
  return double(bits >> 12) * 0x1.0p-52 + 0x1.0p-53;
}

/// Standard normal variate addressed by (seed, element, draw, stream),
/// via Box-Muller on two hashed uniforms.
inline double standard_normal(std::uint64_t seed, std::uint64_t element, std::uint32_t draw,
                              std::uint32_t stream) {
  const Counter r = block(seed, element, draw, stream);
  const double u1 = uniform01(r[0], r[1]);
  const double u2 = uniform01(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Independent 64-bit sub-seed derived from (seed, a, b).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint32_t b) {
  const Counter r = block(seed, a, b, kSeedDeriveStream);
  return (std::uint64_t(r[0]) << 32) | r[1];
}

}  // namespace wallstrain::rng
