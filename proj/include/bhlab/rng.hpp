/*
   Copyright 2026 The bhlab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

/** @file rng.hpp
    @brief Counter-based Philox4x32-10 and the Gaussian draws built on it.

    Every variate is a pure function of (key, counter), so a trial can be
    regenerated in any order on any thread.
*/

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "bhlab/types.hpp"

namespace bhlab {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds.
inline PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) noexcept {
  constexpr std::uint32_t M0 = 0xD2511F53u;
  constexpr std::uint32_t M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u;
  constexpr std::uint32_t W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

/// Uniform in (0, 1) from 52 random bits. With 53 bits the largest value
/// 1 - 2^-54 rounds to 1.
inline double uniform_open01(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits =
      ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

/// Two independent standard normals (Box-Muller) for a given counter.
inline std::array<double, 2> philox_normal_pair(std::uint64_t seed,
                                                const PhiloxCounter &ctr) noexcept {
  const PhiloxKey key{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32)};
  const PhiloxCounter r = philox4x32(ctr, key);
  const double u1 = uniform_open01(r[0], r[1]);
  const double u2 = uniform_open01(r[2], r[3]);
  const double rad = std::sqrt(-2.0 * std::log(u1));
  const double ang = 2.0 * kPi * u2;
  return {rad * std::cos(ang), rad * std::sin(ang)};
}

/// Standard complex Gaussian x + i y with x, y ~ N(0,1) independent, at
/// position (m, n) of trial `trial` under master seed `seed`.
inline cplx ensemble_normal(std::uint64_t seed, std::uint64_t trial,
                            std::uint64_t m, std::uint64_t n) noexcept {
  const PhiloxCounter ctr{static_cast<std::uint32_t>(n),
                          static_cast<std::uint32_t>(m),
                          static_cast<std::uint32_t>(trial),
                          static_cast<std::uint32_t>(trial >> 32)};
  const auto g = philox_normal_pair(seed, ctr);
  return {g[0], g[1]};
}

/// splitmix64 of master + (k + 1) * golden ratio.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k) noexcept {
  std::uint64_t x = master + (k + 1) * 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

} // namespace bhlab
