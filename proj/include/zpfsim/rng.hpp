/*
   Copyright 2026 The zpfsim Authors

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

#pragma once

// Counter-based random numbers (Philox4x32-10, Salmon et al. SC 2011).
//
// Every draw is a pure function of (seed, stream, index, block), so Monte
// Carlo sample k can be regenerated anywhere without touching samples
// 0..k-1. That is what makes the parallel loops in this library produce
// identical output for any thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace zpfsim {

class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Counter generate(Counter ctr, Key key) {
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Named random stream: one key (the seed) and one stream id. Draws are
/// addressed by (index, block); each block yields four 32-bit words.
class CounterStream {
 public:
  constexpr CounterStream(std::uint64_t seed, std::uint32_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  constexpr Philox4x32::Counter words(std::uint64_t index, std::uint32_t block) const {
    return Philox4x32::generate({static_cast<std::uint32_t>(index),
                                 static_cast<std::uint32_t>(index >> 32), stream_, block},
                                key_);
  }

  /// Two uniforms strictly inside (0,1) with 53-bit resolution.
  std::array<double, 2> uniforms(std::uint64_t index, std::uint32_t block) const {
    const auto w = words(index, block);
    return {to_open_unit(w[0], w[1]), to_open_unit(w[2], w[3])};
  }

  double uniform(std::uint64_t index, std::uint32_t block) const {
    return uniforms(index, block)[0];
  }

  /// Two independent standard normals (Box-Muller) for one block.
  std::array<double, 2> normals(std::uint64_t index, std::uint32_t block) const {
    const auto u = uniforms(index, block);
    const double radius = std::sqrt(-2.0 * std::log(u[0]));
    const double angle = 2.0 * std::numbers::pi * u[1];
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  std::uint32_t stream() const noexcept { return stream_; }

 private:
  static double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  Philox4x32::Key key_;
  std::uint32_t stream_;
};

/// Stream ids used across the library. Keeping them in one place avoids two
/// subsystems silently sharing random numbers.
namespace streams {
inline constexpr std::uint32_t kSource = 1;
inline constexpr std::uint32_t kDecision = 2;
inline constexpr std::uint32_t kBank = 3;
inline constexpr std::uint32_t kKot = 4;
inline constexpr std::uint32_t kBootstrap = 5;
inline constexpr std::uint32_t kSynthesis = 6;
inline constexpr std::uint32_t kHoldout = 7;
inline constexpr std::uint32_t kConfirm = 8;
/// Device d draws its injected vacuum from stream kDeviceBase + d.
inline constexpr std::uint32_t kDeviceBase = 1024;
}  // namespace streams

}  // namespace zpfsim
