#pragma once

// Counter-based random numbers.
//
// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3")
// maps a 128-bit counter and a 64-bit key to 128 random bits. Because every
// draw is a pure function of (key, counter), any element of a random stream
// can be produced independently, which makes parallel generation
// reproducible without coordinating state between threads.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace rankcorr {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

inline Philox4x32Counter philox4x32_10(Philox4x32Counter ctr, Philox4x32Key key) {
  constexpr std::uint64_t kM0 = 0xD2511F53u;
  constexpr std::uint64_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = kM0 * ctr[0];
    const std::uint64_t p1 = kM1 * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

/// SplitMix64 finalizer; used to derive independent seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed) ^ a) ^ (b * 0xD6E8FEB86659FD93ull));
}

/// Random-access stream of standard normal variates for one seed.
/// Element 2c and 2c+1 come from one Philox block at counter c through the
/// Box-Muller transform.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed, std::uint64_t substream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        substream_(substream) {}

  /// Uniforms in (0, 1) from block c.
  std::array<double, 2> uniforms(std::uint64_t c) const {
    const auto bits = philox4x32_10({static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                                     static_cast<std::uint32_t>(substream_),
                                     static_cast<std::uint32_t>(substream_ >> 32)},
                                    key_);
    const std::uint64_t a = (std::uint64_t{bits[0]} << 32) | bits[1];
    const std::uint64_t b = (std::uint64_t{bits[2]} << 32) | bits[3];
    constexpr double kScale = 0x1.0p-53;
    return {(static_cast<double>(a >> 11) + 0.5) * kScale, (static_cast<double>(b >> 11) + 0.5) * kScale};
  }

  std::array<double, 2> pair(std::uint64_t c) const {
    const auto [u1, u2] = uniforms(c);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  double operator[](std::uint64_t i) const { return pair(i / 2)[i % 2]; }

 private:
  Philox4x32Key key_;
  std::uint64_t substream_;
};

}  // namespace rankcorr
