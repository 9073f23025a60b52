#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Each (key, counter) pair maps
// to four independent 32-bit words, so draws are addressable and order-free.

namespace swarm::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline Counter philox4x32(Counter ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

/// Stream of draws addressed by (seed, trial, element, slot).
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t trial)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        trial_lo_(static_cast<std::uint32_t>(trial)),
        trial_hi_(static_cast<std::uint32_t>(trial >> 32)) {}

  /// Two uniforms in (0, 1) with 53-bit resolution.
  std::array<double, 2> uniform2(std::uint32_t element, std::uint32_t slot) const {
    const Counter out = philox4x32({element, slot, trial_lo_, trial_hi_}, key_);
    auto to_unit = [](std::uint32_t hi, std::uint32_t lo) {
      const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
      return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    };
    return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
  }

  double uniform(std::uint32_t element, std::uint32_t slot) const { return uniform2(element, slot)[0]; }

  /// Standard normal via Box-Muller on one Philox block.
  double normal(std::uint32_t element, std::uint32_t slot) const {
    const auto [a, b] = uniform2(element, slot);
    return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * 3.14159265358979323846 * b);
  }

 private:
  Key key_;
  std::uint32_t trial_lo_;
  std::uint32_t trial_hi_;
};

}  // namespace swarm::rng
