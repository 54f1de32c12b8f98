// Copyright (c) 2026 skyfuse contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace skyfuse {

/// SplitMix64 output function. Bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// FNV-1a 64-bit hash, used to fold string stream labels into RNG streams.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x00000100000001B3ull;
  }
  return h;
}

/// Counter-based SplitMix64 generator with explicit stream splitting.
///
/// The state advances by the golden-gamma increment and every output is the
/// mix of the new state, so the sequence for a given (seed, stream path) is
/// identical on every platform. Streams are derived by absorbing each path
/// word through the mixer: state0 = mix(... mix(mix(seed) ^ mix(w0)) ^ ...).
/// All distributions below are implemented from raw 64-bit draws only; no
/// std::random distribution is used anywhere, since those are not
/// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {}) {
    std::uint64_t s = mix64(seed);
    for (std::uint64_t word : stream) {
      s = mix64(s ^ mix64(word));
    }
    state_ = s;
  }

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    return mix64(state_);
  }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform01() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi] inclusive (64-bit multiply-shift).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(next()) * range;
    return lo + static_cast<std::int64_t>(
                    static_cast<std::uint64_t>(wide >> 64));
  }

  /// Gaussian via Box-Muller; consumes exactly two draws per call.
  double gaussian(double mean, double sigma) {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(2.0 * 3.141592653589793238462643 * u2);
  }

  /// Poisson via Knuth's product-of-uniforms method (small means only).
  int poisson(double mean) {
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace skyfuse
