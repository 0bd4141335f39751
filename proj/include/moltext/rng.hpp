//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_RNG_HPP_
#define MOLTEXT_RNG_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "moltext/hash.hpp"

namespace moltext {

// xoshiro256** seeded through splitmix64.  std:: engines are avoided on
// purpose: their distributions are not specified bit-for-bit across library
// implementations, and training runs here must replay exactly from a
// checkpoint.  State is four words, serialized as-is.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t s = seed;
    for (auto &word : state_) {
      s += 0x9e3779b97f4a7c15ull;
      word = mix64(s);
    }
  }

  uint64_t next_u64() {
    uint64_t &s0 = state_[0], &s1 = state_[1], &s2 = state_[2], &s3 = state_[3];
    uint64_t result = rotl(s1 * 5, 7) * 9;
    uint64_t t = s1 << 17;
    s2 ^= s0;
    s3 ^= s1;
    s1 ^= s2;
    s0 ^= s3;
    s2 ^= t;
    s3 = rotl(s3, 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n); n must be nonzero.
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Box-Muller.  Each call consumes exactly two uniforms and returns the
  // cosine branch, so the state never carries a cached spare.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = next_double(), u2 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    double radius = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::array<uint64_t, 4> state() const { return state_; }
  void restore(const std::array<uint64_t, 4> &state) { state_ = state; }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<uint64_t, 4> state_;
};

// Derived seed for a sub-stream (per-step dropout, per-worker shuffles, ...).
// Stateless: resuming at step k reproduces the same stream without replaying
// steps 0..k-1.
constexpr uint64_t derive_seed(uint64_t master, uint64_t stream,
                               uint64_t counter = 0) {
  uint64_t words[] = {master, stream, counter};
  return hash_u64_span(words);
}

}  // namespace moltext

#endif  // MOLTEXT_RNG_HPP_
