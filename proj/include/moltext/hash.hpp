//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_HASH_HPP_
#define MOLTEXT_HASH_HPP_

#include <cstdint>
#include <span>
#include <string_view>

namespace moltext {

// All content hashing in this project uses FNV-1a (64-bit) with the standard
// offset basis / prime, optionally followed by a splitmix64 finalizer when a
// well-mixed value is needed (fingerprints, derived seeds).  The constants are
// pinned here so that file manifests and fingerprints are reproducible across
// platforms.
inline constexpr uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ull;
inline constexpr uint64_t kFnvPrime = 0x100000001b3ull;

constexpr uint64_t fnv1a64(std::string_view bytes,
                           uint64_t state = kFnvOffsetBasis) {
  for (char c : bytes) {
    state ^= static_cast<uint8_t>(c);
    state *= kFnvPrime;
  }
  return state;
}

constexpr uint64_t fnv1a64_u64(uint64_t value, uint64_t state) {
  for (int i = 0; i < 8; ++i) {
    state ^= value & 0xff;
    state *= kFnvPrime;
    value >>= 8;
  }
  return state;
}

// splitmix64 finalizer; also the seeding function for the project RNG.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Hash of a small integer tuple: FNV-1a over the little-endian words, then
// mixed.  Used for fingerprint invariants and derived stream seeds.
constexpr uint64_t hash_u64_span(std::span<const uint64_t> words,
                                 uint64_t seed = kFnvOffsetBasis) {
  uint64_t state = seed;
  for (uint64_t w : words) state = fnv1a64_u64(w, state);
  return mix64(state);
}

}  // namespace moltext

#endif  // MOLTEXT_HASH_HPP_
