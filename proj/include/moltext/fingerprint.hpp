//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_FINGERPRINT_HPP_
#define MOLTEXT_FINGERPRINT_HPP_

#include <cstdint>
#include <vector>

#include "moltext/hash.hpp"
#include "moltext/smiles.hpp"

namespace moltext {

// Seed folded into every fingerprint hash; pinned so that bit patterns are
// stable across builds and platforms.
inline constexpr uint64_t kFingerprintSeed = fnv1a64("moltext-fingerprint-v1");

enum class FingerprintKind : uint8_t {
  kCircular = 1,  // hashed atom environments by radius
  kPath = 2,      // hashed linear paths by bond count
};

struct Fingerprint {
  FingerprintKind kind;
  uint32_t width;      // bit count, power of two
  uint32_t parameter;  // radius (circular) or max path bonds (path)
  std::vector<uint64_t> words;

  void set(uint64_t hash) {
    uint32_t bit = static_cast<uint32_t>(hash) & (width - 1);
    words[bit >> 6] |= uint64_t{1} << (bit & 63);
  }
  bool test(uint32_t bit) const {
    return (words[bit >> 6] >> (bit & 63)) & 1;
  }
  std::vector<uint32_t> bits() const;  // sorted positions of set bits
};

// Per-atom seed invariant for the circular fingerprint: a pinned hash over
// (element, aromatic, charge, H count, isotope, degree).  Exposed so tests
// can recompute expected bits independently.
uint64_t circular_atom_invariant(const MolGraph &g, uint32_t atom);

// Hashed circular environments: radius 0 sets one bit per distinct atom
// invariant; each round rehashes (radius, own id, sorted neighbor (bond, id)
// pairs) and every intermediate identifier sets bit (hash mod width).
Fingerprint circular_fingerprint(const MolGraph &g, uint32_t radius = 2,
                                 uint32_t width = 2048);

// Hashed simple paths of 1..max_len bonds.  A path is read in both
// directions and the lexicographically smaller label string represents it,
// so "O-C" and "C-O" set the same bit; duplicates are collapsed before
// hashing.
Fingerprint path_fingerprint(const MolGraph &g, uint32_t max_len = 7,
                             uint32_t width = 2048);

// |a AND b| / |a OR b|; 1.0 when both are empty.  Throws Error(kConfig) when
// kinds or widths differ.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

}  // namespace moltext

#endif  // MOLTEXT_FINGERPRINT_HPP_
