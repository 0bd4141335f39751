//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_TESTS_HELPERS_HPP_
#define MOLTEXT_TESTS_HELPERS_HPP_

#include <algorithm>
#include <numeric>
#include <vector>

#include "moltext/rng.hpp"
#include "moltext/smiles.hpp"

namespace moltext::testing {

inline bool same_atom(const Atom &x, const Atom &y) {
  return x.element == y.element && x.isotope == y.isotope &&
         x.charge == y.charge && x.explicit_hydrogens == y.explicit_hydrogens &&
         x.aromatic == y.aromatic;
}

// Backtracking graph isomorphism over attributed molecular graphs.  This is
// the independent oracle for the canonical writer: it never looks at strings,
// only at atoms and bonds.
inline bool isomorphic(const MolGraph &a, const MolGraph &b) {
  size_t n = a.atom_count();
  if (n != b.atom_count() || a.bond_count() != b.bond_count()) return false;
  std::vector<int> map(n, -1);
  std::vector<uint8_t> used(n, 0);

  auto compatible = [&](uint32_t i, uint32_t j) {
    if (!same_atom(a.atom(i), b.atom(j))) return false;
    if (a.degree(i) != b.degree(j)) return false;
    for (auto [nbr, bond] : a.neighbors(i)) {
      if (map[nbr] < 0) continue;
      auto other = b.bond_between(j, static_cast<uint32_t>(map[nbr]));
      if (!other || b.bond(*other).order != a.bond(bond).order) return false;
    }
    // Count mapped neighbors both ways so j gains no extra edges.
    size_t mapped_a = 0, mapped_b = 0;
    for (auto [nbr, bond] : a.neighbors(i)) {
      (void)bond;
      if (map[nbr] >= 0) ++mapped_a;
    }
    for (auto [nbr, bond] : b.neighbors(j)) {
      (void)bond;
      if (used[nbr]) ++mapped_b;
    }
    return mapped_a == mapped_b;
  };

  auto recurse = [&](auto &&self, uint32_t i) -> bool {
    if (i == n) return true;
    for (uint32_t j = 0; j < n; ++j) {
      if (used[j] || !compatible(i, j)) continue;
      map[i] = static_cast<int>(j);
      used[j] = 1;
      if (self(self, i + 1)) return true;
      map[i] = -1;
      used[j] = 0;
    }
    return false;
  };
  return recurse(recurse, 0);
}

// Rebuilds the graph under a random atom permutation with shuffled bond
// order and randomly flipped bond endpoints.
inline MolGraph permute_graph(const MolGraph &g, Rng &rng) {
  size_t n = g.atom_count();
  std::vector<uint32_t> old_of_new(n);
  std::iota(old_of_new.begin(), old_of_new.end(), 0);
  for (size_t i = n; i > 1; --i)
    std::swap(old_of_new[i - 1], old_of_new[rng.below(i)]);
  std::vector<uint32_t> new_of_old(n);
  for (uint32_t k = 0; k < n; ++k) new_of_old[old_of_new[k]] = k;

  MolGraph out;
  for (uint32_t k = 0; k < n; ++k) out.add_atom(g.atom(old_of_new[k]));
  std::vector<uint32_t> bond_order(g.bond_count());
  std::iota(bond_order.begin(), bond_order.end(), 0);
  for (size_t i = bond_order.size(); i > 1; --i)
    std::swap(bond_order[i - 1], bond_order[rng.below(i)]);
  for (uint32_t idx : bond_order) {
    const Bond &b = g.bond(idx);
    uint32_t x = new_of_old[b.a], y = new_of_old[b.b];
    if (rng.below(2)) std::swap(x, y);
    out.add_bond(x, y, b.order);
  }
  return out;
}

// Random connected molecule: a tree over organic-subset atoms, sometimes an
// extra ring-closing edge, sometimes a fused aromatic six-ring, occasional
// charges/isotopes/H counts to exercise bracket atoms.
inline MolGraph random_molecule(Rng &rng, uint32_t max_atoms = 12) {
  static const char *kPool[] = {"C", "C", "C", "C", "C", "C", "N", "N",
                                "O", "O", "S", "P", "F", "Cl", "Br", "I"};
  MolGraph g;
  uint32_t n = 1 + static_cast<uint32_t>(rng.below(max_atoms));
  for (uint32_t i = 0; i < n; ++i) {
    Atom a{.element = kPool[rng.below(std::size(kPool))]};
    if (rng.below(12) == 0) a.charge = rng.below(2) ? 1 : -1;
    if (rng.below(16) == 0) a.isotope = a.element == "C" ? 13 : 15;
    if (rng.below(16) == 0)
      a.explicit_hydrogens = static_cast<int8_t>(rng.below(4));
    g.add_atom(std::move(a));
  }
  for (uint32_t i = 1; i < n; ++i) {
    BondOrder order = BondOrder::kSingle;
    uint64_t roll = rng.below(10);
    if (roll >= 8) order = BondOrder::kDouble;
    if (roll == 9) order = BondOrder::kTriple;
    g.add_bond(static_cast<uint32_t>(rng.below(i)), i, order);
  }
  if (n >= 4 && rng.below(2) == 0) {
    uint32_t x = static_cast<uint32_t>(rng.below(n));
    uint32_t y = static_cast<uint32_t>(rng.below(n));
    if (x != y && !g.bond_between(x, y))
      g.add_bond(x, y, BondOrder::kSingle);
  }
  if (rng.below(3) == 0) {
    uint32_t attach = static_cast<uint32_t>(rng.below(g.atom_count()));
    uint32_t first = 0;
    std::vector<uint32_t> ring;
    for (int i = 0; i < 6; ++i) {
      Atom a{.element = "C"};
      a.aromatic = true;
      uint32_t idx = g.add_atom(std::move(a));
      if (i == 0) first = idx;
      ring.push_back(idx);
    }
    for (int i = 0; i < 6; ++i)
      g.add_bond(ring[static_cast<size_t>(i)],
                 ring[static_cast<size_t>((i + 1) % 6)],
                 BondOrder::kAromatic);
    g.add_bond(attach, first, BondOrder::kSingle);
  }
  return g;
}

}  // namespace moltext::testing

#endif  // MOLTEXT_TESTS_HELPERS_HPP_
