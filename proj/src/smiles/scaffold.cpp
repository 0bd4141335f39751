//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <vector>

#include "moltext/smiles.hpp"

namespace moltext {

MolGraph murcko_scaffold(const MolGraph &g) {
  size_t n = g.atom_count();
  std::vector<size_t> degree(n);
  std::vector<uint8_t> removed(n, 0);
  std::vector<uint32_t> queue;
  for (uint32_t i = 0; i < n; ++i) {
    degree[i] = g.degree(i);
    if (degree[i] <= 1) queue.push_back(i);
  }
  while (!queue.empty()) {
    uint32_t a = queue.back();
    queue.pop_back();
    if (removed[a]) continue;
    removed[a] = 1;
    for (auto [nbr, bond] : g.neighbors(a)) {
      (void)bond;
      if (removed[nbr]) continue;
      if (--degree[nbr] <= 1) queue.push_back(nbr);
    }
  }

  MolGraph scaffold;
  std::vector<uint32_t> remap(n, 0);
  for (uint32_t i = 0; i < n; ++i)
    if (!removed[i]) remap[i] = scaffold.add_atom(g.atom(i));
  for (const Bond &b : g.bonds())
    if (!removed[b.a] && !removed[b.b])
      scaffold.add_bond(remap[b.a], remap[b.b], b.order);
  return scaffold;
}

std::string scaffold_key(const MolGraph &g) {
  MolGraph scaffold = murcko_scaffold(g);
  if (scaffold.empty()) return "";
  return write_canonical(scaffold);
}

}  // namespace moltext
