//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moltext/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <string>
#include <unordered_set>

namespace moltext {

namespace {

void check_width(uint32_t width) {
  if (width == 0 || (width & (width - 1)) != 0)
    throw Error(Errc::kConfig, "fingerprint width must be a power of two");
}

Fingerprint make(FingerprintKind kind, uint32_t width, uint32_t parameter) {
  check_width(width);
  return Fingerprint{kind, width, parameter,
                     std::vector<uint64_t>((width + 63) / 64, 0)};
}

std::string atom_label(const Atom &a) {
  std::string label = a.element;
  if (a.aromatic)
    for (char &c : label) c = static_cast<char>(std::tolower(c));
  return label;
}

char bond_label(BondOrder order) {
  switch (order) {
    case BondOrder::kSingle:
      return '-';
    case BondOrder::kDouble:
      return '=';
    case BondOrder::kTriple:
      return '#';
    case BondOrder::kAromatic:
      return ':';
  }
  return '-';
}

void enumerate_paths(const MolGraph &g, uint32_t max_len, uint32_t atom,
                     std::string &label, std::vector<uint8_t> &on_path,
                     uint32_t depth,
                     std::unordered_set<std::string> &canonical) {
  if (depth >= 1) {
    std::string reversed(label.rbegin(), label.rend());
    canonical.insert(std::min(label, reversed));
  }
  if (depth == max_len) return;
  for (auto [nbr, bond] : g.neighbors(atom)) {
    if (on_path[nbr]) continue;
    size_t mark = label.size();
    label += bond_label(g.bond(bond).order);
    label += atom_label(g.atom(nbr));
    on_path[nbr] = 1;
    enumerate_paths(g, max_len, nbr, label, on_path, depth + 1, canonical);
    on_path[nbr] = 0;
    label.resize(mark);
  }
}

}  // namespace

std::vector<uint32_t> Fingerprint::bits() const {
  std::vector<uint32_t> out;
  for (uint32_t bit = 0; bit < width; ++bit)
    if (test(bit)) out.push_back(bit);
  return out;
}

uint64_t circular_atom_invariant(const MolGraph &g, uint32_t atom) {
  const Atom &a = g.atom(atom);
  uint64_t words[] = {fnv1a64(a.element),
                      static_cast<uint64_t>(a.aromatic),
                      static_cast<uint64_t>(a.charge + 100),
                      static_cast<uint64_t>(a.explicit_hydrogens + 1),
                      static_cast<uint64_t>(a.isotope),
                      g.degree(atom)};
  return hash_u64_span(words, kFingerprintSeed);
}

Fingerprint circular_fingerprint(const MolGraph &g, uint32_t radius,
                                 uint32_t width) {
  Fingerprint fp = make(FingerprintKind::kCircular, width, radius);
  size_t n = g.atom_count();
  std::vector<uint64_t> ids(n);
  for (uint32_t i = 0; i < n; ++i) {
    ids[i] = circular_atom_invariant(g, i);
    fp.set(ids[i]);
  }
  for (uint32_t r = 1; r <= radius; ++r) {
    std::vector<uint64_t> next(n);
    for (uint32_t i = 0; i < n; ++i) {
      std::vector<std::pair<uint64_t, uint64_t>> nbrs;
      for (auto [nbr, bond] : g.neighbors(i))
        nbrs.emplace_back(static_cast<uint64_t>(g.bond(bond).order),
                          ids[nbr]);
      std::sort(nbrs.begin(), nbrs.end());
      std::vector<uint64_t> words = {r, ids[i]};
      for (auto &[order, id] : nbrs) {
        words.push_back(order);
        words.push_back(id);
      }
      next[i] = hash_u64_span(words, kFingerprintSeed);
      fp.set(next[i]);
    }
    ids = std::move(next);
  }
  return fp;
}

Fingerprint path_fingerprint(const MolGraph &g, uint32_t max_len,
                             uint32_t width) {
  Fingerprint fp = make(FingerprintKind::kPath, width, max_len);
  std::unordered_set<std::string> canonical;
  std::vector<uint8_t> on_path(g.atom_count(), 0);
  for (uint32_t i = 0; i < g.atom_count(); ++i) {
    std::string label = atom_label(g.atom(i));
    on_path[i] = 1;
    enumerate_paths(g, max_len, i, label, on_path, 0, canonical);
    on_path[i] = 0;
  }
  for (const std::string &path : canonical) {
    uint64_t words[] = {fnv1a64(path)};
    fp.set(hash_u64_span(words, kFingerprintSeed));
  }
  return fp;
}

double tanimoto(const Fingerprint &a, const Fingerprint &b) {
  if (a.kind != b.kind)
    throw Error(Errc::kConfig, "tanimoto between different fingerprint kinds");
  if (a.width != b.width)
    throw Error(Errc::kConfig, "tanimoto between different fingerprint widths");
  int64_t in_both = 0, in_any = 0;
  for (size_t w = 0; w < a.words.size(); ++w) {
    in_both += std::popcount(a.words[w] & b.words[w]);
    in_any += std::popcount(a.words[w] | b.words[w]);
  }
  if (in_any == 0) return 1.0;
  return static_cast<double>(in_both) / static_cast<double>(in_any);
}

}  // namespace moltext
