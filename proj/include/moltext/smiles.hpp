//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_SMILES_HPP_
#define MOLTEXT_SMILES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moltext/error.hpp"

namespace moltext {

enum class BondOrder : uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  std::string element;
  int16_t isotope = 0;             // 0 = unspecified
  int8_t charge = 0;
  int8_t explicit_hydrogens = -1;  // -1 = no H count given in the input
  bool aromatic = false;
};

struct Bond {
  uint32_t a;
  uint32_t b;
  BondOrder order;
};

// Undirected labeled graph.  There is deliberately no valence model: hydrogen
// counts, charges and aromatic flags are carried as written, and validity
// means parseability, nothing more.
class MolGraph {
 public:
  uint32_t add_atom(Atom atom);
  // Throws Error(kData) on self-bonds, duplicate bonds, or an aromatic bond
  // whose endpoints are not both aromatic.
  uint32_t add_bond(uint32_t a, uint32_t b, BondOrder order);

  size_t atom_count() const { return atoms_.size(); }
  size_t bond_count() const { return bonds_.size(); }
  bool empty() const { return atoms_.empty(); }

  const Atom &atom(uint32_t i) const { return atoms_[i]; }
  const Bond &bond(uint32_t i) const { return bonds_[i]; }
  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }

  // (neighbor atom, bond index) pairs in insertion order.
  std::span<const std::pair<uint32_t, uint32_t>> neighbors(uint32_t i) const {
    return adjacency_[i];
  }
  size_t degree(uint32_t i) const { return adjacency_[i].size(); }
  std::optional<uint32_t> bond_between(uint32_t a, uint32_t b) const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<std::pair<uint32_t, uint32_t>>> adjacency_;
};

struct SmilesError {
  size_t position;  // byte offset into the input
  std::string message;
};

// Organic-subset SMILES reader: bare B/C/N/O/P/S/F/Cl/Br/I and aromatic
// b/c/n/o/s/p, bracket atoms with isotope, charge and H count, branches,
// ring closures (including %nn), and the bond symbols - = # : / \.
// Directional bonds are read as single bonds and @/@@ chirality marks are
// read and dropped: stereochemistry is out of scope.  A bond with no symbol
// between two aromatic atoms is aromatic, otherwise single.
Expected<MolGraph, SmilesError> parse_smiles(std::string_view smiles);

inline bool is_valid_smiles(std::string_view smiles) {
  return parse_smiles(smiles).ok();
}

// Canonical form: the same string for every atom/bond ordering of a graph.
// Atoms are ranked by iterative neighborhood refinement over (element,
// aromatic, charge, H count, isotope, degree); remaining ties are broken by
// trying each candidate and keeping the lexicographically smallest rendering.
// The graph must be nonempty and connected (parser output always is).
std::string write_canonical(const MolGraph &g);

// True when the element is known to the periodic table used by the parser.
bool known_element(std::string_view symbol);

// Ring framework: iteratively deletes atoms of degree <= 1, so any acyclic
// molecule (and any isolated atom) reduces to the empty graph while rings and
// their linkers survive.
MolGraph murcko_scaffold(const MolGraph &g);

// Canonical string of the scaffold; empty string for acyclic molecules, so
// all of them land in one shared group.
std::string scaffold_key(const MolGraph &g);

}  // namespace moltext

#endif  // MOLTEXT_SMILES_HPP_
