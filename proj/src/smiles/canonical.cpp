//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cctype>
#include <string>
#include <tuple>
#include <vector>

#include "moltext/smiles.hpp"

namespace moltext {

namespace {

bool organic_subset(const std::string &e) {
  return e == "B" || e == "C" || e == "N" || e == "O" || e == "P" ||
         e == "S" || e == "F" || e == "Cl" || e == "Br" || e == "I";
}

bool aromatic_organic(const std::string &e) {
  return e == "B" || e == "C" || e == "N" || e == "O" || e == "P" || e == "S";
}

std::string lowercase(const std::string &e) {
  std::string out = e;
  for (char &c : out) c = static_cast<char>(std::tolower(c));
  return out;
}

std::string atom_token(const Atom &a) {
  bool bracket = a.isotope != 0 || a.charge != 0 || a.explicit_hydrogens >= 0 ||
                 !organic_subset(a.element) ||
                 (a.aromatic && !aromatic_organic(a.element));
  std::string sym = a.aromatic ? lowercase(a.element) : a.element;
  if (!bracket) return sym;
  std::string out = "[";
  if (a.isotope != 0) out += std::to_string(a.isotope);
  out += sym;
  // "H0" is written out so that a zero count survives reparsing; a bracket
  // with no H marker means the count was never specified.
  if (a.explicit_hydrogens >= 0) {
    out += 'H';
    if (a.explicit_hydrogens != 1) out += std::to_string(a.explicit_hydrogens);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    int magnitude = a.charge > 0 ? a.charge : -a.charge;
    if (magnitude > 1) out += std::to_string(magnitude);
  }
  out += ']';
  return out;
}

// Symbol needed in front of an atom or ring digit; empty when the default
// reading (aromatic between aromatic atoms, single otherwise) reproduces it.
std::string bond_symbol(const MolGraph &g, uint32_t bond_idx) {
  const Bond &b = g.bond(bond_idx);
  bool both_aromatic = g.atom(b.a).aromatic && g.atom(b.b).aromatic;
  switch (b.order) {
    case BondOrder::kSingle:
      return both_aromatic ? "-" : "";
    case BondOrder::kDouble:
      return "=";
    case BondOrder::kTriple:
      return "#";
    case BondOrder::kAromatic:
      return "";
  }
  return "";
}

uint32_t distinct_count(const std::vector<uint32_t> &ranks) {
  uint32_t max = 0;
  for (uint32_t r : ranks) max = std::max(max, r);
  return ranks.empty() ? 0 : max + 1;
}

std::vector<uint32_t> initial_ranks(const MolGraph &g) {
  using Key = std::tuple<std::string, bool, int, int, int, size_t>;
  size_t n = g.atom_count();
  std::vector<Key> keys(n);
  for (size_t i = 0; i < n; ++i) {
    const Atom &a = g.atom(static_cast<uint32_t>(i));
    keys[i] = Key{a.element,
                  a.aromatic,
                  a.charge,
                  a.explicit_hydrogens,
                  a.isotope,
                  g.degree(static_cast<uint32_t>(i))};
  }
  std::vector<Key> sorted = keys;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<uint32_t> ranks(n);
  for (size_t i = 0; i < n; ++i)
    ranks[i] = static_cast<uint32_t>(
        std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
        sorted.begin());
  return ranks;
}

std::vector<uint32_t> refine(const MolGraph &g, std::vector<uint32_t> ranks) {
  using Key = std::pair<uint32_t, std::vector<std::pair<uint8_t, uint32_t>>>;
  size_t n = g.atom_count();
  for (;;) {
    std::vector<Key> keys(n);
    for (size_t i = 0; i < n; ++i) {
      auto &nbrs = keys[i].second;
      keys[i].first = ranks[i];
      for (auto [nbr, bond] : g.neighbors(static_cast<uint32_t>(i)))
        nbrs.emplace_back(static_cast<uint8_t>(g.bond(bond).order),
                          ranks[nbr]);
      std::sort(nbrs.begin(), nbrs.end());
    }
    std::vector<Key> sorted = keys;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<uint32_t> next(n);
    for (size_t i = 0; i < n; ++i)
      next[i] = static_cast<uint32_t>(
          std::lower_bound(sorted.begin(), sorted.end(), keys[i]) -
          sorted.begin());
    if (distinct_count(next) == distinct_count(ranks)) return next;
    ranks = next;
  }
}

// Rendering for one fully discrete ranking.  Two passes over a DFS tree
// rooted at the lowest-ranked atom with children visited in rank order:
// the first classifies tree vs ring-closure edges, the second emits.
class Writer {
 public:
  Writer(const MolGraph &g, const std::vector<uint32_t> &ranks)
      : g_(g),
        ranks_(ranks),
        preorder_(g.atom_count(), -1),
        children_(g.atom_count()),
        closes_at_(g.atom_count()),
        bond_state_(g.bond_count(), 0),
        digit_of_(g.bond_count(), 0) {}

  std::string run() {
    uint32_t root = 0;
    for (uint32_t i = 1; i < g_.atom_count(); ++i)
      if (ranks_[i] < ranks_[root]) root = i;
    classify(root);
    for (auto &closes : closes_at_)
      std::sort(closes.begin(), closes.end(), [&](uint32_t x, uint32_t y) {
        return preorder_[opener_of(x)] < preorder_[opener_of(y)];
      });
    std::string out;
    emit(root, out);
    return out;
  }

 private:
  uint32_t opener_of(uint32_t bond_idx) const {
    const Bond &b = g_.bond(bond_idx);
    return preorder_[b.a] < preorder_[b.b] ? b.a : b.b;
  }

  std::vector<uint32_t> sorted_neighbors(uint32_t atom) const {
    std::vector<uint32_t> order;
    for (auto [nbr, bond] : g_.neighbors(atom)) {
      (void)bond;
      order.push_back(nbr);
    }
    std::sort(order.begin(), order.end(),
              [&](uint32_t x, uint32_t y) { return ranks_[x] < ranks_[y]; });
    return order;
  }

  void classify(uint32_t atom) {
    preorder_[atom] = next_preorder_++;
    for (uint32_t nbr : sorted_neighbors(atom)) {
      uint32_t bond = *g_.bond_between(atom, nbr);
      if (bond_state_[bond] != 0) continue;
      if (preorder_[nbr] < 0) {
        bond_state_[bond] = 1;  // tree edge
        children_[atom].push_back(nbr);
        classify(nbr);
      } else {
        bond_state_[bond] = 2;  // ring closure, discovered at the later atom
        closes_at_[atom].push_back(bond);
      }
    }
  }

  std::string digit_token(int digit) const {
    if (digit < 10) return std::string(1, static_cast<char>('0' + digit));
    return "%" + std::to_string(digit);
  }

  int allocate_digit() {
    for (int d = 1; d < 100; ++d)
      if (!active_digits_[d]) {
        active_digits_[d] = true;
        return d;
      }
    throw Error(Errc::kData, "more than 99 simultaneously open ring bonds");
  }

  void emit(uint32_t atom, std::string &out) {
    out += atom_token(g_.atom(atom));
    // Ring bonds opening here: this atom is the earlier endpoint.  Ordered
    // by the closing atom's position so digit assignment is reproducible.
    std::vector<uint32_t> opens;
    for (auto [nbr, bond] : g_.neighbors(atom))
      if (bond_state_[bond] == 2 && opener_of(bond) == atom)
        opens.push_back(bond);
    std::sort(opens.begin(), opens.end(), [&](uint32_t x, uint32_t y) {
      const Bond &bx = g_.bond(x);
      const Bond &by = g_.bond(y);
      uint32_t cx = bx.a == atom ? bx.b : bx.a;
      uint32_t cy = by.a == atom ? by.b : by.a;
      return preorder_[cx] < preorder_[cy];
    });
    for (uint32_t bond : closes_at_[atom]) {
      out += bond_symbol(g_, bond);
      int digit = digit_of_[bond];
      out += digit_token(digit);
      active_digits_[digit] = false;
    }
    for (uint32_t bond : opens) {
      int digit = allocate_digit();
      digit_of_[bond] = digit;
      out += bond_symbol(g_, bond);
      out += digit_token(digit);
    }
    for (size_t c = 0; c < children_[atom].size(); ++c) {
      uint32_t child = children_[atom][c];
      uint32_t bond = *g_.bond_between(atom, child);
      bool last = c + 1 == children_[atom].size();
      if (!last) out += '(';
      out += bond_symbol(g_, bond);
      emit(child, out);
      if (!last) out += ')';
    }
  }

  const MolGraph &g_;
  const std::vector<uint32_t> &ranks_;
  std::vector<int> preorder_;
  std::vector<std::vector<uint32_t>> children_;
  std::vector<std::vector<uint32_t>> closes_at_;
  std::vector<uint8_t> bond_state_;
  std::vector<int> digit_of_;
  bool active_digits_[100] = {};
  int next_preorder_ = 0;
};

// Ties left after refinement are broken by individualizing each member of
// the first tied cell in turn; every branch yields one rendering and the
// smallest string wins, which makes the result independent of input order.
void search(const MolGraph &g, const std::vector<uint32_t> &ranks,
            std::string &best) {
  size_t n = g.atom_count();
  std::vector<uint32_t> cell_size(n, 0);
  for (uint32_t r : ranks) ++cell_size[r];
  uint32_t split_rank = 0;
  bool discrete = true;
  for (uint32_t r = 0; r < n; ++r)
    if (cell_size[r] > 1) {
      split_rank = r;
      discrete = false;
      break;
    }
  if (discrete) {
    std::string s = Writer(g, ranks).run();
    if (best.empty() || s < best) best = std::move(s);
    return;
  }
  for (uint32_t a = 0; a < n; ++a) {
    if (ranks[a] != split_rank) continue;
    std::vector<uint32_t> child = ranks;
    for (uint32_t b = 0; b < n; ++b)
      if (b != a && child[b] >= split_rank) ++child[b];
    search(g, refine(g, child), best);
  }
}

bool connected(const MolGraph &g) {
  if (g.empty()) return false;
  std::vector<uint8_t> seen(g.atom_count(), 0);
  std::vector<uint32_t> stack = {0};
  seen[0] = 1;
  size_t count = 1;
  while (!stack.empty()) {
    uint32_t a = stack.back();
    stack.pop_back();
    for (auto [nbr, bond] : g.neighbors(a)) {
      (void)bond;
      if (!seen[nbr]) {
        seen[nbr] = 1;
        ++count;
        stack.push_back(nbr);
      }
    }
  }
  return count == g.atom_count();
}

}  // namespace

std::string write_canonical(const MolGraph &g) {
  if (g.empty()) throw Error(Errc::kData, "cannot write an empty graph");
  if (!connected(g))
    throw Error(Errc::kData, "canonical writer needs a connected graph");
  std::string best;
  search(g, refine(g, initial_ranks(g)), best);
  return best;
}

}  // namespace moltext
