//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <string>

#include "moltext/smiles.hpp"

namespace moltext {

namespace {

constexpr std::array<std::string_view, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
    "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
    "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
    "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
    "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

constexpr std::string_view kAromaticOrganic = "bcnops";

bool is_aromatic_organic(char c) {
  return kAromaticOrganic.find(c) != std::string_view::npos;
}

struct RingOpen {
  uint32_t atom;
  std::optional<BondOrder> order;
  size_t position;
};

struct Parser {
  std::string_view s;
  size_t i = 0;
  MolGraph g;
  std::vector<uint32_t> branch_stack;
  int64_t prev = -1;
  std::optional<BondOrder> pending;
  size_t pending_pos = 0;
  std::map<int, RingOpen> open_rings;
  std::optional<SmilesError> err;

  bool fail(size_t pos, std::string message) {
    if (!err) err = SmilesError{pos, std::move(message)};
    return false;
  }

  bool attach(Atom atom, size_t pos) {
    uint32_t idx = g.add_atom(std::move(atom));
    if (prev >= 0) {
      uint32_t p = static_cast<uint32_t>(prev);
      bool both_aromatic = g.atom(p).aromatic && g.atom(idx).aromatic;
      BondOrder order =
          pending ? *pending
                  : (both_aromatic ? BondOrder::kAromatic : BondOrder::kSingle);
      if (order == BondOrder::kAromatic && !both_aromatic)
        return fail(pos, "aromatic bond between non-aromatic atoms");
      g.add_bond(p, idx, order);
    }
    prev = idx;
    pending.reset();
    return true;
  }

  bool ring_bond(int number, size_t pos) {
    if (prev < 0) return fail(pos, "ring closure before any atom");
    uint32_t here = static_cast<uint32_t>(prev);
    auto it = open_rings.find(number);
    if (it == open_rings.end()) {
      open_rings.emplace(number, RingOpen{here, pending, pos});
      pending.reset();
      return true;
    }
    RingOpen open = it->second;
    open_rings.erase(it);
    if (open.atom == here) return fail(pos, "ring bond to the same atom");
    std::optional<BondOrder> order = open.order;
    if (pending) {
      if (order && *order != *pending)
        return fail(pos, "conflicting bond orders on ring closure");
      order = pending;
    }
    bool both_aromatic = g.atom(open.atom).aromatic && g.atom(here).aromatic;
    if (!order)
      order = both_aromatic ? BondOrder::kAromatic : BondOrder::kSingle;
    if (*order == BondOrder::kAromatic && !both_aromatic)
      return fail(pos, "aromatic bond between non-aromatic atoms");
    if (g.bond_between(open.atom, here))
      return fail(pos, "duplicate bond between atoms");
    g.add_bond(open.atom, here, *order);
    pending.reset();
    return true;
  }

  bool set_pending(BondOrder order, size_t pos) {
    if (prev < 0) return fail(pos, "bond symbol before any atom");
    if (pending) return fail(pos, "two bond symbols in a row");
    pending = order;
    pending_pos = pos;
    return true;
  }

  bool bracket_atom();
  bool run();
};

bool Parser::bracket_atom() {
  size_t start = i;  // at '['
  size_t close = s.find(']', i + 1);
  if (close == std::string_view::npos)
    return fail(start, "unterminated bracket atom");
  std::string_view body = s.substr(i + 1, close - i - 1);
  if (body.empty()) return fail(start, "empty bracket atom");
  i = close;  // main loop advances past ']'

  Atom atom;
  size_t k = 0;
  auto bad = [&](std::string message) {
    return fail(start + 1 + k, std::move(message));
  };

  while (k < body.size() && std::isdigit(static_cast<uint8_t>(body[k]))) {
    atom.isotope = static_cast<int16_t>(atom.isotope * 10 + (body[k] - '0'));
    if (atom.isotope > 999) return bad("isotope out of range");
    ++k;
  }
  if (k >= body.size()) return bad("bracket atom has no element symbol");

  if (std::islower(static_cast<uint8_t>(body[k]))) {
    if (!is_aromatic_organic(body[k]))
      return bad("unknown atom symbol in bracket");
    atom.aromatic = true;
    atom.element = static_cast<char>(std::toupper(body[k]));
    ++k;
  } else if (std::isupper(static_cast<uint8_t>(body[k]))) {
    std::string sym(1, body[k]);
    ++k;
    // 'H' after a symbol is a hydrogen count, so only consume a lowercase
    // letter if the two-letter symbol is a known element.
    if (k < body.size() && std::islower(static_cast<uint8_t>(body[k])) &&
        known_element(sym + body[k])) {
      sym += body[k];
      ++k;
    }
    if (!known_element(sym)) return bad("unknown atom symbol in bracket");
    atom.element = sym;
  } else {
    return bad("bracket atom has no element symbol");
  }

  if (k < body.size() && body[k] == '@') {  // chirality, read and dropped
    ++k;
    if (k < body.size() && body[k] == '@') ++k;
  }

  if (k < body.size() && body[k] == 'H') {
    ++k;
    int count = -1;
    while (k < body.size() && std::isdigit(static_cast<uint8_t>(body[k]))) {
      count = (count < 0 ? 0 : count) * 10 + (body[k] - '0');
      if (count > 99) return bad("hydrogen count out of range");
      ++k;
    }
    atom.explicit_hydrogens = static_cast<int8_t>(count < 0 ? 1 : count);
  }

  if (k < body.size() && (body[k] == '+' || body[k] == '-')) {
    int sign = body[k] == '+' ? 1 : -1;
    char symbol = body[k];
    ++k;
    int magnitude = 1;
    if (k < body.size() && std::isdigit(static_cast<uint8_t>(body[k]))) {
      magnitude = 0;
      while (k < body.size() && std::isdigit(static_cast<uint8_t>(body[k]))) {
        magnitude = magnitude * 10 + (body[k] - '0');
        if (magnitude > 15) return bad("charge out of range");
        ++k;
      }
    } else {
      while (k < body.size() && body[k] == symbol) {
        ++magnitude;
        if (magnitude > 15) return bad("charge out of range");
        ++k;
      }
    }
    atom.charge = static_cast<int8_t>(sign * magnitude);
  }

  if (k < body.size() && body[k] == ':') {  // atom class, read and dropped
    ++k;
    if (k >= body.size() || !std::isdigit(static_cast<uint8_t>(body[k])))
      return bad("atom class needs digits");
    while (k < body.size() && std::isdigit(static_cast<uint8_t>(body[k]))) ++k;
  }

  if (k < body.size()) return bad("unexpected character in bracket atom");
  return attach(std::move(atom), start);
}

bool Parser::run() {
  if (s.empty()) return fail(0, "empty SMILES");
  while (i < s.size()) {
    char c = s[i];
    switch (c) {
      case '(':
        if (prev < 0) return fail(i, "branch opens before any atom");
        if (pending) return fail(i, "bond symbol before a branch");
        branch_stack.push_back(static_cast<uint32_t>(prev));
        break;
      case ')':
        if (pending) return fail(pending_pos, "dangling bond");
        if (branch_stack.empty())
          return fail(i, "unbalanced parentheses: unmatched ')'");
        prev = branch_stack.back();
        branch_stack.pop_back();
        break;
      case '-':
        if (!set_pending(BondOrder::kSingle, i)) return false;
        break;
      case '=':
        if (!set_pending(BondOrder::kDouble, i)) return false;
        break;
      case '#':
        if (!set_pending(BondOrder::kTriple, i)) return false;
        break;
      case ':':
        if (!set_pending(BondOrder::kAromatic, i)) return false;
        break;
      case '/':
      case '\\':
        // Directional bonds are accepted as plain single bonds.
        if (!set_pending(BondOrder::kSingle, i)) return false;
        break;
      case '%': {
        if (i + 2 >= s.size() ||
            !std::isdigit(static_cast<uint8_t>(s[i + 1])) ||
            !std::isdigit(static_cast<uint8_t>(s[i + 2])))
          return fail(i, "ring closure '%' needs two digits");
        int number = (s[i + 1] - '0') * 10 + (s[i + 2] - '0');
        if (!ring_bond(number, i)) return false;
        i += 2;
        break;
      }
      case '[':
        if (!bracket_atom()) return false;
        break;
      case '.':
        return fail(i, "dot disconnection is not supported");
      default: {
        if (std::isdigit(static_cast<uint8_t>(c))) {
          if (!ring_bond(c - '0', i)) return false;
          break;
        }
        if (c == 'C' || c == 'B') {
          char next = i + 1 < s.size() ? s[i + 1] : '\0';
          if ((c == 'C' && next == 'l') || (c == 'B' && next == 'r')) {
            if (!attach(Atom{.element = std::string(1, c) + next}, i))
              return false;
            ++i;
            break;
          }
        }
        if (c == 'B' || c == 'C' || c == 'N' || c == 'O' || c == 'P' ||
            c == 'S' || c == 'F' || c == 'I') {
          if (!attach(Atom{.element = std::string(1, c)}, i)) return false;
          break;
        }
        if (is_aromatic_organic(c)) {
          Atom atom{.element = std::string(1, static_cast<char>(
                                                  std::toupper(c)))};
          atom.aromatic = true;
          if (!attach(std::move(atom), i)) return false;
          break;
        }
        if (std::isalpha(static_cast<uint8_t>(c)))
          return fail(i, "unknown atom symbol");
        return fail(i, "unexpected character");
      }
    }
    ++i;
  }
  if (pending) return fail(pending_pos, "dangling bond");
  if (!branch_stack.empty())
    return fail(s.size(), "unbalanced parentheses: unclosed '('");
  if (!open_rings.empty())
    return fail(open_rings.begin()->second.position, "unclosed ring bond");
  return true;
}

}  // namespace

uint32_t MolGraph::add_atom(Atom atom) {
  atoms_.push_back(std::move(atom));
  adjacency_.emplace_back();
  return static_cast<uint32_t>(atoms_.size() - 1);
}

uint32_t MolGraph::add_bond(uint32_t a, uint32_t b, BondOrder order) {
  if (a == b) throw Error(Errc::kData, "self-bond");
  if (a >= atoms_.size() || b >= atoms_.size())
    throw Error(Errc::kData, "bond endpoint out of range");
  if (bond_between(a, b)) throw Error(Errc::kData, "duplicate bond");
  if (order == BondOrder::kAromatic &&
      !(atoms_[a].aromatic && atoms_[b].aromatic))
    throw Error(Errc::kData, "aromatic bond between non-aromatic atoms");
  uint32_t idx = static_cast<uint32_t>(bonds_.size());
  bonds_.push_back(Bond{a, b, order});
  adjacency_[a].emplace_back(b, idx);
  adjacency_[b].emplace_back(a, idx);
  return idx;
}

std::optional<uint32_t> MolGraph::bond_between(uint32_t a, uint32_t b) const {
  for (auto [nbr, bond] : adjacency_[a])
    if (nbr == b) return bond;
  return std::nullopt;
}

bool known_element(std::string_view symbol) {
  return std::find(kElements.begin(), kElements.end(), symbol) !=
         kElements.end();
}

Expected<MolGraph, SmilesError> parse_smiles(std::string_view smiles) {
  Parser p;
  p.s = smiles;
  if (p.run()) return std::move(p.g);
  return *p.err;
}

}  // namespace moltext
