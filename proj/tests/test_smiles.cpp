//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>

#include "helpers.hpp"
#include "moltext/fingerprint.hpp"
#include "moltext/smiles.hpp"

using namespace moltext;
using testing::isomorphic;
using testing::permute_graph;
using testing::random_molecule;

namespace {

MolGraph mol(const std::string &smiles) {
  auto parsed = parse_smiles(smiles);
  REQUIRE_MESSAGE(parsed.ok(), smiles);
  return std::move(parsed).value();
}

std::string parse_error(const std::string &smiles) {
  auto parsed = parse_smiles(smiles);
  REQUIRE_FALSE(parsed.ok());
  return parsed.error().message;
}

}  // namespace

TEST_CASE("parse: linear and branched structures") {
  MolGraph methane = mol("C");
  CHECK(methane.atom_count() == 1);
  CHECK(methane.bond_count() == 0);
  CHECK(methane.atom(0).element == "C");
  CHECK(methane.atom(0).charge == 0);
  CHECK(methane.atom(0).isotope == 0);
  CHECK(methane.atom(0).explicit_hydrogens == -1);
  CHECK_FALSE(methane.atom(0).aromatic);

  MolGraph ethanol = mol("CCO");
  CHECK(ethanol.atom_count() == 3);
  CHECK(ethanol.bond_count() == 2);
  CHECK(ethanol.atom(2).element == "O");
  CHECK(ethanol.bond(0).order == BondOrder::kSingle);

  MolGraph isobutane = mol("CC(C)C");
  CHECK(isobutane.atom_count() == 4);
  CHECK(isobutane.degree(1) == 3);
  CHECK(isobutane.bond_between(1, 0).has_value());
  CHECK(isobutane.bond_between(1, 2).has_value());
  CHECK(isobutane.bond_between(1, 3).has_value());
  CHECK_FALSE(isobutane.bond_between(0, 2).has_value());

  CHECK(mol("C=C").bond(0).order == BondOrder::kDouble);
  CHECK(mol("C#N").bond(0).order == BondOrder::kTriple);
  CHECK(mol("C-C").bond(0).order == BondOrder::kSingle);
}

TEST_CASE("parse: rings") {
  MolGraph cyclopropane = mol("C1CC1");
  CHECK(cyclopropane.atom_count() == 3);
  CHECK(cyclopropane.bond_count() == 3);
  CHECK(cyclopropane.bond_between(0, 2).has_value());

  MolGraph hexane_pct = mol("C%12CCCCC%12");
  CHECK(hexane_pct.atom_count() == 6);
  CHECK(hexane_pct.bond_count() == 6);

  MolGraph ring_bond_order = mol("C=1CCCCC=1");
  CHECK(ring_bond_order.bond_between(0, 5).has_value());
  CHECK(ring_bond_order.bond(*ring_bond_order.bond_between(0, 5)).order ==
        BondOrder::kDouble);

  // Digit reuse after a closure is a fresh ring bond.
  MolGraph spiro = mol("C1CC1C1CC1");
  CHECK(spiro.atom_count() == 6);
  CHECK(spiro.bond_count() == 7);
}

TEST_CASE("parse: aromatic atoms and bonds") {
  MolGraph benzene = mol("c1ccccc1");
  CHECK(benzene.atom_count() == 6);
  CHECK(benzene.bond_count() == 6);
  for (uint32_t i = 0; i < 6; ++i) {
    CHECK(benzene.atom(i).aromatic);
    CHECK(benzene.atom(i).element == "C");
  }
  for (uint32_t i = 0; i < 6; ++i)
    CHECK(benzene.bond(i).order == BondOrder::kAromatic);

  // Unmarked bond between aromatic and plain atom is single.
  MolGraph toluene = mol("Cc1ccccc1");
  CHECK(toluene.bond(0).order == BondOrder::kSingle);

  // Explicit aromatic ring-closure bond.
  CHECK(mol("c:1ccccc:1").bond_count() == 6);

  CHECK(parse_error("C:C") == "aromatic bond between non-aromatic atoms");
  CHECK(parse_error("c1ccccc1:C") ==
        "aromatic bond between non-aromatic atoms");
}

TEST_CASE("parse: bracket atoms") {
  MolGraph ammonium = mol("[NH4+]");
  CHECK(ammonium.atom(0).element == "N");
  CHECK(ammonium.atom(0).explicit_hydrogens == 4);
  CHECK(ammonium.atom(0).charge == 1);

  MolGraph label = mol("[13CH3-]");
  CHECK(label.atom(0).isotope == 13);
  CHECK(label.atom(0).explicit_hydrogens == 3);
  CHECK(label.atom(0).charge == -1);

  CHECK(mol("[Cu++]").atom(0).charge == 2);
  CHECK(mol("[Fe+3]").atom(0).charge == 3);
  CHECK(mol("[O-2]").atom(0).charge == -2);
  CHECK(mol("[OH-]").atom(0).explicit_hydrogens == 1);
  CHECK(mol("[CH]").atom(0).explicit_hydrogens == 1);
  CHECK(mol("[C]").atom(0).explicit_hydrogens == -1);

  // Chirality marks and atom classes are read and dropped.
  MolGraph chiral = mol("[C@@H](F)(Cl)Br");
  CHECK(chiral.atom(0).explicit_hydrogens == 1);
  CHECK(chiral.atom_count() == 4);
  CHECK(mol("[CH3:7]").atom(0).explicit_hydrogens == 3);

  // Aromatic bracket atom.
  MolGraph pyrrole_n = mol("c1cc[nH]c1");
  CHECK(pyrrole_n.atom(3).aromatic);
  CHECK(pyrrole_n.atom(3).explicit_hydrogens == 1);
}

TEST_CASE("parse: directional bonds read as single") {
  MolGraph fluoroethene = mol("F/C=C/F");
  CHECK(fluoroethene.atom_count() == 4);
  CHECK(fluoroethene.bond(0).order == BondOrder::kSingle);
  CHECK(fluoroethene.bond(1).order == BondOrder::kDouble);
  CHECK(fluoroethene.bond(2).order == BondOrder::kSingle);
  CHECK(isomorphic(mol("F/C=C/F"), mol("F\\C=C\\F")));
}

TEST_CASE("parse: diagnostics") {
  CHECK(parse_error("") == "empty SMILES");
  CHECK(parse_error("C(C))C") == "unbalanced parentheses: unmatched ')'");
  CHECK(parse_error("C(C(C)") == "unbalanced parentheses: unclosed '('");
  CHECK(parse_error("C1CC") == "unclosed ring bond");
  CHECK(parse_error("X") == "unknown atom symbol");
  CHECK(parse_error("Xe") == "unknown atom symbol");
  CHECK(parse_error("[]") == "empty bracket atom");
  CHECK(parse_error("[Xx]") == "unknown atom symbol in bracket");
  CHECK(parse_error("[CH2") == "unterminated bracket atom");
  CHECK(parse_error("C=") == "dangling bond");
  CHECK(parse_error("C(=)O") == "dangling bond");
  CHECK(parse_error("=C") == "bond symbol before any atom");
  CHECK(parse_error("C==C") == "two bond symbols in a row");
  CHECK(parse_error("C11") == "ring bond to the same atom");
  CHECK(parse_error("C12CC12") == "duplicate bond between atoms");
  CHECK(parse_error("C=1CC-1") == "conflicting bond orders on ring closure");
  CHECK(parse_error("C.C") == "dot disconnection is not supported");
  CHECK(parse_error("C%1C") == "ring closure '%' needs two digits");
  CHECK(parse_error("(C)") == "branch opens before any atom");
  CHECK(parse_error("1CC1") == "ring closure before any atom");
  CHECK(parse_error("C?") == "unexpected character");

  CHECK(is_valid_smiles("CCO"));
  CHECK_FALSE(is_valid_smiles("CC("));
  CHECK_FALSE(is_valid_smiles(""));
}

TEST_CASE("canonical: same string for rewritings of one molecule") {
  CHECK(write_canonical(mol("OCC")) == write_canonical(mol("CCO")));
  CHECK(write_canonical(mol("C(F)(F)F")) == write_canonical(mol("FC(F)F")));
  CHECK(write_canonical(mol("c1ccccc1")) == write_canonical(mol("c1ccccc1")));
  CHECK(write_canonical(mol("C1=CC=CC=C1")) !=
        write_canonical(mol("c1ccccc1")));  // no aromaticity perception
  CHECK(write_canonical(mol("C")) == "C");
  CHECK(write_canonical(mol("[NH4+]")) == "[NH4+]");
}

TEST_CASE("canonical: permutation invariance on random molecules") {
  Rng rng(20260816);
  for (int trial = 0; trial < 120; ++trial) {
    MolGraph g = random_molecule(rng);
    std::string reference = write_canonical(g);
    for (int p = 0; p < 4; ++p) {
      MolGraph shuffled = permute_graph(g, rng);
      CHECK(write_canonical(shuffled) == reference);
    }
  }
}

TEST_CASE("canonical: output parses back to an isomorphic graph") {
  Rng rng(77);
  for (int trial = 0; trial < 120; ++trial) {
    MolGraph g = random_molecule(rng);
    std::string s = write_canonical(g);
    auto back = parse_smiles(s);
    REQUIRE_MESSAGE(back.ok(), s);
    CHECK_MESSAGE(isomorphic(g, back.value()), s);
  }
  for (const char *s :
       {"CC(=O)Oc1ccccc1C(=O)O", "[13CH3]c1ccccc1", "C1CC2CCC1CC2",
        "N#Cc1ccc(O)cc1", "[O-]C(=O)c1ccccc1[NH3+]", "FC(F)(F)S(=O)(=O)O"}) {
    MolGraph g = mol(s);
    auto back = parse_smiles(write_canonical(g));
    REQUIRE(back.ok());
    CHECK_MESSAGE(isomorphic(g, back.value()), s);
  }
}

TEST_CASE("scaffold: acyclic molecules collapse to the empty key") {
  CHECK(murcko_scaffold(mol("CCCC")).empty());
  CHECK(murcko_scaffold(mol("C")).empty());
  CHECK(scaffold_key(mol("CC(C)C(=O)O")) == "");
}

TEST_CASE("scaffold: rings and linkers survive") {
  CHECK(scaffold_key(mol("CCc1ccccc1")) == scaffold_key(mol("c1ccccc1")));
  CHECK(scaffold_key(mol("C1CC1")) == write_canonical(mol("C1CC1")));

  // Two rings joined by a chain keep the chain.
  MolGraph bridged = murcko_scaffold(mol("CC1CC1CCC1CC1C"));
  CHECK(bridged.atom_count() == 8);

  // Idempotent.
  MolGraph once = murcko_scaffold(mol("CCc1ccc(CC2CC2)cc1"));
  MolGraph twice = murcko_scaffold(once);
  CHECK(isomorphic(once, twice));
}

TEST_CASE("fingerprint: radius zero sets the per-atom invariant bits") {
  MolGraph g = mol("CO");
  Fingerprint fp = circular_fingerprint(g, 0, 2048);

  // Recompute the documented invariant recipe by hand for both atoms.
  auto expect_bit = [&](const char *element, uint64_t degree) {
    uint64_t words[] = {fnv1a64(element), 0, 100, 0, 0, degree};
    return static_cast<uint32_t>(hash_u64_span(words, kFingerprintSeed)) &
           (fp.width - 1);
  };
  std::set<uint32_t> expected = {expect_bit("C", 1), expect_bit("O", 1)};
  std::vector<uint32_t> got = fp.bits();
  CHECK(std::set<uint32_t>(got.begin(), got.end()) == expected);
  CHECK(circular_atom_invariant(g, 0) != circular_atom_invariant(g, 1));
}

TEST_CASE("fingerprint: environment growth separates molecules") {
  Fingerprint a = circular_fingerprint(mol("CCO"));
  Fingerprint b = circular_fingerprint(mol("CCC"));
  Fingerprint a2 = circular_fingerprint(mol("CCO"));
  CHECK(a.words == a2.words);
  CHECK(a.words != b.words);
  CHECK(tanimoto(a, a2) == 1.0);
  CHECK(tanimoto(a, b) < 1.0);

  // The same graph parsed from different writings fingerprints identically.
  CHECK(circular_fingerprint(mol("OCC")).words ==
        circular_fingerprint(mol("CCO")).words);
}

TEST_CASE("fingerprint: path enumeration") {
  CHECK(path_fingerprint(mol("C"), 7, 2048).bits().empty());
  CHECK(path_fingerprint(mol("CC"), 7, 2048).bits().size() == 1);
  // "OCO": O-C twice (same canonical string) and O-C-O once.
  CHECK(path_fingerprint(mol("OCO"), 7, 2048).bits().size() == 2);
  // Direction independence on an asymmetric molecule.
  CHECK(path_fingerprint(mol("NCO"), 7, 2048).words ==
        path_fingerprint(mol("OCN"), 7, 2048).words);
}

TEST_CASE("tanimoto: hand values and the brute-force oracle") {
  auto manual = [](std::initializer_list<uint32_t> bits) {
    Fingerprint fp{FingerprintKind::kCircular, 64, 2,
                   std::vector<uint64_t>(1, 0)};
    for (uint32_t b : bits) fp.set(b);
    return fp;
  };
  CHECK(tanimoto(manual({1, 2, 3}), manual({2, 3, 4})) == 0.5);
  CHECK(tanimoto(manual({}), manual({})) == 1.0);
  CHECK(tanimoto(manual({1}), manual({})) == 0.0);

  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Fingerprint a{FingerprintKind::kPath, 256, 7, std::vector<uint64_t>(4, 0)};
    Fingerprint b = a;
    for (int k = 0; k < 40; ++k) {
      a.set(rng.next_u64());
      b.set(rng.next_u64());
    }
    int64_t both = 0, any = 0;
    for (uint32_t bit = 0; bit < 256; ++bit) {
      both += a.test(bit) && b.test(bit);
      any += a.test(bit) || b.test(bit);
    }
    double expected = any == 0 ? 1.0 : static_cast<double>(both) / any;
    CHECK(tanimoto(a, b) == expected);
    CHECK(tanimoto(b, a) == tanimoto(a, b));
  }
}

TEST_CASE("tanimoto: incompatible fingerprints are rejected") {
  Fingerprint a = circular_fingerprint(mol("CC"));
  Fingerprint b = path_fingerprint(mol("CC"));
  CHECK_THROWS_AS(tanimoto(a, b), Error);
  Fingerprint c = circular_fingerprint(mol("CC"), 2, 1024);
  CHECK_THROWS_AS(tanimoto(a, c), Error);
  CHECK_THROWS_AS(circular_fingerprint(mol("CC"), 2, 100), Error);
}
