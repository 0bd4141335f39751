//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <string>

#include "moltext/error.hpp"
#include "moltext/metrics.hpp"
#include "moltext/smiles.hpp"

namespace moltext {

namespace {

Fingerprint make_fingerprint(const MolGraph &g, FingerprintKind kind) {
  return kind == FingerprintKind::kCircular ? circular_fingerprint(g)
                                            : path_fingerprint(g);
}

MolGraph parse_reference(const std::string &smiles, size_t index) {
  auto mol = parse_smiles(smiles);
  if (!mol.ok()) {
    throw Error(Errc::kData, "reference " + std::to_string(index) +
                                 " does not parse: " + mol.error().message);
  }
  return std::move(mol.value());
}

}  // namespace

MoleculeReport molecule_metrics(std::span<const std::string> generated,
                                std::span<const std::string> references) {
  if (generated.size() != references.size()) {
    throw Error(Errc::kConfig, "generated and reference counts differ");
  }
  if (generated.empty()) {
    throw Error(Errc::kData, "empty evaluation corpus");
  }

  MoleculeReport report;
  report.pairs = static_cast<int64_t>(generated.size());
  double exact = 0.0;
  double valid = 0.0;
  double morgan = 0.0;
  double path = 0.0;
  for (size_t i = 0; i < generated.size(); ++i) {
    const MolGraph ref = parse_reference(references[i], i);
    auto gen = parse_smiles(generated[i]);
    if (!gen.ok()) continue;  // counts as invalid, non-matching, similarity 0
    valid += 1.0;
    if (write_canonical(gen.value()) == write_canonical(ref)) exact += 1.0;
    morgan += tanimoto(circular_fingerprint(gen.value()),
                       circular_fingerprint(ref));
    path += tanimoto(path_fingerprint(gen.value()), path_fingerprint(ref));
  }
  const double pairs = static_cast<double>(report.pairs);
  report.exact = exact / pairs;
  report.validity = valid / pairs;
  report.morgan_sim = morgan / pairs;
  report.path_sim = path / pairs;
  return report;
}

double topk_similarity(std::span<const std::string> candidates,
                       const std::string &reference, FingerprintKind kind) {
  if (candidates.empty()) {
    throw Error(Errc::kConfig, "topk_similarity needs at least one candidate");
  }
  auto ref = parse_smiles(reference);
  if (!ref.ok()) {
    throw Error(Errc::kData,
                "reference does not parse: " + ref.error().message);
  }
  const Fingerprint ref_fp = make_fingerprint(ref.value(), kind);
  double best = 0.0;
  for (const auto &candidate : candidates) {
    auto mol = parse_smiles(candidate);
    if (!mol.ok()) continue;  // an invalid candidate scores 0
    best = std::max(best, tanimoto(make_fingerprint(mol.value(), kind),
                                   ref_fp));
  }
  return best;
}

}  // namespace moltext
