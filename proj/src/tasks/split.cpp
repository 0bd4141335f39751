//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <map>

#include "moltext/smiles.hpp"
#include "moltext/tasks.hpp"

namespace moltext {

ScaffoldSplit scaffold_split(std::span<const std::string> smiles,
                             double frac_train, double frac_valid,
                             double frac_test) {
  if (frac_train < 0 || frac_valid < 0 || frac_test < 0 ||
      std::abs(frac_train + frac_valid + frac_test - 1.0) > 1e-9) {
    throw Error(Errc::kConfig, "split fractions must be >= 0 and sum to 1");
  }
  if (smiles.empty()) {
    throw Error(Errc::kData, "scaffold_split needs at least one molecule");
  }

  std::map<std::string, std::vector<int64_t>> groups;
  for (size_t i = 0; i < smiles.size(); ++i) {
    auto parsed = parse_smiles(smiles[i]);
    if (!parsed.ok()) {
      throw Error(Errc::kData, "molecule " + std::to_string(i) +
                                   " does not parse: " +
                                   parsed.error().message);
    }
    groups[scaffold_key(parsed.value())].push_back(
        static_cast<int64_t>(i));
  }

  std::vector<std::pair<std::string, std::vector<int64_t>>> ordered(
      groups.begin(), groups.end());
  std::sort(ordered.begin(), ordered.end(), [](const auto &a, const auto &b) {
    if (a.second.size() != b.second.size()) {
      return a.second.size() > b.second.size();
    }
    return a.first < b.first;
  });

  const auto n = static_cast<double>(smiles.size());
  const auto train_quota = static_cast<size_t>(std::llround(frac_train * n));
  const auto valid_quota = static_cast<size_t>(std::llround(frac_valid * n));

  ScaffoldSplit split;
  for (const auto &[key, members] : ordered) {
    std::vector<int64_t> *dest;
    if (split.train.size() < train_quota) {
      dest = &split.train;
    } else if (split.valid.size() < valid_quota) {
      dest = &split.valid;
    } else {
      dest = &split.test;
    }
    dest->insert(dest->end(), members.begin(), members.end());
  }
  return split;
}

}  // namespace moltext
