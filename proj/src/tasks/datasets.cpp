//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moltext/io.hpp"
#include "moltext/tasks.hpp"

namespace moltext {

namespace {

[[noreturn]] void bad_row(const std::filesystem::path &path, size_t line,
                          const std::string &what) {
  throw Error(Errc::kData,
              path.string() + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<LabeledSmiles> load_labeled_smiles(
    const std::filesystem::path &path) {
  std::vector<LabeledSmiles> out;
  const std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string &line = lines[i];
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      bad_row(path, i + 1, "expected 'smiles<TAB>label'");
    }
    LabeledSmiles row;
    row.smiles = line.substr(0, tab);
    const std::string label = line.substr(tab + 1);
    if (row.smiles.empty()) bad_row(path, i + 1, "empty SMILES field");
    if (label == "0") {
      row.label = 0;
    } else if (label == "1") {
      row.label = 1;
    } else {
      bad_row(path, i + 1, "label must be 0 or 1");
    }
    out.push_back(std::move(row));
  }
  if (out.empty()) {
    throw Error(Errc::kData, "no examples in " + path.string());
  }
  return out;
}

std::vector<SmilesTextPair> load_smiles_text_pairs(
    const std::filesystem::path &path) {
  std::vector<SmilesTextPair> out;
  const std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string &line = lines[i];
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      bad_row(path, i + 1, "expected 'smiles<TAB>description'");
    }
    SmilesTextPair row;
    row.smiles = line.substr(0, tab);
    row.description = line.substr(tab + 1);
    if (row.smiles.empty()) bad_row(path, i + 1, "empty SMILES field");
    if (row.description.empty()) bad_row(path, i + 1, "empty description");
    out.push_back(std::move(row));
  }
  if (out.empty()) {
    throw Error(Errc::kData, "no examples in " + path.string());
  }
  return out;
}

}  // namespace moltext
