//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <iomanip>
#include <sstream>
#include <vector>

#include "json.hpp"
#include "moltext/metrics.hpp"

namespace moltext {

namespace {

constexpr const char *kMolToTextColumns[] = {"bleu2",  "bleu4",
                                             "rouge1", "rouge2",
                                             "rougeL", "meteor_simplified"};
constexpr const char *kTextToMolColumns[] = {"exact", "morgan_sim",
                                             "path_sim", "validity"};

std::string column_label(const std::string &key) {
  if (key == "meteor_simplified") return "METEOR (simplified)";
  if (key == "bleu2") return "BLEU-2";
  if (key == "bleu4") return "BLEU-4";
  if (key == "rouge1") return "ROUGE-1";
  if (key == "rouge2") return "ROUGE-2";
  if (key == "rougeL") return "ROUGE-L";
  if (key == "morgan_sim") return "Morgan sim";
  if (key == "path_sim") return "Path sim";
  if (key == "exact") return "Exact";
  if (key == "validity") return "Validity";
  return key;
}

void append_section(std::ostringstream &out, const std::string &title,
                    const std::map<std::string, double> &values,
                    std::span<const char *const> columns, int64_t pairs) {
  out << title << " (" << pairs << " pairs)\n";
  std::ostringstream head;
  std::ostringstream row;
  for (const char *key : columns) {
    const auto it = values.find(key);
    const std::string label = column_label(key);
    const int width = static_cast<int>(label.size()) + 2;
    head << std::setw(width) << label;
    row << std::setw(width) << std::fixed << std::setprecision(4)
        << (it == values.end() ? 0.0 : it->second);
  }
  out << head.str() << '\n' << row.str() << '\n';
}

}  // namespace

std::string report_table(const TranslationReport &report) {
  std::ostringstream out;
  out << "Translation metrics (METEOR simplified: exact match only)\n";
  if (!report.mol_to_text.empty()) {
    append_section(out, "molecule -> text", report.mol_to_text,
                   kMolToTextColumns, report.mol_to_text_pairs);
  }
  if (!report.text_to_mol.empty()) {
    append_section(out, "text -> molecule", report.text_to_mol,
                   kTextToMolColumns, report.text_to_mol_pairs);
  }
  return out.str();
}

std::string report_json(const TranslationReport &report) {
  nlohmann::ordered_json doc;
  doc["note"] = "METEOR is simplified: exact token matches only";
  if (!report.mol_to_text.empty()) {
    doc["molecule_to_text"] = report.mol_to_text;
    doc["molecule_to_text"]["pairs"] = report.mol_to_text_pairs;
  }
  if (!report.text_to_mol.empty()) {
    doc["text_to_molecule"] = report.text_to_mol;
    doc["text_to_molecule"]["pairs"] = report.text_to_mol_pairs;
  }
  return doc.dump(2) + "\n";
}

}  // namespace moltext
