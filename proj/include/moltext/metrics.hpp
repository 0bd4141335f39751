//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_METRICS_HPP_
#define MOLTEXT_METRICS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "moltext/fingerprint.hpp"

namespace moltext {

// Corpus BLEU over whitespace tokens: modified n-gram precision with uniform
// weights over orders 1..n and the usual brevity penalty.  Any order with
// zero matches makes the score 0 unless `smooth` adds one to the numerator
// and denominator of every order above 1.
double bleu_n(std::span<const std::string> candidates,
              std::span<const std::string> references, int n,
              bool smooth = false);

struct RougeScores {
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
};

// Per-pair F1 of unigram overlap, bigram overlap, and longest common
// subsequence, averaged over the corpus.
RougeScores rouge_scores(std::span<const std::string> candidates,
                         std::span<const std::string> references);

// Exact-match METEOR without stemming or synonym tables.  Unigrams align
// one-to-one (greedy left to right, preferring the alignment that continues
// the previous match); F = PR / (0.9P + 0.1R) scaled by a fragmentation
// penalty 0.5 * (chunks / matches)^3.  A single chunk is unfragmented and
// carries no penalty.  Scores average over pairs.
double meteor_simplified(std::span<const std::string> candidates,
                         std::span<const std::string> references);

struct MoleculeReport {
  double exact = 0.0;       // canonical-form equality, not string equality
  double validity = 0.0;    // fraction of generations that parse
  double morgan_sim = 0.0;  // mean circular-fingerprint Tanimoto
  double path_sim = 0.0;    // mean path-fingerprint Tanimoto
  int64_t pairs = 0;
};

// Generated-vs-reference SMILES.  References must parse; an invalid
// generation counts as non-matching, invalid, and zero-similarity rather
// than being dropped, so the means cannot be gamed by emitting garbage.
MoleculeReport molecule_metrics(std::span<const std::string> generated,
                                std::span<const std::string> references);

// Best fingerprint similarity any candidate achieves against the reference.
// Invalid candidates contribute 0; the reference must parse.
double topk_similarity(std::span<const std::string> candidates,
                       const std::string &reference, FingerprintKind kind);

// The six text metrics reported for molecule-to-text generation, keyed
// bleu2, bleu4, rouge1, rouge2, rougeL, meteor_simplified.
std::map<std::string, double> text_generation_metrics(
    std::span<const std::string> candidates,
    std::span<const std::string> references, bool smooth_bleu = false);

struct TranslationReport {
  // Either side may be empty when only one direction was evaluated.
  std::map<std::string, double> mol_to_text;
  std::map<std::string, double> text_to_mol;
  int64_t mol_to_text_pairs = 0;
  int64_t text_to_mol_pairs = 0;
};

// Fixed-width console table; the METEOR column is labeled "(simplified)".
std::string report_table(const TranslationReport &report);

// The same report as pretty-printed JSON for the report file.
std::string report_json(const TranslationReport &report);

}  // namespace moltext

#endif  // MOLTEXT_METRICS_HPP_
