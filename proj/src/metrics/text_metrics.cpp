//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "moltext/error.hpp"
#include "moltext/metrics.hpp"

namespace moltext {

namespace {

std::vector<std::string> whitespace_tokens(const std::string &text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

void check_corpus(std::span<const std::string> candidates,
                  std::span<const std::string> references) {
  if (candidates.size() != references.size()) {
    throw Error(Errc::kConfig, "candidate and reference counts differ");
  }
  if (candidates.empty()) {
    throw Error(Errc::kData, "empty evaluation corpus");
  }
}

// n-gram counts keyed by the joined token span.
std::map<std::string, int64_t> ngram_counts(
    const std::vector<std::string> &tokens, size_t n) {
  std::map<std::string, int64_t> counts;
  if (tokens.size() < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (size_t j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

int64_t clipped_overlap(const std::map<std::string, int64_t> &candidate,
                        const std::map<std::string, int64_t> &reference) {
  int64_t overlap = 0;
  for (const auto &[key, count] : candidate) {
    const auto it = reference.find(key);
    if (it != reference.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

double f1(double precision, double recall) {
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

// F1 of the clipped n-gram overlap for one pair; identical empties count 1.
double overlap_f1(const std::vector<std::string> &cand,
                  const std::vector<std::string> &ref, size_t n) {
  const auto cand_counts = ngram_counts(cand, n);
  const auto ref_counts = ngram_counts(ref, n);
  if (cand_counts.empty() && ref_counts.empty()) return 1.0;
  if (cand_counts.empty() || ref_counts.empty()) return 0.0;
  const double overlap =
      static_cast<double>(clipped_overlap(cand_counts, ref_counts));
  int64_t cand_total = 0;
  for (const auto &[key, count] : cand_counts) cand_total += count;
  int64_t ref_total = 0;
  for (const auto &[key, count] : ref_counts) ref_total += count;
  return f1(overlap / cand_total, overlap / ref_total);
}

int64_t lcs_length(const std::vector<std::string> &a,
                   const std::vector<std::string> &b) {
  std::vector<int64_t> prev(b.size() + 1, 0);
  std::vector<int64_t> curr(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                     : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

}  // namespace

double bleu_n(std::span<const std::string> candidates,
              std::span<const std::string> references, int n, bool smooth) {
  check_corpus(candidates, references);
  if (n < 1) {
    throw Error(Errc::kConfig, "bleu order must be at least 1");
  }

  std::vector<int64_t> matches(n, 0);
  std::vector<int64_t> totals(n, 0);
  int64_t cand_len = 0;
  int64_t ref_len = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const auto cand = whitespace_tokens(candidates[i]);
    const auto ref = whitespace_tokens(references[i]);
    cand_len += static_cast<int64_t>(cand.size());
    ref_len += static_cast<int64_t>(ref.size());
    for (int k = 1; k <= n; ++k) {
      const auto cand_counts = ngram_counts(cand, k);
      const auto ref_counts = ngram_counts(ref, k);
      matches[k - 1] += clipped_overlap(cand_counts, ref_counts);
      for (const auto &[key, count] : cand_counts) totals[k - 1] += count;
    }
  }
  if (cand_len == 0) return 0.0;

  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    double m = static_cast<double>(matches[k]);
    double t = static_cast<double>(totals[k]);
    if (smooth && k > 0) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0 || t == 0.0) return 0.0;
    log_sum += std::log(m / t) / n;
  }
  const double brevity =
      cand_len >= ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref_len) / cand_len);
  return brevity * std::exp(log_sum);
}

RougeScores rouge_scores(std::span<const std::string> candidates,
                         std::span<const std::string> references) {
  check_corpus(candidates, references);
  RougeScores sums;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const auto cand = whitespace_tokens(candidates[i]);
    const auto ref = whitespace_tokens(references[i]);
    sums.rouge1 += overlap_f1(cand, ref, 1);
    sums.rouge2 += overlap_f1(cand, ref, 2);
    if (cand.empty() && ref.empty()) {
      sums.rougeL += 1.0;
    } else if (!cand.empty() && !ref.empty()) {
      const double lcs = static_cast<double>(lcs_length(cand, ref));
      sums.rougeL += f1(lcs / cand.size(), lcs / ref.size());
    }
  }
  const double pairs = static_cast<double>(candidates.size());
  return {sums.rouge1 / pairs, sums.rouge2 / pairs, sums.rougeL / pairs};
}

double meteor_simplified(std::span<const std::string> candidates,
                         std::span<const std::string> references) {
  check_corpus(candidates, references);
  double sum = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const auto cand = whitespace_tokens(candidates[i]);
    const auto ref = whitespace_tokens(references[i]);
    if (cand.empty() && ref.empty()) {
      sum += 1.0;
      continue;
    }
    if (cand.empty() || ref.empty()) continue;

    // One-to-one exact alignment, preferring the reference position that
    // extends the previous match before falling back to the leftmost free
    // occurrence.  The match count always reaches the clipped maximum.
    std::vector<bool> used(ref.size(), false);
    std::vector<int64_t> aligned_to(cand.size(), -1);
    int64_t prev_ref = -2;
    for (size_t c = 0; c < cand.size(); ++c) {
      int64_t pick = -1;
      const size_t next = static_cast<size_t>(prev_ref + 1);
      if (prev_ref + 1 >= 0 && next < ref.size() && !used[next] &&
          ref[next] == cand[c]) {
        pick = prev_ref + 1;
      } else {
        for (size_t r = 0; r < ref.size(); ++r) {
          if (!used[r] && ref[r] == cand[c]) {
            pick = static_cast<int64_t>(r);
            break;
          }
        }
      }
      if (pick >= 0) {
        used[static_cast<size_t>(pick)] = true;
        aligned_to[c] = pick;
      }
      prev_ref = pick >= 0 ? pick : -2;
    }

    int64_t m = 0;
    int64_t chunks = 0;
    prev_ref = -2;
    for (size_t c = 0; c < cand.size(); ++c) {
      if (aligned_to[c] < 0) {
        prev_ref = -2;
        continue;
      }
      ++m;
      if (aligned_to[c] != prev_ref + 1) ++chunks;
      prev_ref = aligned_to[c];
    }
    if (m == 0) continue;

    const double precision = static_cast<double>(m) / cand.size();
    const double recall = static_cast<double>(m) / ref.size();
    const double f = precision * recall / (0.9 * precision + 0.1 * recall);
    const double frag = static_cast<double>(chunks) / static_cast<double>(m);
    const double penalty = chunks <= 1 ? 0.0 : 0.5 * frag * frag * frag;
    sum += f * (1.0 - penalty);
  }
  return sum / static_cast<double>(candidates.size());
}

std::map<std::string, double> text_generation_metrics(
    std::span<const std::string> candidates,
    std::span<const std::string> references, bool smooth_bleu) {
  const RougeScores rouge = rouge_scores(candidates, references);
  return {
      {"bleu2", bleu_n(candidates, references, 2, smooth_bleu)},
      {"bleu4", bleu_n(candidates, references, 4, smooth_bleu)},
      {"rouge1", rouge.rouge1},
      {"rouge2", rouge.rouge2},
      {"rougeL", rouge.rougeL},
      {"meteor_simplified", meteor_simplified(candidates, references)},
  };
}

}  // namespace moltext
