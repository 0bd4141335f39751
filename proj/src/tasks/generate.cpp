//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>

#include "moltext/tasks.hpp"

namespace moltext {

namespace {

// Log softmax of one logit against the whole row, in double.
double log_prob_of(std::span<const float> row, int32_t id) {
  double max_val = row[0];
  for (float v : row) max_val = std::max(max_val, double(v));
  double sum = 0.0;
  for (float v : row) sum += std::exp(double(v) - max_val);
  return double(row[id]) - max_val - std::log(sum);
}

int32_t pick_greedy(std::span<const float> row) {
  int32_t best = 0;
  for (int32_t j = 1; j < static_cast<int32_t>(row.size()); ++j) {
    if (row[j] > row[best]) best = j;  // ties keep the lowest id
  }
  return best;
}

int32_t pick_top_k(std::span<const float> row, int32_t k, Rng &rng) {
  std::vector<std::pair<float, int32_t>> entries;
  entries.reserve(row.size());
  for (int32_t j = 0; j < static_cast<int32_t>(row.size()); ++j) {
    entries.emplace_back(row[j], j);
  }
  const auto keep = static_cast<size_t>(
      std::min<int32_t>(k, static_cast<int32_t>(row.size())));
  std::partial_sort(entries.begin(), entries.begin() + keep, entries.end(),
                    [](const auto &a, const auto &b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  double max_val = entries[0].first;
  std::vector<double> weights(keep);
  double total = 0.0;
  for (size_t i = 0; i < keep; ++i) {
    weights[i] = std::exp(double(entries[i].first) - max_val);
    total += weights[i];
  }
  const double u = rng.next_double() * total;
  double cum = 0.0;
  for (size_t i = 0; i < keep; ++i) {
    cum += weights[i];
    if (u < cum) return entries[i].second;
  }
  return entries[keep - 1].second;
}

}  // namespace

Generation generate(Gpt<float> &model, std::span<const int32_t> prompt,
                    const GenerateOptions &options) {
  const int64_t context = model.config().context_len;
  const int32_t vocab = model.config().vocab_size;
  if (prompt.empty()) {
    throw Error(Errc::kConfig, "empty generation prompt");
  }
  if (static_cast<int64_t>(prompt.size()) >= context) {
    throw Error(Errc::kConfig, "prompt does not fit the model context");
  }
  if (!options.greedy && options.top_k <= 0) {
    throw Error(Errc::kConfig, "top_k must be positive for sampling");
  }
  if (options.max_new_tokens < 0) {
    throw Error(Errc::kConfig, "max_new_tokens must be >= 0");
  }

  Rng rng(options.seed);
  std::vector<int32_t> window(prompt.begin(), prompt.end());
  Generation result;
  for (int64_t step = 0; step < options.max_new_tokens; ++step) {
    if (static_cast<int64_t>(window.size()) >= context) break;
    auto logits =
        model.forward(window, 1, static_cast<int64_t>(window.size()));
    std::span<const float> row =
        logits.subspan((window.size() - 1) * vocab, vocab);
    const int32_t next =
        options.greedy ? pick_greedy(row) : pick_top_k(row, options.top_k, rng);
    result.log_prob += log_prob_of(row, next);
    if (std::find(options.stop_tokens.begin(), options.stop_tokens.end(),
                  next) != options.stop_tokens.end()) {
      result.stopped = true;
      break;
    }
    result.tokens.push_back(next);
    window.push_back(next);
  }
  return result;
}

std::vector<Generation> generate_k(Gpt<float> &model,
                                   std::span<const int32_t> prompt,
                                   const GenerateOptions &options, int64_t k) {
  if (k < 1) {
    throw Error(Errc::kConfig, "generate_k needs k >= 1");
  }
  std::vector<Generation> out;
  out.reserve(static_cast<size_t>(k));
  for (int64_t i = 0; i < k; ++i) {
    GenerateOptions per = options;
    per.seed = derive_seed(options.seed, 5, static_cast<uint64_t>(i));
    out.push_back(generate(model, prompt, per));
  }
  return out;
}

}  // namespace moltext
