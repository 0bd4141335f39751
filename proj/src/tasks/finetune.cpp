//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <numeric>

#include "moltext/tasks.hpp"

namespace moltext {

namespace {

// Pads blocks to one length and shifts them into a batch; weight_at decides
// the loss weight from (example index, target position in the block).
template <class Example, class WeightFn>
Batch build_batch(std::span<const Example> examples, WeightFn weight_at) {
  if (examples.empty()) {
    throw Error(Errc::kConfig, "empty example set");
  }
  size_t max_len = 0;
  for (const auto &ex : examples) {
    if (ex.ids.size() < 2) {
      throw Error(Errc::kConfig, "example needs at least two tokens");
    }
    max_len = std::max(max_len, ex.ids.size());
  }
  Batch batch;
  batch.batch = static_cast<int64_t>(examples.size());
  batch.time = static_cast<int64_t>(max_len) - 1;
  const auto pad = static_cast<int32_t>(Vocab::kPad);
  for (size_t e = 0; e < examples.size(); ++e) {
    const auto &ids = examples[e].ids;
    const int64_t len = static_cast<int64_t>(ids.size());
    for (int64_t j = 0; j + 1 < static_cast<int64_t>(max_len); ++j) {
      batch.ids.push_back(j < len ? ids[j] : pad);
      const int64_t target_pos = j + 1;
      batch.targets.push_back(target_pos < len ? ids[target_pos] : pad);
      batch.weights.push_back(target_pos < len ? weight_at(e, target_pos)
                                               : 0.0f);
    }
  }
  return batch;
}

template <class Example, class BatchFn>
FinetuneResult finetune_loop(Gpt<float> &model, AdamState<float> &opt,
                             std::span<const Example> examples,
                             const FinetuneOptions &options,
                             BatchFn make_batch) {
  if (examples.empty()) {
    throw Error(Errc::kConfig, "empty example set");
  }
  if (options.epochs <= 0 || options.batch_size <= 0 ||
      options.learning_rate <= 0) {
    throw Error(Errc::kConfig,
                "finetune needs positive epochs, batch size and rate");
  }
  if (options.deterministic) set_deterministic_compute();
  // Dropout draws come from a seeded stream, so it stays reproducible even
  // in deterministic mode.
  const bool use_dropout = model.config().dropout > 0.0;

  AdamHyper hyper;
  FinetuneResult result;
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  uint64_t update = 0;
  for (int64_t epoch = 0; epoch < options.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(options.seed, 4, epoch));
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);
    }
    double epoch_loss = 0.0;
    int64_t updates_this_epoch = 0;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(options.batch_size)) {
      const size_t end = std::min(
          order.size(), start + static_cast<size_t>(options.batch_size));
      std::vector<Example> slice;
      slice.reserve(end - start);
      for (size_t i = start; i < end; ++i) slice.push_back(examples[order[i]]);
      const Batch batch = make_batch(std::span<const Example>(slice));
      Rng dropout_rng(derive_seed(options.seed, 2, ++update));
      epoch_loss += train_update(model, opt, std::span(&batch, 1),
                                 options.learning_rate, hyper, use_dropout,
                                 use_dropout ? &dropout_rng : nullptr);
      ++updates_this_epoch;
    }
    result.epoch_losses.push_back(epoch_loss / updates_this_epoch);
  }
  result.final_loss = result.epoch_losses.back();
  return result;
}

}  // namespace

Batch make_finetune_batch(std::span<const FinetuneExample> examples,
                          FinetuneObjective objective) {
  return build_batch(examples, [&](size_t e, int64_t target_pos) -> float {
    const int64_t len = static_cast<int64_t>(examples[e].ids.size());
    if (objective == FinetuneObjective::kTagsOnly) {
      return target_pos == len - 1 ? 1.0f : 0.0f;
    }
    // Every position of sequence i carries 1/T_i, so a sequence contributes
    // its own mean and the batch divides by the number of sequences.
    return static_cast<float>(1.0 / static_cast<double>(len - 1));
  });
}

Batch make_completion_batch(std::span<const TranslationExample> examples) {
  for (const auto &ex : examples) {
    const int64_t len = static_cast<int64_t>(ex.ids.size());
    if (ex.completion_start < 1 || ex.completion_start >= len) {
      throw Error(Errc::kConfig, "completion_start out of range");
    }
  }
  return build_batch(examples, [&](size_t e, int64_t target_pos) -> float {
    const auto &ex = examples[e];
    if (target_pos < ex.completion_start) return 0.0f;
    const int64_t completion_len =
        static_cast<int64_t>(ex.ids.size()) - ex.completion_start;
    return static_cast<float>(1.0 / static_cast<double>(completion_len));
  });
}

FinetuneResult finetune(Gpt<float> &model, AdamState<float> &opt,
                        std::span<const FinetuneExample> examples,
                        const FinetuneOptions &options) {
  return finetune_loop(model, opt, examples, options,
                       [&](std::span<const FinetuneExample> slice) {
                         return make_finetune_batch(slice, options.objective);
                       });
}

FinetuneResult finetune_translation(Gpt<float> &model, AdamState<float> &opt,
                                    std::span<const TranslationExample> examples,
                                    const FinetuneOptions &options) {
  return finetune_loop(model, opt, examples, options,
                       [&](std::span<const TranslationExample> slice) {
                         return make_completion_batch(slice);
                       });
}

TagProbabilities classify_prompt(Gpt<float> &model,
                                 std::span<const int32_t> prompt_ids,
                                 int32_t positive_tag, int32_t negative_tag) {
  if (prompt_ids.empty()) {
    throw Error(Errc::kConfig, "empty classification prompt");
  }
  const int32_t vocab = model.config().vocab_size;
  if (positive_tag < 0 || positive_tag >= vocab || negative_tag < 0 ||
      negative_tag >= vocab || positive_tag == negative_tag) {
    throw Error(Errc::kConfig, "classification tags must be two vocab ids");
  }
  const auto time = static_cast<int64_t>(prompt_ids.size());
  auto logits = model.forward(prompt_ids, 1, time);
  const auto *last = logits.data() + (time - 1) * vocab;
  const double delta = double(last[positive_tag]) - double(last[negative_tag]);
  // p_pos / (p_pos + p_neg) reduces to a sigmoid of the logit gap, which is
  // invariant to shifting both logits; the complement is exact.
  const double positive = 1.0 / (1.0 + std::exp(-delta));
  return {positive, 1.0 - positive};
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(Errc::kConfig, "scores and labels differ in length");
  }
  if (scores.empty()) {
    throw Error(Errc::kData, "roc_auc needs at least one example");
  }
  uint64_t positives = 0;
  uint64_t negatives = 0;
  for (int label : labels) {
    if (label == 1) {
      ++positives;
    } else if (label == 0) {
      ++negatives;
    } else {
      throw Error(Errc::kData, "labels must be 0 or 1");
    }
  }
  if (positives == 0 || negatives == 0) {
    throw Error(Errc::kData, "roc_auc needs both classes present");
  }

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Twice the Mann-Whitney U statistic, accumulated in integers: a positive
  // beating a negative counts 2, a tie counts 1.
  uint64_t twice_u = 0;
  uint64_t negatives_below = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    uint64_t pos_in_group = 0;
    uint64_t neg_in_group = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (labels[order[j]] == 1) {
        ++pos_in_group;
      } else {
        ++neg_in_group;
      }
      ++j;
    }
    twice_u += pos_in_group * (2 * negatives_below + neg_in_group);
    negatives_below += neg_in_group;
    i = j;
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(positives) *
          static_cast<double>(negatives));
}

}  // namespace moltext
