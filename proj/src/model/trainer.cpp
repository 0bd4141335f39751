//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <fstream>
#include <functional>

#include "moltext/model.hpp"
#include "moltext/vocab.hpp"

namespace moltext {

void append_block_to_batch(Batch &batch, const std::vector<int32_t> &block) {
  const int64_t len = static_cast<int64_t>(block.size());
  if (len < 2) {
    throw Error(Errc::kConfig, "training block needs at least two tokens");
  }
  const int64_t time = len - 1;
  if (batch.batch == 0) {
    batch.time = time;
  } else if (batch.time != time) {
    throw Error(Errc::kConfig, "training blocks must share one length");
  }
  const auto pad = static_cast<int32_t>(Vocab::kPad);
  for (int64_t t = 0; t < time; ++t) {
    batch.ids.push_back(block[t]);
    batch.targets.push_back(block[t + 1]);
    batch.weights.push_back(block[t + 1] == pad ? 0.0f : 1.0f);
  }
  batch.batch += 1;
}

double train_update(Gpt<float> &model, AdamState<float> &opt,
                    std::span<const Batch> micro_batches, double learning_rate,
                    const AdamHyper &hyper, bool training, Rng *dropout_rng) {
  if (micro_batches.empty()) {
    throw Error(Errc::kConfig, "train_update needs at least one micro-batch");
  }
  model.zero_grads();
  double loss_sum = 0.0;
  for (const Batch &mb : micro_batches) {
    model.forward(mb.ids, mb.batch, mb.time, training, dropout_rng);
    loss_sum += model.loss(mb.targets, mb.weights);
    model.backward();
  }
  const auto count = static_cast<double>(micro_batches.size());
  if (micro_batches.size() > 1) {
    const float inv = static_cast<float>(1.0 / count);
    for (float &g : model.grads().flat()) g *= inv;
  }
  adam_step<float>(model.params().flat(), model.grads().flat(), opt,
                   learning_rate, hyper);
  return loss_sum / count;
}

namespace {

// Shared optimization loop; fill_micro_batches produces the micro-batches
// for one update and is called once per step in order.
TrainResult run_training(
    Gpt<float> &model, AdamState<float> &opt, const TrainOptions &options,
    int64_t start_step,
    const std::function<void(std::vector<Batch> &)> &fill_micro_batches) {
  if (options.total_steps < start_step) {
    throw Error(Errc::kConfig, "start_step is past total_steps");
  }
  if (options.deterministic) set_deterministic_compute();

  std::ofstream csv;
  if (!options.log_csv.empty()) {
    if (options.log_csv.has_parent_path()) {
      std::filesystem::create_directories(options.log_csv.parent_path());
    }
    csv.open(options.log_csv,
             start_step == 0 ? std::ios::trunc : std::ios::app);
    if (!csv) {
      throw Error(Errc::kConfig,
                  "cannot open training log: " + options.log_csv.string());
    }
    if (start_step == 0) csv << "step,lr,loss\n";
  }

  // Dropout draws come from a per-step seeded stream, so it stays
  // reproducible even in deterministic mode.
  const bool use_dropout = model.config().dropout > 0.0;
  TrainResult result;
  std::vector<Batch> micros;
  for (int64_t step = start_step + 1; step <= options.total_steps; ++step) {
    micros.clear();
    fill_micro_batches(micros);
    const double lr = lr_at(step, options.peak_lr, options.warmup_steps);
    Rng dropout_rng(derive_seed(options.seed, 2, static_cast<uint64_t>(step)));
    const double loss =
        train_update(model, opt, micros, lr, options.adam, use_dropout,
                     use_dropout ? &dropout_rng : nullptr);
    result.final_loss = loss;
    result.steps_done += 1;
    const bool log_now = options.log_every > 0 &&
                         (step % options.log_every == 0 || step == 1 ||
                          step == options.total_steps);
    if (log_now) {
      result.curve.emplace_back(step, loss);
      if (csv.is_open()) {
        csv << step << ',' << lr << ',' << loss << '\n';
      }
    }
    if (options.target_loss > 0 && loss <= options.target_loss) {
      if (!log_now) {
        result.curve.emplace_back(step, loss);
        if (csv.is_open()) csv << step << ',' << lr << ',' << loss << '\n';
      }
      break;
    }
  }
  return result;
}

}  // namespace

TrainResult train_on_streams(Gpt<float> &model, AdamState<float> &opt,
                             const CorpusStreams &streams,
                             const TrainOptions &options, int64_t start_step) {
  if (options.block_len < 2 ||
      static_cast<int64_t>(options.block_len) > model.config().context_len + 1) {
    throw Error(Errc::kConfig,
                "block_len must be in [2, context_len + 1] so every block "
                "shifts into one input/target pair");
  }
  BatchMixer mixer(streams, options.stream_weights, options.block_len,
                   options.seed);
  const int64_t blocks_per_step = options.batch_blocks * options.accum_steps;
  mixer.skip_blocks(start_step * blocks_per_step);
  return run_training(model, opt, options, start_step,
                      [&](std::vector<Batch> &micros) {
                        for (int64_t a = 0; a < options.accum_steps; ++a) {
                          Batch batch;
                          for (int64_t i = 0; i < options.batch_blocks; ++i) {
                            append_block_to_batch(batch, mixer.next_block());
                          }
                          micros.push_back(std::move(batch));
                        }
                      });
}

TrainResult train_on_blocks(Gpt<float> &model, AdamState<float> &opt,
                            const std::vector<std::vector<int32_t>> &blocks,
                            const TrainOptions &options, int64_t start_step) {
  if (blocks.empty()) {
    throw Error(Errc::kConfig, "train_on_blocks needs at least one block");
  }
  for (const auto &b : blocks) {
    if (b.size() != blocks.front().size()) {
      throw Error(Errc::kConfig, "training blocks must share one length");
    }
  }
  Rng sample_rng(derive_seed(options.seed, 3, 0));
  const int64_t draws_per_step = options.batch_blocks * options.accum_steps;
  for (int64_t i = 0; i < start_step * draws_per_step; ++i) {
    sample_rng.below(blocks.size());
  }
  return run_training(
      model, opt, options, start_step, [&](std::vector<Batch> &micros) {
        for (int64_t a = 0; a < options.accum_steps; ++a) {
          Batch batch;
          for (int64_t i = 0; i < options.batch_blocks; ++i) {
            append_block_to_batch(batch,
                                  blocks[sample_rng.below(blocks.size())]);
          }
          micros.push_back(std::move(batch));
        }
      });
}

}  // namespace moltext
