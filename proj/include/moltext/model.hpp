//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_MODEL_HPP_
#define MOLTEXT_MODEL_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moltext/corpus.hpp"
#include "moltext/error.hpp"
#include "moltext/rng.hpp"

namespace moltext {

struct ModelConfig {
  int32_t n_layers = 2;
  int32_t d_model = 64;
  int32_t n_heads = 2;
  int32_t context_len = 128;
  int32_t vocab_size = 0;
  double dropout = 0.0;

  void validate() const;
  int64_t param_count() const;
  int32_t head_dim() const { return d_model / n_heads; }
};

template <class T>
struct TensorView {
  std::string name;
  std::vector<int64_t> shape;
  int64_t offset;
  int64_t size;
};

// All parameters in one flat buffer with named views: decoder-only
// transformer with pre-norm blocks, learned positions and input/output
// embeddings tied to "wte".
template <class T>
class ParamStore {
 public:
  explicit ParamStore(const ModelConfig &config);

  std::span<T> view(std::string_view name);
  std::span<const T> view(std::string_view name) const;
  const std::vector<TensorView<T>> &tensors() const { return tensors_; }
  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  void zero() { std::fill(data_.begin(), data_.end(), T(0)); }

 private:
  std::vector<T> data_;
  std::vector<TensorView<T>> tensors_;
};

template <class T>
struct Activations;  // defined in the implementation

// Transformer engine with explicit forward and backward passes.  The same
// code runs in float for training speed and in double for finite-difference
// verification.
template <class T>
class Gpt {
 public:
  explicit Gpt(ModelConfig config);
  ~Gpt();
  Gpt(Gpt &&) noexcept;
  Gpt &operator=(Gpt &&) noexcept;

  // Seeded N(0, 0.02) for embeddings and inner matrices; residual-facing
  // projections are scaled by 1/sqrt(2 * n_layers); biases start at zero
  // and layernorm gains at one.
  void init_params(uint64_t seed);

  // ids is row-major (batch, time); time <= context_len.  Returns logits
  // (batch, time, vocab).  With training=true and dropout > 0 a dropout RNG
  // must be supplied; its draws are consumed in a fixed order.
  std::span<const T> forward(std::span<const int32_t> ids, int64_t batch,
                             int64_t time, bool training = false,
                             Rng *dropout_rng = nullptr);

  // Weighted mean negative log likelihood over the last forward:
  // sum_t w_t * nll_t / sum_t w_t.  Prepares the matching logit gradients
  // for backward().  Throws Error(kData) when every weight is zero.
  double loss(std::span<const int32_t> targets, std::span<const T> weights);

  void zero_grads();
  // Accumulates into grads(); requires forward() then loss() beforehand.
  void backward();

  const ModelConfig &config() const { return config_; }
  ParamStore<T> &params() { return params_; }
  const ParamStore<T> &params() const { return params_; }
  ParamStore<T> &grads() { return grads_; }

 private:
  ModelConfig config_;
  ParamStore<T> params_;
  ParamStore<T> grads_;
  std::unique_ptr<Activations<T>> acts_;
  std::vector<int32_t> last_ids_;
  std::vector<T> last_weights_;
  std::vector<int32_t> last_targets_;
  int64_t batch_ = 0;
  int64_t time_ = 0;
  bool last_training_ = false;
};

// Linear warmup to the peak, then inverse-square-root decay anchored so the
// curve is continuous at the warmup boundary:
//   step <= warmup: peak * step / warmup
//   step >  warmup: peak * sqrt(warmup / step)
double lr_at(int64_t step, double peak_lr, int64_t warmup_steps);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double grad_clip = 0.0;  // global-norm clip; 0 disables
};

template <class T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  int64_t step = 0;

  void reset(int64_t size) {
    m.assign(static_cast<size_t>(size), T(0));
    v.assign(static_cast<size_t>(size), T(0));
    step = 0;
  }
};

// Bias-corrected Adam update.  A non-finite gradient throws Error(kNumeric)
// before any parameter is touched.
template <class T>
void adam_step(std::span<T> params, std::span<T> grads, AdamState<T> &state,
               double learning_rate, const AdamHyper &hyper);

struct Batch {
  std::vector<int32_t> ids;
  std::vector<int32_t> targets;
  std::vector<float> weights;
  int64_t batch = 0;
  int64_t time = 0;
};

// Shift a fixed-length block into a next-token prediction pair; positions
// whose target is <pad> get weight zero.
void append_block_to_batch(Batch &batch, const std::vector<int32_t> &block);

struct TrainOptions {
  int64_t total_steps = 100;
  int64_t batch_blocks = 4;
  int64_t accum_steps = 1;
  uint32_t block_len = 128;
  double peak_lr = 5e-4;
  int64_t warmup_steps = 100;
  AdamHyper adam;
  std::array<double, 3> stream_weights = {1, 1, 1};
  uint64_t seed = 1;
  bool deterministic = true;  // pins BLAS to one thread; dropout stays seeded
  double target_loss = 0.0;   // early stop when positive and reached
  int64_t log_every = 10;
  std::filesystem::path log_csv;  // step,lr,loss rows when set
};

struct TrainResult {
  double final_loss = 0.0;
  int64_t steps_done = 0;
  std::vector<std::pair<int64_t, double>> curve;
};

// One optimizer update from explicit micro-batches (forward, backward,
// gradient averaging over the batches, Adam).  Returns the mean loss.
// Pass training=true with an RNG to enable dropout.
double train_update(Gpt<float> &model, AdamState<float> &opt,
                    std::span<const Batch> micro_batches, double learning_rate,
                    const AdamHyper &hyper, bool training = false,
                    Rng *dropout_rng = nullptr);

// Language-model training over mixed corpus streams; resumable: with
// start_step > 0 the mixer skips exactly the blocks already consumed and the
// loss curve continues bit-for-bit.
TrainResult train_on_streams(Gpt<float> &model, AdamState<float> &opt,
                             const CorpusStreams &streams,
                             const TrainOptions &options,
                             int64_t start_step = 0);

// Training over a fixed set of equal-length blocks sampled uniformly with a
// seeded RNG (used for overfit runs and small supervised sets).
TrainResult train_on_blocks(Gpt<float> &model, AdamState<float> &opt,
                            const std::vector<std::vector<int32_t>> &blocks,
                            const TrainOptions &options,
                            int64_t start_step = 0);

// Pins BLAS to one thread so elementwise float reductions are ordered.
void set_deterministic_compute();

struct Checkpoint {
  ModelConfig config;
  uint64_t vocab_hash = 0;
  uint64_t seed = 0;
  int64_t step = 0;
  std::vector<float> params;
  std::vector<float> adam_m;
  std::vector<float> adam_v;  // empty when the optimizer was not saved
};

void save_checkpoint(const std::filesystem::path &path, const Gpt<float> &model,
                     const AdamState<float> *opt, uint64_t vocab_hash,
                     uint64_t seed);
Checkpoint load_checkpoint(const std::filesystem::path &path);
// Restores params (and optimizer state when present).
void restore_model(Gpt<float> &model, AdamState<float> &opt,
                   const Checkpoint &ckpt);

}  // namespace moltext

#endif  // MOLTEXT_MODEL_HPP_
