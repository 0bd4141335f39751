//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "moltext/model.hpp"

namespace moltext {

void ModelConfig::validate() const {
  if (n_layers <= 0 || d_model <= 0 || n_heads <= 0 || context_len <= 0) {
    throw Error(Errc::kConfig, "model dimensions must be positive");
  }
  if (vocab_size <= 0) {
    throw Error(Errc::kConfig, "vocab_size must be positive");
  }
  if (d_model % n_heads != 0) {
    throw Error(Errc::kConfig, "d_model must be divisible by n_heads");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw Error(Errc::kConfig, "dropout must be in [0, 1)");
  }
}

int64_t ModelConfig::param_count() const {
  const int64_t c = d_model;
  const int64_t per_layer = 12 * c * c + 13 * c;
  return static_cast<int64_t>(vocab_size) * c +
         static_cast<int64_t>(context_len) * c + n_layers * per_layer + 2 * c;
}

namespace {

constexpr double kLnEps = 1e-5;

std::string layer_name(int32_t layer, const char *suffix) {
  return "l" + std::to_string(layer) + "." + suffix;
}

}  // namespace

template <class T>
ParamStore<T>::ParamStore(const ModelConfig &config) {
  config.validate();
  const int64_t c = config.d_model;
  int64_t offset = 0;
  auto add = [&](std::string name, std::vector<int64_t> shape) {
    int64_t size = 1;
    for (int64_t d : shape) size *= d;
    tensors_.push_back({std::move(name), std::move(shape), offset, size});
    offset += size;
  };
  add("wte", {config.vocab_size, c});
  add("wpe", {config.context_len, c});
  for (int32_t l = 0; l < config.n_layers; ++l) {
    add(layer_name(l, "ln1.g"), {c});
    add(layer_name(l, "ln1.b"), {c});
    add(layer_name(l, "attn.qkv.w"), {3 * c, c});
    add(layer_name(l, "attn.qkv.b"), {3 * c});
    add(layer_name(l, "attn.proj.w"), {c, c});
    add(layer_name(l, "attn.proj.b"), {c});
    add(layer_name(l, "ln2.g"), {c});
    add(layer_name(l, "ln2.b"), {c});
    add(layer_name(l, "mlp.fc.w"), {4 * c, c});
    add(layer_name(l, "mlp.fc.b"), {4 * c});
    add(layer_name(l, "mlp.proj.w"), {c, 4 * c});
    add(layer_name(l, "mlp.proj.b"), {c});
  }
  add("lnf.g", {c});
  add("lnf.b", {c});
  data_.assign(static_cast<size_t>(offset), T(0));
  if (offset != config.param_count()) {
    throw Error(Errc::kConfig, "parameter layout does not match param_count");
  }
}

template <class T>
std::span<T> ParamStore<T>::view(std::string_view name) {
  for (const auto &t : tensors_) {
    if (t.name == name) {
      return std::span<T>(data_.data() + t.offset, static_cast<size_t>(t.size));
    }
  }
  throw Error(Errc::kConfig, "unknown tensor: " + std::string(name));
}

template <class T>
std::span<const T> ParamStore<T>::view(std::string_view name) const {
  for (const auto &t : tensors_) {
    if (t.name == name) {
      return std::span<const T>(data_.data() + t.offset,
                                static_cast<size_t>(t.size));
    }
  }
  throw Error(Errc::kConfig, "unknown tensor: " + std::string(name));
}

template class ParamStore<float>;
template class ParamStore<double>;

namespace {

template <class T>
void gemm(CBLAS_TRANSPOSE trans_a, CBLAS_TRANSPOSE trans_b, int64_t m,
          int64_t n, int64_t k, T alpha, const T *a, int64_t lda, const T *b,
          int64_t ldb, T beta, T *c, int64_t ldc) {
  if constexpr (std::is_same_v<T, float>) {
    cblas_sgemm(CblasRowMajor, trans_a, trans_b, static_cast<int>(m),
                static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
                static_cast<int>(ldc));
  } else {
    cblas_dgemm(CblasRowMajor, trans_a, trans_b, static_cast<int>(m),
                static_cast<int>(n), static_cast<int>(k), alpha, a,
                static_cast<int>(lda), b, static_cast<int>(ldb), beta, c,
                static_cast<int>(ldc));
  }
}

// out[n, :] = in[n, :] * w^T + bias, with w stored row-major (out_dim, in_dim).
template <class T>
void matmul_forward(T *out, const T *in, const T *w, const T *bias, int64_t n,
                    int64_t in_dim, int64_t out_dim) {
  gemm<T>(CblasNoTrans, CblasTrans, n, out_dim, in_dim, T(1), in, in_dim, w,
          in_dim, T(0), out, out_dim);
  if (bias != nullptr) {
    for (int64_t i = 0; i < n; ++i) {
      T *row = out + i * out_dim;
      for (int64_t o = 0; o < out_dim; ++o) row[o] += bias[o];
    }
  }
}

template <class T>
void matmul_backward(T *din, T *dw, T *dbias, const T *dout, const T *in,
                     const T *w, int64_t n, int64_t in_dim, int64_t out_dim) {
  if (din != nullptr) {
    gemm<T>(CblasNoTrans, CblasNoTrans, n, in_dim, out_dim, T(1), dout,
            out_dim, w, in_dim, T(1), din, in_dim);
  }
  if (dw != nullptr) {
    gemm<T>(CblasTrans, CblasNoTrans, out_dim, in_dim, n, T(1), dout, out_dim,
            in, in_dim, T(1), dw, in_dim);
  }
  if (dbias != nullptr) {
    for (int64_t i = 0; i < n; ++i) {
      const T *row = dout + i * out_dim;
      for (int64_t o = 0; o < out_dim; ++o) dbias[o] += row[o];
    }
  }
}

template <class T>
void layernorm_forward(T *out, T *mean, T *rstd, const T *in, const T *gain,
                       const T *bias, int64_t n, int64_t c) {
  for (int64_t i = 0; i < n; ++i) {
    const T *x = in + i * c;
    double m = 0.0;
    for (int64_t j = 0; j < c; ++j) m += x[j];
    m /= static_cast<double>(c);
    double var = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      const double d = x[j] - m;
      var += d * d;
    }
    var /= static_cast<double>(c);
    const double rs = 1.0 / std::sqrt(var + kLnEps);
    mean[i] = static_cast<T>(m);
    rstd[i] = static_cast<T>(rs);
    T *y = out + i * c;
    for (int64_t j = 0; j < c; ++j) {
      y[j] = static_cast<T>((x[j] - m) * rs) * gain[j] + bias[j];
    }
  }
}

template <class T>
void layernorm_backward(T *din, T *dgain, T *dbias, const T *dout, const T *in,
                        const T *mean, const T *rstd, const T *gain, int64_t n,
                        int64_t c) {
  for (int64_t i = 0; i < n; ++i) {
    const T *x = in + i * c;
    const T *dy = dout + i * c;
    T *dx = din + i * c;
    const double m = mean[i];
    const double rs = rstd[i];
    double dnorm_mean = 0.0;
    double dnorm_norm_mean = 0.0;
    for (int64_t j = 0; j < c; ++j) {
      const double norm = (x[j] - m) * rs;
      const double dnorm = static_cast<double>(dy[j]) * gain[j];
      dnorm_mean += dnorm;
      dnorm_norm_mean += dnorm * norm;
    }
    dnorm_mean /= static_cast<double>(c);
    dnorm_norm_mean /= static_cast<double>(c);
    for (int64_t j = 0; j < c; ++j) {
      const double norm = (x[j] - m) * rs;
      const double dnorm = static_cast<double>(dy[j]) * gain[j];
      dgain[j] += dy[j] * static_cast<T>(norm);
      dbias[j] += dy[j];
      dx[j] += static_cast<T>((dnorm - dnorm_mean - norm * dnorm_norm_mean) *
                              rs);
    }
  }
}

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

template <class T>
void gelu_forward(T *out, const T *in, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    const double x = in[i];
    const double u = kGeluScale * (x + kGeluCubic * x * x * x);
    out[i] = static_cast<T>(0.5 * x * (1.0 + std::tanh(u)));
  }
}

template <class T>
void gelu_backward(T *din, const T *dout, const T *in, int64_t n) {
  for (int64_t i = 0; i < n; ++i) {
    const double x = in[i];
    const double u = kGeluScale * (x + kGeluCubic * x * x * x);
    const double t = std::tanh(u);
    const double du = kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
    const double grad = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
    din[i] += static_cast<T>(grad * dout[i]);
  }
}

template <class T>
void residual_forward(T *out, const T *a, const T *b, int64_t n) {
  for (int64_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

// Inverted dropout; the kept positions are scaled by 1/(1-p) in the forward
// pass so evaluation needs no rescaling.
template <class T>
void dropout_forward(T *out, uint8_t *mask, const T *in, int64_t n, double p,
                     Rng &rng) {
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  for (int64_t i = 0; i < n; ++i) {
    const bool keep = rng.next_double() >= p;
    mask[i] = keep ? 1 : 0;
    out[i] = keep ? in[i] * scale : T(0);
  }
}

template <class T>
void dropout_backward(T *din, const T *dout, const uint8_t *mask, int64_t n,
                      double p) {
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  for (int64_t i = 0; i < n; ++i) {
    din[i] += mask[i] ? dout[i] * scale : T(0);
  }
}

// Causal multi-head attention.  qkv is (n, 3c) with query, key and value
// blocks; att holds the post-softmax weights before dropout, att_mask the
// dropout keep mask (ignored when drop_p is zero).
template <class T>
void attention_forward(T *out, T *preatt, T *att, uint8_t *att_mask,
                       const T *qkv, int64_t batch, int64_t time, int64_t c,
                       int64_t heads, double drop_p, Rng *rng) {
  const int64_t hd = c / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const T keep_scale = static_cast<T>(drop_p > 0 ? 1.0 / (1.0 - drop_p) : 1.0);
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t h = 0; h < heads; ++h) {
      for (int64_t t = 0; t < time; ++t) {
        const T *q = qkv + (b * time + t) * 3 * c + h * hd;
        T *pre_row = preatt + ((b * heads + h) * time + t) * time;
        T *att_row = att + ((b * heads + h) * time + t) * time;
        uint8_t *mask_row =
            att_mask + ((b * heads + h) * time + t) * time;
        double max_val = -1e30;
        for (int64_t t2 = 0; t2 <= t; ++t2) {
          const T *k = qkv + (b * time + t2) * 3 * c + c + h * hd;
          double dot = 0.0;
          for (int64_t j = 0; j < hd; ++j) dot += double(q[j]) * k[j];
          dot *= scale;
          pre_row[t2] = static_cast<T>(dot);
          max_val = std::max(max_val, dot);
        }
        double sum = 0.0;
        for (int64_t t2 = 0; t2 <= t; ++t2) {
          const double e = std::exp(double(pre_row[t2]) - max_val);
          att_row[t2] = static_cast<T>(e);
          sum += e;
        }
        const double inv = sum > 0 ? 1.0 / sum : 0.0;
        for (int64_t t2 = 0; t2 <= t; ++t2) {
          att_row[t2] = static_cast<T>(double(att_row[t2]) * inv);
        }
        for (int64_t t2 = t + 1; t2 < time; ++t2) {
          pre_row[t2] = T(0);
          att_row[t2] = T(0);
        }
        if (drop_p > 0) {
          for (int64_t t2 = 0; t2 <= t; ++t2) {
            mask_row[t2] = rng->next_double() >= drop_p ? 1 : 0;
          }
        }
        T *o = out + (b * time + t) * c + h * hd;
        for (int64_t j = 0; j < hd; ++j) o[j] = T(0);
        for (int64_t t2 = 0; t2 <= t; ++t2) {
          T w = att_row[t2];
          if (drop_p > 0) w = mask_row[t2] ? w * keep_scale : T(0);
          if (w == T(0)) continue;
          const T *v = qkv + (b * time + t2) * 3 * c + 2 * c + h * hd;
          for (int64_t j = 0; j < hd; ++j) o[j] += w * v[j];
        }
      }
    }
  }
}

template <class T>
void attention_backward(T *dqkv, T *datt, const T *dout, const T *qkv,
                        const T *att, const uint8_t *att_mask, int64_t batch,
                        int64_t time, int64_t c, int64_t heads, double drop_p) {
  const int64_t hd = c / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  const T keep_scale = static_cast<T>(drop_p > 0 ? 1.0 / (1.0 - drop_p) : 1.0);
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t h = 0; h < heads; ++h) {
      for (int64_t t = 0; t < time; ++t) {
        const T *att_row = att + ((b * heads + h) * time + t) * time;
        const uint8_t *mask_row =
            att_mask + ((b * heads + h) * time + t) * time;
        T *datt_row = datt + ((b * heads + h) * time + t) * time;
        const T *d_out = dout + (b * time + t) * c + h * hd;
        const T *q = qkv + (b * time + t) * 3 * c + h * hd;
        T *dq = dqkv + (b * time + t) * 3 * c + h * hd;
        // Through the value mix and attention dropout.
        for (int64_t t2 = 0; t2 <= t; ++t2) {
          const T *v = qkv + (b * time + t2) * 3 * c + 2 * c + h * hd;
          T *dv = dqkv + (b * time + t2) * 3 * c + 2 * c + h * hd;
          double dot = 0.0;
          for (int64_t j = 0; j < hd; ++j) dot += double(d_out[j]) * v[j];
          T w = att_row[t2];
          T pass = T(1);
          if (drop_p > 0) {
            pass = mask_row[t2] ? keep_scale : T(0);
            w = w * pass;
          }
          datt_row[t2] = static_cast<T>(dot) * pass;
          if (w != T(0)) {
            for (int64_t j = 0; j < hd; ++j) dv[j] += w * d_out[j];
          }
        }
        // Through the softmax.
        double dsum = 0.0;
        for (int64_t t2 = 0; t2 <= t; ++t2) {
          dsum += double(att_row[t2]) * datt_row[t2];
        }
        for (int64_t t2 = 0; t2 <= t; ++t2) {
          const double dpre =
              double(att_row[t2]) * (double(datt_row[t2]) - dsum) * scale;
          const T *k = qkv + (b * time + t2) * 3 * c + c + h * hd;
          T *dk = dqkv + (b * time + t2) * 3 * c + c + h * hd;
          for (int64_t j = 0; j < hd; ++j) {
            dq[j] += static_cast<T>(dpre) * k[j];
            dk[j] += static_cast<T>(dpre) * q[j];
          }
        }
      }
    }
  }
}

template <class T>
void encoder_forward(T *out, const int32_t *ids, const T *wte, const T *wpe,
                     int64_t batch, int64_t time, int64_t c) {
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t t = 0; t < time; ++t) {
      T *y = out + (b * time + t) * c;
      const T *tok = wte + static_cast<int64_t>(ids[b * time + t]) * c;
      const T *pos = wpe + t * c;
      for (int64_t j = 0; j < c; ++j) y[j] = tok[j] + pos[j];
    }
  }
}

template <class T>
void encoder_backward(T *dwte, T *dwpe, const T *dout, const int32_t *ids,
                      int64_t batch, int64_t time, int64_t c) {
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t t = 0; t < time; ++t) {
      const T *dy = dout + (b * time + t) * c;
      T *tok = dwte + static_cast<int64_t>(ids[b * time + t]) * c;
      T *pos = dwpe + t * c;
      for (int64_t j = 0; j < c; ++j) {
        tok[j] += dy[j];
        pos[j] += dy[j];
      }
    }
  }
}

template <class T>
void softmax_rows(T *probs, const T *logits, int64_t n, int64_t v) {
  for (int64_t i = 0; i < n; ++i) {
    const T *row = logits + i * v;
    T *out = probs + i * v;
    double max_val = row[0];
    for (int64_t j = 1; j < v; ++j) max_val = std::max(max_val, double(row[j]));
    double sum = 0.0;
    for (int64_t j = 0; j < v; ++j) {
      const double e = std::exp(double(row[j]) - max_val);
      out[j] = static_cast<T>(e);
      sum += e;
    }
    const double inv = 1.0 / sum;
    for (int64_t j = 0; j < v; ++j) {
      out[j] = static_cast<T>(double(out[j]) * inv);
    }
  }
}

}  // namespace

template <class T>
struct Activations {
  int64_t batch = 0;
  int64_t time = 0;

  std::vector<T> embed;       // (b, t, c) after token+position and dropout
  std::vector<uint8_t> embed_mask;

  struct Layer {
    std::vector<T> ln1, ln1_mean, ln1_rstd;
    std::vector<T> qkv;
    std::vector<T> preatt, att;
    std::vector<uint8_t> att_mask;
    std::vector<T> atty;
    std::vector<T> attproj;
    std::vector<uint8_t> attres_mask;
    std::vector<T> res1;
    std::vector<T> ln2, ln2_mean, ln2_rstd;
    std::vector<T> fc, fc_gelu;
    std::vector<T> mlpproj;
    std::vector<uint8_t> mlpres_mask;
    std::vector<T> res2;
  };
  std::vector<Layer> layers;

  std::vector<T> lnf, lnf_mean, lnf_rstd;
  std::vector<T> logits;
  std::vector<T> probs;
  std::vector<T> dlogits;

  void resize(const ModelConfig &config, int64_t b, int64_t t) {
    if (batch == b && time == t) return;
    batch = b;
    time = t;
    const int64_t c = config.d_model;
    const int64_t n = b * t;
    const int64_t att_n = b * config.n_heads * t * t;
    embed.assign(n * c, T(0));
    embed_mask.assign(n * c, 1);
    layers.resize(config.n_layers);
    for (auto &l : layers) {
      l.ln1.assign(n * c, T(0));
      l.ln1_mean.assign(n, T(0));
      l.ln1_rstd.assign(n, T(0));
      l.qkv.assign(n * 3 * c, T(0));
      l.preatt.assign(att_n, T(0));
      l.att.assign(att_n, T(0));
      l.att_mask.assign(att_n, 1);
      l.atty.assign(n * c, T(0));
      l.attproj.assign(n * c, T(0));
      l.attres_mask.assign(n * c, 1);
      l.res1.assign(n * c, T(0));
      l.ln2.assign(n * c, T(0));
      l.ln2_mean.assign(n, T(0));
      l.ln2_rstd.assign(n, T(0));
      l.fc.assign(n * 4 * c, T(0));
      l.fc_gelu.assign(n * 4 * c, T(0));
      l.mlpproj.assign(n * c, T(0));
      l.mlpres_mask.assign(n * c, 1);
      l.res2.assign(n * c, T(0));
    }
    lnf.assign(n * c, T(0));
    lnf_mean.assign(n, T(0));
    lnf_rstd.assign(n, T(0));
    logits.assign(n * config.vocab_size, T(0));
    probs.assign(n * config.vocab_size, T(0));
    dlogits.assign(n * config.vocab_size, T(0));
  }
};

template <class T>
Gpt<T>::Gpt(ModelConfig config)
    : config_(config),
      params_(config),
      grads_(config),
      acts_(std::make_unique<Activations<T>>()) {}

template <class T>
Gpt<T>::~Gpt() = default;

template <class T>
Gpt<T>::Gpt(Gpt &&) noexcept = default;

template <class T>
Gpt<T> &Gpt<T>::operator=(Gpt &&) noexcept = default;

template <class T>
void Gpt<T>::init_params(uint64_t seed) {
  Rng rng(seed);
  const double base_std = 0.02;
  const double resid_std =
      base_std / std::sqrt(2.0 * static_cast<double>(config_.n_layers));
  for (const auto &tensor : params_.tensors()) {
    std::span<T> data = params_.view(tensor.name);
    const bool is_gain = tensor.name.ends_with(".g") || tensor.name == "lnf.g";
    const bool is_bias = tensor.name.ends_with(".b");
    const bool is_resid_proj = tensor.name.ends_with("attn.proj.w") ||
                               tensor.name.ends_with("mlp.proj.w");
    if (is_gain) {
      std::fill(data.begin(), data.end(), T(1));
    } else if (is_bias) {
      std::fill(data.begin(), data.end(), T(0));
    } else {
      const double std = is_resid_proj ? resid_std : base_std;
      for (auto &x : data) x = static_cast<T>(rng.normal() * std);
    }
  }
}

template <class T>
std::span<const T> Gpt<T>::forward(std::span<const int32_t> ids, int64_t batch,
                                   int64_t time, bool training,
                                   Rng *dropout_rng) {
  if (batch <= 0 || time <= 0 || time > config_.context_len) {
    throw Error(Errc::kConfig, "forward shape out of range");
  }
  if (static_cast<int64_t>(ids.size()) != batch * time) {
    throw Error(Errc::kConfig, "ids size does not match batch * time");
  }
  for (int32_t id : ids) {
    if (id < 0 || id >= config_.vocab_size) {
      throw Error(Errc::kData, "token id out of vocabulary range");
    }
  }
  const double drop = training ? config_.dropout : 0.0;
  if (drop > 0 && dropout_rng == nullptr) {
    throw Error(Errc::kConfig, "dropout requires an RNG in training mode");
  }

  auto &a = *acts_;
  a.resize(config_, batch, time);
  last_ids_.assign(ids.begin(), ids.end());
  batch_ = batch;
  time_ = time;
  last_training_ = training && drop > 0;

  const int64_t c = config_.d_model;
  const int64_t n = batch * time;

  encoder_forward(a.embed.data(), ids.data(), params_.view("wte").data(),
                  params_.view("wpe").data(), batch, time, c);
  if (drop > 0) {
    dropout_forward(a.embed.data(), a.embed_mask.data(), a.embed.data(), n * c,
                    drop, *dropout_rng);
  }

  const T *x = a.embed.data();
  for (int32_t l = 0; l < config_.n_layers; ++l) {
    auto &la = a.layers[l];
    layernorm_forward(la.ln1.data(), la.ln1_mean.data(), la.ln1_rstd.data(), x,
                      params_.view(layer_name(l, "ln1.g")).data(),
                      params_.view(layer_name(l, "ln1.b")).data(), n, c);
    matmul_forward(la.qkv.data(), la.ln1.data(),
                   params_.view(layer_name(l, "attn.qkv.w")).data(),
                   params_.view(layer_name(l, "attn.qkv.b")).data(), n, c,
                   3 * c);
    attention_forward(la.atty.data(), la.preatt.data(), la.att.data(),
                      la.att_mask.data(), la.qkv.data(), batch, time, c,
                      config_.n_heads, drop, dropout_rng);
    matmul_forward(la.attproj.data(), la.atty.data(),
                   params_.view(layer_name(l, "attn.proj.w")).data(),
                   params_.view(layer_name(l, "attn.proj.b")).data(), n, c, c);
    if (drop > 0) {
      dropout_forward(la.attproj.data(), la.attres_mask.data(),
                      la.attproj.data(), n * c, drop, *dropout_rng);
    }
    residual_forward(la.res1.data(), x, la.attproj.data(), n * c);
    layernorm_forward(la.ln2.data(), la.ln2_mean.data(), la.ln2_rstd.data(),
                      la.res1.data(),
                      params_.view(layer_name(l, "ln2.g")).data(),
                      params_.view(layer_name(l, "ln2.b")).data(), n, c);
    matmul_forward(la.fc.data(), la.ln2.data(),
                   params_.view(layer_name(l, "mlp.fc.w")).data(),
                   params_.view(layer_name(l, "mlp.fc.b")).data(), n, c,
                   4 * c);
    gelu_forward(la.fc_gelu.data(), la.fc.data(), n * 4 * c);
    matmul_forward(la.mlpproj.data(), la.fc_gelu.data(),
                   params_.view(layer_name(l, "mlp.proj.w")).data(),
                   params_.view(layer_name(l, "mlp.proj.b")).data(), n, 4 * c,
                   c);
    if (drop > 0) {
      dropout_forward(la.mlpproj.data(), la.mlpres_mask.data(),
                      la.mlpproj.data(), n * c, drop, *dropout_rng);
    }
    residual_forward(la.res2.data(), la.res1.data(), la.mlpproj.data(), n * c);
    x = la.res2.data();
  }

  layernorm_forward(a.lnf.data(), a.lnf_mean.data(), a.lnf_rstd.data(), x,
                    params_.view("lnf.g").data(), params_.view("lnf.b").data(),
                    n, c);
  matmul_forward(a.logits.data(), a.lnf.data(), params_.view("wte").data(),
                 static_cast<const T *>(nullptr), n, c, config_.vocab_size);
  return std::span<const T>(a.logits.data(), n * config_.vocab_size);
}

template <class T>
double Gpt<T>::loss(std::span<const int32_t> targets,
                    std::span<const T> weights) {
  const int64_t n = batch_ * time_;
  if (n == 0) throw Error(Errc::kConfig, "loss called before forward");
  if (static_cast<int64_t>(targets.size()) != n ||
      static_cast<int64_t>(weights.size()) != n) {
    throw Error(Errc::kConfig, "targets/weights size does not match forward");
  }
  auto &a = *acts_;
  const int64_t v = config_.vocab_size;
  softmax_rows(a.probs.data(), a.logits.data(), n, v);

  double weight_sum = 0.0;
  double loss_sum = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double w = weights[i];
    if (w == 0.0) continue;
    const int32_t target = targets[i];
    if (target < 0 || target >= v) {
      throw Error(Errc::kData, "target id out of vocabulary range");
    }
    const double p = a.probs[i * v + target];
    loss_sum += w * -std::log(std::max(p, 1e-300));
    weight_sum += w;
  }
  if (weight_sum == 0.0) {
    throw Error(Errc::kData, "loss has no positions with nonzero weight");
  }

  // Fused softmax + NLL gradient: d logits = (p - onehot) * w / sum(w).
  const double inv = 1.0 / weight_sum;
  for (int64_t i = 0; i < n; ++i) {
    const double w = double(weights[i]) * inv;
    T *row = a.dlogits.data() + i * v;
    if (w == 0.0) {
      std::fill(row, row + v, T(0));
      continue;
    }
    const T *p = a.probs.data() + i * v;
    for (int64_t j = 0; j < v; ++j) {
      row[j] = static_cast<T>(double(p[j]) * w);
    }
    row[targets[i]] -= static_cast<T>(w);
  }
  last_targets_.assign(targets.begin(), targets.end());
  last_weights_.assign(weights.begin(), weights.end());
  return loss_sum / weight_sum;
}

template <class T>
void Gpt<T>::zero_grads() {
  grads_.zero();
}

template <class T>
void Gpt<T>::backward() {
  const int64_t n = batch_ * time_;
  if (n == 0 || last_targets_.empty()) {
    throw Error(Errc::kConfig, "backward called before forward and loss");
  }
  auto &a = *acts_;
  const int64_t c = config_.d_model;
  const int64_t batch = batch_;
  const int64_t time = time_;
  const double drop = last_training_ ? config_.dropout : 0.0;

  std::vector<T> dres(n * c, T(0));
  std::vector<T> dlnf(n * c, T(0));

  // Tied output head: gradients flow to both lnf and the embedding table.
  const T *x_final = config_.n_layers > 0
                         ? a.layers[config_.n_layers - 1].res2.data()
                         : a.embed.data();
  matmul_backward(dlnf.data(), grads_.view("wte").data(),
                  static_cast<T *>(nullptr), a.dlogits.data(), a.lnf.data(),
                  params_.view("wte").data(), n, c, config_.vocab_size);
  layernorm_backward(dres.data(), grads_.view("lnf.g").data(),
                     grads_.view("lnf.b").data(), dlnf.data(), x_final,
                     a.lnf_mean.data(), a.lnf_rstd.data(),
                     params_.view("lnf.g").data(), n, c);

  std::vector<T> d_ln(n * c);
  std::vector<T> d_branch(n * c);
  std::vector<T> d_fc_gelu(n * 4 * c);
  std::vector<T> d_fc(n * 4 * c);
  std::vector<T> d_atty(n * c);
  std::vector<T> d_qkv(n * 3 * c);
  std::vector<T> d_att(static_cast<size_t>(batch) * config_.n_heads * time *
                       time);

  for (int32_t l = config_.n_layers - 1; l >= 0; --l) {
    auto &la = a.layers[l];
    const T *x_in = l > 0 ? a.layers[l - 1].res2.data() : a.embed.data();

    // MLP branch.
    std::fill(d_branch.begin(), d_branch.end(), T(0));
    if (drop > 0) {
      dropout_backward(d_branch.data(), dres.data(), la.mlpres_mask.data(),
                       n * c, drop);
    } else {
      std::copy(dres.begin(), dres.end(), d_branch.begin());
    }
    std::fill(d_fc_gelu.begin(), d_fc_gelu.end(), T(0));
    matmul_backward(d_fc_gelu.data(),
                    grads_.view(layer_name(l, "mlp.proj.w")).data(),
                    grads_.view(layer_name(l, "mlp.proj.b")).data(),
                    d_branch.data(), la.fc_gelu.data(),
                    params_.view(layer_name(l, "mlp.proj.w")).data(), n, 4 * c,
                    c);
    std::fill(d_fc.begin(), d_fc.end(), T(0));
    gelu_backward(d_fc.data(), d_fc_gelu.data(), la.fc.data(), n * 4 * c);
    std::fill(d_ln.begin(), d_ln.end(), T(0));
    matmul_backward(d_ln.data(), grads_.view(layer_name(l, "mlp.fc.w")).data(),
                    grads_.view(layer_name(l, "mlp.fc.b")).data(), d_fc.data(),
                    la.ln2.data(),
                    params_.view(layer_name(l, "mlp.fc.w")).data(), n, c,
                    4 * c);
    layernorm_backward(dres.data(), grads_.view(layer_name(l, "ln2.g")).data(),
                       grads_.view(layer_name(l, "ln2.b")).data(), d_ln.data(),
                       la.res1.data(), la.ln2_mean.data(), la.ln2_rstd.data(),
                       params_.view(layer_name(l, "ln2.g")).data(), n, c);

    // Attention branch.
    std::fill(d_branch.begin(), d_branch.end(), T(0));
    if (drop > 0) {
      dropout_backward(d_branch.data(), dres.data(), la.attres_mask.data(),
                       n * c, drop);
    } else {
      std::copy(dres.begin(), dres.end(), d_branch.begin());
    }
    std::fill(d_atty.begin(), d_atty.end(), T(0));
    matmul_backward(d_atty.data(),
                    grads_.view(layer_name(l, "attn.proj.w")).data(),
                    grads_.view(layer_name(l, "attn.proj.b")).data(),
                    d_branch.data(), la.atty.data(),
                    params_.view(layer_name(l, "attn.proj.w")).data(), n, c,
                    c);
    std::fill(d_qkv.begin(), d_qkv.end(), T(0));
    std::fill(d_att.begin(), d_att.end(), T(0));
    attention_backward(d_qkv.data(), d_att.data(), d_atty.data(),
                       la.qkv.data(), la.att.data(), la.att_mask.data(), batch,
                       time, c, config_.n_heads, drop);
    std::fill(d_ln.begin(), d_ln.end(), T(0));
    matmul_backward(d_ln.data(),
                    grads_.view(layer_name(l, "attn.qkv.w")).data(),
                    grads_.view(layer_name(l, "attn.qkv.b")).data(),
                    d_qkv.data(), la.ln1.data(),
                    params_.view(layer_name(l, "attn.qkv.w")).data(), n, c,
                    3 * c);
    layernorm_backward(dres.data(), grads_.view(layer_name(l, "ln1.g")).data(),
                       grads_.view(layer_name(l, "ln1.b")).data(), d_ln.data(),
                       x_in, la.ln1_mean.data(), la.ln1_rstd.data(),
                       params_.view(layer_name(l, "ln1.g")).data(), n, c);
  }

  if (drop > 0) {
    std::vector<T> d_embed(n * c, T(0));
    dropout_backward(d_embed.data(), dres.data(), a.embed_mask.data(), n * c,
                     drop);
    encoder_backward(grads_.view("wte").data(), grads_.view("wpe").data(),
                     d_embed.data(), last_ids_.data(), batch, time, c);
  } else {
    encoder_backward(grads_.view("wte").data(), grads_.view("wpe").data(),
                     dres.data(), last_ids_.data(), batch, time, c);
  }
}

template class Gpt<float>;
template class Gpt<double>;

double lr_at(int64_t step, double peak_lr, int64_t warmup_steps) {
  if (step <= 0 || warmup_steps <= 0 || peak_lr <= 0) {
    throw Error(Errc::kConfig, "lr_at needs positive step, warmup and peak");
  }
  if (step <= warmup_steps) {
    return peak_lr * static_cast<double>(step) /
           static_cast<double>(warmup_steps);
  }
  return peak_lr * std::sqrt(static_cast<double>(warmup_steps) /
                             static_cast<double>(step));
}

template <class T>
void adam_step(std::span<T> params, std::span<T> grads, AdamState<T> &state,
               double learning_rate, const AdamHyper &hyper) {
  const size_t size = params.size();
  if (grads.size() != size || state.m.size() != size ||
      state.v.size() != size) {
    throw Error(Errc::kConfig, "optimizer state size mismatch");
  }
  for (size_t i = 0; i < size; ++i) {
    if (!std::isfinite(static_cast<double>(grads[i]))) {
      throw Error(Errc::kNumeric, "non-finite gradient; aborting update");
    }
  }
  if (hyper.grad_clip > 0) {
    double norm_sq = 0.0;
    for (size_t i = 0; i < size; ++i) {
      norm_sq += double(grads[i]) * double(grads[i]);
    }
    const double norm = std::sqrt(norm_sq);
    if (norm > hyper.grad_clip) {
      const T scale = static_cast<T>(hyper.grad_clip / norm);
      for (size_t i = 0; i < size; ++i) grads[i] *= scale;
    }
  }
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(hyper.beta1, t);
  const double bc2 = 1.0 - std::pow(hyper.beta2, t);
  for (size_t i = 0; i < size; ++i) {
    const double g = grads[i];
    const double m = hyper.beta1 * double(state.m[i]) + (1.0 - hyper.beta1) * g;
    const double v =
        hyper.beta2 * double(state.v[i]) + (1.0 - hyper.beta2) * g * g;
    state.m[i] = static_cast<T>(m);
    state.v[i] = static_cast<T>(v);
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    params[i] -= static_cast<T>(learning_rate * m_hat /
                                (std::sqrt(v_hat) + hyper.eps));
  }
}

template void adam_step<float>(std::span<float>, std::span<float>,
                               AdamState<float> &, double, const AdamHyper &);
template void adam_step<double>(std::span<double>, std::span<double>,
                                AdamState<double> &, double,
                                const AdamHyper &);

void set_deterministic_compute() { openblas_set_num_threads(1); }

}  // namespace moltext
