//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <bit>
#include <cstring>
#include <fstream>

#include "moltext/io.hpp"
#include "moltext/model.hpp"

namespace moltext {

namespace {

constexpr std::string_view kCheckpointMagic = "MLTXCKPT";
constexpr uint32_t kCheckpointVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint files are little-endian");

void write_f32_array(std::ostream &os, std::span<const float> data) {
  os.write(reinterpret_cast<const char *>(data.data()),
           static_cast<std::streamsize>(data.size() * sizeof(float)));
}

void read_f32_array(std::istream &is, std::span<float> data) {
  is.read(reinterpret_cast<char *>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!is) throw Error(Errc::kData, "truncated checkpoint");
}

void write_f64(std::ostream &os, double value) {
  write_u64(os, std::bit_cast<uint64_t>(value));
}

double read_f64(std::istream &is) {
  return std::bit_cast<double>(read_u64(is));
}

}  // namespace

void save_checkpoint(const std::filesystem::path &path,
                     const Gpt<float> &model, const AdamState<float> *opt,
                     uint64_t vocab_hash, uint64_t seed) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw Error(Errc::kConfig, "cannot write checkpoint: " + path.string());
  }
  const ModelConfig &config = model.config();
  os.write(kCheckpointMagic.data(),
           static_cast<std::streamsize>(kCheckpointMagic.size()));
  write_u32(os, kCheckpointVersion);
  write_u32(os, sizeof(float));
  write_u32(os, static_cast<uint32_t>(config.n_layers));
  write_u32(os, static_cast<uint32_t>(config.d_model));
  write_u32(os, static_cast<uint32_t>(config.n_heads));
  write_u32(os, static_cast<uint32_t>(config.context_len));
  write_u32(os, static_cast<uint32_t>(config.vocab_size));
  write_f64(os, config.dropout);
  write_u64(os, vocab_hash);
  write_u64(os, seed);
  write_u64(os, opt != nullptr ? static_cast<uint64_t>(opt->step) : 0);

  const auto &tensors = model.params().tensors();
  write_u32(os, static_cast<uint32_t>(tensors.size()));
  for (const auto &t : tensors) {
    write_u32(os, static_cast<uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    write_u32(os, static_cast<uint32_t>(t.shape.size()));
    for (int64_t d : t.shape) write_u64(os, static_cast<uint64_t>(d));
  }
  write_f32_array(os, model.params().flat());

  os.put(opt != nullptr ? '\1' : '\0');
  if (opt != nullptr) {
    write_f32_array(os, opt->m);
    write_f32_array(os, opt->v);
  }
  if (!os) {
    throw Error(Errc::kConfig, "failed writing checkpoint: " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw Error(Errc::kConfig, "cannot open checkpoint: " + path.string());
  }
  char magic[8] = {};
  is.read(magic, sizeof(magic));
  if (!is || std::string_view(magic, 8) != kCheckpointMagic) {
    throw Error(Errc::kData, "not a checkpoint file: " + path.string());
  }
  if (read_u32(is) != kCheckpointVersion) {
    throw Error(Errc::kData, "unsupported checkpoint version");
  }
  if (read_u32(is) != sizeof(float)) {
    throw Error(Errc::kData, "unsupported checkpoint element size");
  }
  Checkpoint ckpt;
  ckpt.config.n_layers = static_cast<int32_t>(read_u32(is));
  ckpt.config.d_model = static_cast<int32_t>(read_u32(is));
  ckpt.config.n_heads = static_cast<int32_t>(read_u32(is));
  ckpt.config.context_len = static_cast<int32_t>(read_u32(is));
  ckpt.config.vocab_size = static_cast<int32_t>(read_u32(is));
  ckpt.config.dropout = read_f64(is);
  ckpt.config.validate();
  ckpt.vocab_hash = read_u64(is);
  ckpt.seed = read_u64(is);
  ckpt.step = static_cast<int64_t>(read_u64(is));

  // The stored layout must match what this build would produce.
  ParamStore<float> layout(ckpt.config);
  const uint32_t tensor_count = read_u32(is);
  if (tensor_count != layout.tensors().size()) {
    throw Error(Errc::kData, "checkpoint tensor count mismatch");
  }
  for (const auto &expect : layout.tensors()) {
    const uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    if (!is || name != expect.name) {
      throw Error(Errc::kData, "checkpoint tensor name mismatch: " + name);
    }
    const uint32_t ndim = read_u32(is);
    if (ndim != expect.shape.size()) {
      throw Error(Errc::kData, "checkpoint tensor rank mismatch: " + name);
    }
    for (int64_t d : expect.shape) {
      if (read_u64(is) != static_cast<uint64_t>(d)) {
        throw Error(Errc::kData, "checkpoint tensor shape mismatch: " + name);
      }
    }
  }
  ckpt.params.resize(static_cast<size_t>(layout.size()));
  read_f32_array(is, ckpt.params);

  const int flag = is.get();
  if (flag == 1) {
    ckpt.adam_m.resize(ckpt.params.size());
    ckpt.adam_v.resize(ckpt.params.size());
    read_f32_array(is, ckpt.adam_m);
    read_f32_array(is, ckpt.adam_v);
  } else if (flag != 0) {
    throw Error(Errc::kData, "truncated checkpoint");
  }
  return ckpt;
}

void restore_model(Gpt<float> &model, AdamState<float> &opt,
                   const Checkpoint &ckpt) {
  const ModelConfig &a = model.config();
  const ModelConfig &b = ckpt.config;
  if (a.n_layers != b.n_layers || a.d_model != b.d_model ||
      a.n_heads != b.n_heads || a.context_len != b.context_len ||
      a.vocab_size != b.vocab_size) {
    throw Error(Errc::kConfig, "checkpoint was produced by a different model");
  }
  std::span<float> flat = model.params().flat();
  std::copy(ckpt.params.begin(), ckpt.params.end(), flat.begin());
  if (!ckpt.adam_m.empty()) {
    opt.m = ckpt.adam_m;
    opt.v = ckpt.adam_v;
  } else {
    opt.reset(model.params().size());
  }
  opt.step = ckpt.step;
}

}  // namespace moltext
