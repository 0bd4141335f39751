//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "moltext/cli.hpp"
#include "moltext/corpus.hpp"
#include "moltext/error.hpp"
#include "moltext/io.hpp"
#include "moltext/metrics.hpp"
#include "moltext/model.hpp"
#include "moltext/tasks.hpp"
#include "moltext/tokenize.hpp"
#include "moltext/vocab.hpp"

namespace moltext {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---- strict config access ----

void check_keys(const json &obj, std::initializer_list<const char *> allowed,
                const std::string &context) {
  for (const auto &[key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char *a) {
          return key == a;
        }) == allowed.end()) {
      throw Error(Errc::kConfig, context + ": unknown key '" + key + "'");
    }
  }
}

const json &need(const json &obj, const char *key, const std::string &ctx) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(Errc::kConfig, ctx + ": missing key '" + key + "'");
  }
  return *it;
}

std::string need_string(const json &obj, const char *key,
                        const std::string &ctx) {
  const json &v = need(obj, key, ctx);
  if (!v.is_string()) {
    throw Error(Errc::kConfig, ctx + ": '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

uint64_t need_u64(const json &obj, const char *key, const std::string &ctx) {
  const json &v = need(obj, key, ctx);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw Error(Errc::kConfig, ctx + ": '" + key + "' must be an integer");
  }
  if (v.is_number_integer() && v.get<int64_t>() < 0) {
    throw Error(Errc::kConfig, ctx + ": '" + key + "' must not be negative");
  }
  return v.get<uint64_t>();
}

int64_t need_i64(const json &obj, const char *key, const std::string &ctx) {
  const json &v = need(obj, key, ctx);
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw Error(Errc::kConfig, ctx + ": '" + key + "' must be an integer");
  }
  return v.get<int64_t>();
}

double need_double(const json &obj, const char *key, const std::string &ctx) {
  const json &v = need(obj, key, ctx);
  if (!v.is_number()) {
    throw Error(Errc::kConfig, ctx + ": '" + key + "' must be a number");
  }
  return v.get<double>();
}

std::string opt_string(const json &obj, const char *key,
                       const std::string &fallback, const std::string &ctx) {
  if (!obj.contains(key)) return fallback;
  return need_string(obj, key, ctx);
}

int64_t opt_i64(const json &obj, const char *key, int64_t fallback,
                const std::string &ctx) {
  if (!obj.contains(key)) return fallback;
  return need_i64(obj, key, ctx);
}

double opt_double(const json &obj, const char *key, double fallback,
                  const std::string &ctx) {
  if (!obj.contains(key)) return fallback;
  return need_double(obj, key, ctx);
}

bool opt_bool(const json &obj, const char *key, bool fallback,
              const std::string &ctx) {
  if (!obj.contains(key)) return fallback;
  const json &v = obj.at(key);
  if (!v.is_boolean()) {
    throw Error(Errc::kConfig, ctx + ": '" + key + "' must be a boolean");
  }
  return v.get<bool>();
}

std::vector<double> need_double_list(const json &obj, const char *key,
                                     const std::string &ctx) {
  const json &v = need(obj, key, ctx);
  if (!v.is_array() || v.empty()) {
    throw Error(Errc::kConfig,
                ctx + ": '" + key + "' must be a nonempty array of numbers");
  }
  std::vector<double> out;
  for (const json &item : v) {
    if (!item.is_number()) {
      throw Error(Errc::kConfig,
                  ctx + ": '" + key + "' must contain only numbers");
    }
    out.push_back(item.get<double>());
  }
  return out;
}

// ---- shared command plumbing ----

struct CommandContext {
  json config;  // effective, after overrides
  uint64_t seed = 0;
  bool deterministic = true;
  fs::path out_dir;  // empty only where the schema allows it
  RunManifest manifest;

  void input(const fs::path &path) {
    manifest.input_hashes[path.string()] = file_content_hash(path);
  }
  void output(const fs::path &path) {
    manifest.output_hashes[path.string()] = file_content_hash(path);
  }
};

std::vector<std::string> nonempty_lines(const fs::path &path) {
  std::vector<std::string> lines;
  for (auto &line : read_lines(path)) {
    if (!line.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

Vocab load_vocab_input(CommandContext &ctx, const std::string &path) {
  ctx.input(path);
  return Vocab::load(path);
}

MergeTable load_merges_input(CommandContext &ctx, const std::string &path) {
  ctx.input(path);
  return MergeTable::load(path);
}

// Builds the model a checkpoint describes and loads its weights; the
// optimizer comes back freshly zeroed.
Gpt<float> model_from_checkpoint(const Checkpoint &ckpt, uint64_t vocab_hash,
                                 const std::string &path) {
  if (ckpt.vocab_hash != vocab_hash) {
    throw Error(Errc::kData, "checkpoint '" + path +
                                 "' was trained with a different vocabulary");
  }
  Gpt<float> model(ckpt.config);
  AdamState<float> opt;
  restore_model(model, opt, ckpt);
  return model;
}

void require_prompt_fits(size_t ids_len, int64_t context_len,
                         const std::string &what) {
  // Finetune batches shift off one token, so an example may have exactly
  // context_len + 1 ids.
  if (static_cast<int64_t>(ids_len) > context_len + 1) {
    throw Error(Errc::kData, what + " is longer than the model context (" +
                                 std::to_string(ids_len) + " tokens vs " +
                                 std::to_string(context_len) + ")");
  }
}

double auc_over(Gpt<float> &model, const std::vector<RenderedPrompt> &prompts,
                const std::vector<int> &labels,
                const std::vector<int64_t> &subset, int32_t positive_tag,
                int32_t negative_tag) {
  std::vector<double> scores;
  std::vector<int> subset_labels;
  for (int64_t i : subset) {
    scores.push_back(classify_prompt(model, prompts[i].ids, positive_tag,
                                     negative_tag)
                         .positive);
    subset_labels.push_back(labels[i]);
  }
  return roc_auc(scores, subset_labels);
}

int32_t tag_id(const Vocab &vocab, const std::string &tag) {
  const auto id = vocab.id_of(tag + std::string(kWordEnd));
  if (!id) {
    throw Error(Errc::kConfig,
                "classification tag is not a single vocabulary token: " + tag);
  }
  return *id;
}

// ---- commands ----

void cmd_tokenize(CommandContext &ctx) {
  const std::string c = "tokenize config";
  check_keys(ctx.config,
             {"seed", "deterministic", "out_dir", "text_corpus",
              "smiles_corpus", "num_merges", "extra_tokens"},
             c);
  const std::string text_path = need_string(ctx.config, "text_corpus", c);
  const std::string smiles_path = need_string(ctx.config, "smiles_corpus", c);
  const int64_t num_merges = need_i64(ctx.config, "num_merges", c);
  if (num_merges < 0) {
    throw Error(Errc::kConfig, c + ": 'num_merges' must not be negative");
  }

  ctx.input(text_path);
  const auto docs = nonempty_lines(text_path);
  if (docs.empty()) {
    throw Error(Errc::kData, "text corpus '" + text_path + "' is empty");
  }

  ctx.input(smiles_path);
  std::set<std::string> inventory;
  const auto molecules = nonempty_lines(smiles_path);
  for (size_t i = 0; i < molecules.size(); ++i) {
    auto tokens = smiles_tokenize(molecules[i]);
    if (!tokens.ok()) {
      throw Error(Errc::kData, smiles_path + ":" + std::to_string(i + 1) +
                                   ": " + tokens.error().message);
    }
    for (auto &t : tokens.value()) inventory.insert(std::move(t));
  }

  std::vector<std::string> word_tokens;
  if (ctx.config.contains("extra_tokens")) {
    const json &extra = ctx.config.at("extra_tokens");
    if (!extra.is_array()) {
      throw Error(Errc::kConfig, c + ": 'extra_tokens' must be an array");
    }
    for (const json &item : extra) {
      if (!item.is_string() || item.get<std::string>().empty()) {
        throw Error(Errc::kConfig,
                    c + ": 'extra_tokens' must contain nonempty strings");
      }
      word_tokens.push_back(item.get<std::string>() + std::string(kWordEnd));
    }
  }

  const BpeTrainResult bpe = bpe_train(docs, num_merges, {});
  const Vocab vocab = build_vocab(
      bpe,
      std::vector<std::string>(inventory.begin(), inventory.end()),
      word_tokens);

  const fs::path vocab_path = ctx.out_dir / "vocab.txt";
  const fs::path merges_path = ctx.out_dir / "merges.txt";
  vocab.save(vocab_path);
  bpe.table.save(merges_path);
  ctx.output(vocab_path);
  ctx.output(merges_path);

  std::cout << "vocab: " << vocab.size() << " tokens (hash "
            << hash_hex(vocab.content_hash()) << "), "
            << bpe.table.merges.size() << " merges\n";
}

void cmd_build_corpus(CommandContext &ctx) {
  const std::string c = "build-corpus config";
  check_keys(ctx.config,
             {"seed", "deterministic", "out_dir", "vocab", "merges",
              "text_corpus", "smiles_corpus", "lexicon", "case_fold"},
             c);
  const Vocab vocab = load_vocab_input(ctx, need_string(ctx.config, "vocab", c));
  const MergeTable table =
      load_merges_input(ctx, need_string(ctx.config, "merges", c));
  const std::string lexicon_path = need_string(ctx.config, "lexicon", c);
  const bool case_fold = opt_bool(ctx.config, "case_fold", false, c);
  ctx.input(lexicon_path);
  const NameLexicon lexicon = NameLexicon::load(lexicon_path, case_fold);
  if (lexicon.size() == 0) {
    std::cerr << "warning: lexicon '" << lexicon_path
              << "' is empty; the wrapped stream will be empty\n";
  }

  const std::string text_path = need_string(ctx.config, "text_corpus", c);
  const std::string smiles_path = need_string(ctx.config, "smiles_corpus", c);
  ctx.input(text_path);
  ctx.input(smiles_path);
  const auto docs = nonempty_lines(text_path);
  const auto molecules = nonempty_lines(smiles_path);

  const CorpusStreams streams =
      build_corpus(docs, molecules, lexicon, table, vocab);

  const fs::path text_out = ctx.out_dir / "text.stream";
  const fs::path smiles_out = ctx.out_dir / "smiles.stream";
  const fs::path wrapped_out = ctx.out_dir / "wrapped.stream";
  save_stream(text_out, streams.text, streams.vocab_hash);
  save_stream(smiles_out, streams.smiles, streams.vocab_hash);
  save_stream(wrapped_out, streams.wrapped, streams.vocab_hash);
  ctx.output(text_out);
  ctx.output(smiles_out);
  ctx.output(wrapped_out);

  const CorpusStats &s = streams.stats;
  nlohmann::ordered_json stats;
  stats["text_docs"] = s.text_docs;
  stats["smiles_molecules"] = s.smiles_molecules;
  stats["wrapped_docs"] = s.wrapped_docs;
  stats["docs_with_mentions"] = s.docs_with_mentions;
  stats["total_mentions"] = s.total_mentions;
  stats["mention_hit_rate"] =
      s.text_docs == 0
          ? 0.0
          : static_cast<double>(s.docs_with_mentions) / s.text_docs;
  stats["text_tokens"] = s.text_tokens;
  stats["smiles_tokens"] = s.smiles_tokens;
  stats["wrapped_tokens"] = s.wrapped_tokens;
  stats["unknown_tokens"] = s.unknown_tokens;
  stats["vocab_hash"] = hash_hex(streams.vocab_hash);
  const fs::path stats_path = ctx.out_dir / "stats.json";
  write_file(stats_path, stats.dump(2) + "\n");
  ctx.output(stats_path);

  std::cout << "streams: " << s.text_docs << " text / " << s.smiles_molecules
            << " smiles / " << s.wrapped_docs << " wrapped sequences, "
            << s.total_mentions << " mentions in " << s.docs_with_mentions
            << " docs\n";
}

void cmd_pretrain(CommandContext &ctx) {
  const std::string c = "pretrain config";
  check_keys(ctx.config,
             {"seed", "deterministic", "out_dir", "vocab", "streams", "model",
              "train", "resume"},
             c);
  const Vocab vocab = load_vocab_input(ctx, need_string(ctx.config, "vocab", c));
  const uint64_t vocab_hash = vocab.content_hash();

  const json &stream_cfg = need(ctx.config, "streams", c);
  check_keys(stream_cfg, {"text", "smiles", "wrapped"}, c + ".streams");
  CorpusStreams streams;
  streams.vocab_hash = vocab_hash;
  const auto load_one = [&](const char *key,
                            std::vector<std::vector<int32_t>> &dest) {
    const std::string path = need_string(stream_cfg, key, c + ".streams");
    ctx.input(path);
    LoadedStream loaded = load_stream(path);
    if (loaded.vocab_hash != vocab_hash) {
      throw Error(Errc::kData, "stream '" + path +
                                   "' was built with a different vocabulary");
    }
    dest = std::move(loaded.sequences);
  };
  load_one("text", streams.text);
  load_one("smiles", streams.smiles);
  load_one("wrapped", streams.wrapped);

  const json &model_cfg = need(ctx.config, "model", c);
  check_keys(model_cfg,
             {"n_layers", "d_model", "n_heads", "context_len", "dropout"},
             c + ".model");
  ModelConfig mc;
  mc.n_layers = static_cast<int32_t>(need_i64(model_cfg, "n_layers", c));
  mc.d_model = static_cast<int32_t>(need_i64(model_cfg, "d_model", c));
  mc.n_heads = static_cast<int32_t>(need_i64(model_cfg, "n_heads", c));
  mc.context_len = static_cast<int32_t>(need_i64(model_cfg, "context_len", c));
  mc.dropout = opt_double(model_cfg, "dropout", 0.0, c);
  mc.vocab_size = vocab.size();
  mc.validate();

  const json &train_cfg = need(ctx.config, "train", c);
  check_keys(train_cfg,
             {"total_steps", "batch_blocks", "accum_steps", "block_len",
              "peak_lr", "warmup_steps", "grad_clip", "stream_weights",
              "target_loss", "log_every"},
             c + ".train");
  TrainOptions to;
  to.total_steps = need_i64(train_cfg, "total_steps", c);
  to.batch_blocks = opt_i64(train_cfg, "batch_blocks", 4, c);
  to.accum_steps = opt_i64(train_cfg, "accum_steps", 1, c);
  to.block_len =
      static_cast<uint32_t>(need_i64(train_cfg, "block_len", c));
  to.peak_lr = need_double(train_cfg, "peak_lr", c);
  to.warmup_steps = need_i64(train_cfg, "warmup_steps", c);
  to.adam.grad_clip = opt_double(train_cfg, "grad_clip", 0.0, c);
  to.target_loss = opt_double(train_cfg, "target_loss", 0.0, c);
  to.log_every = opt_i64(train_cfg, "log_every", 10, c);
  if (train_cfg.contains("stream_weights")) {
    const auto weights = need_double_list(train_cfg, "stream_weights", c);
    if (weights.size() != 3) {
      throw Error(Errc::kConfig,
                  c + ": 'stream_weights' must have three entries");
    }
    std::copy(weights.begin(), weights.end(), to.stream_weights.begin());
  }
  to.seed = ctx.seed;
  to.deterministic = ctx.deterministic;
  to.log_csv = (ctx.out_dir / "train_log.csv").string();

  Gpt<float> model(mc);
  AdamState<float> opt;
  opt.reset(static_cast<int64_t>(model.params().size()));
  int64_t start_step = 0;
  if (ctx.config.contains("resume")) {
    const std::string resume = need_string(ctx.config, "resume", c);
    ctx.input(resume);
    const Checkpoint ckpt = load_checkpoint(resume);
    if (ckpt.vocab_hash != vocab_hash) {
      throw Error(Errc::kData, "checkpoint '" + resume +
                                   "' was trained with a different vocabulary");
    }
    restore_model(model, opt, ckpt);
    start_step = opt.step;
  } else {
    model.init_params(ctx.seed);
  }

  const TrainResult result =
      train_on_streams(model, opt, streams, to, start_step);

  const fs::path ckpt_path = ctx.out_dir / "model.ckpt";
  save_checkpoint(ckpt_path, model, &opt, vocab_hash, ctx.seed);
  ctx.output(ckpt_path);
  ctx.output(ctx.out_dir / "train_log.csv");

  std::cout << "pretrain: " << result.steps_done << " steps, final loss "
            << result.final_loss << "\n";
}

struct RenderedDataset {
  std::vector<FinetuneExample> examples;
  std::vector<RenderedPrompt> tagless;
  std::vector<int> labels;
  std::vector<std::string> smiles;
};

RenderedDataset render_dataset(const Vocab &vocab, const MergeTable &table,
                               const PromptTemplate &tmpl,
                               const std::string &target_display,
                               const std::vector<LabeledSmiles> &rows,
                               int64_t context_len) {
  RenderedDataset data;
  for (const auto &row : rows) {
    RenderedPrompt with_tag = render_classification_prompt(
        vocab, table, tmpl, target_display, row.smiles, row.label == 1);
    require_prompt_fits(with_tag.ids.size(), context_len,
                        "prompt for '" + row.smiles + "'");
    RenderedPrompt tagless = render_classification_prompt(
        vocab, table, tmpl, target_display, row.smiles, std::nullopt);
    FinetuneExample ex;
    ex.ids = std::move(with_tag.ids);
    ex.label = row.label;
    data.examples.push_back(std::move(ex));
    data.tagless.push_back(std::move(tagless));
    data.labels.push_back(row.label);
    data.smiles.push_back(row.smiles);
  }
  return data;
}

void cmd_finetune(CommandContext &ctx) {
  const std::string c = "finetune config";
  check_keys(ctx.config,
             {"seed", "deterministic", "out_dir", "vocab", "merges",
              "checkpoint", "registry", "task", "target", "train_data",
              "objective", "batch_size", "split", "grid"},
             c);
  const Vocab vocab = load_vocab_input(ctx, need_string(ctx.config, "vocab", c));
  const MergeTable table =
      load_merges_input(ctx, need_string(ctx.config, "merges", c));
  const std::string ckpt_path = need_string(ctx.config, "checkpoint", c);
  ctx.input(ckpt_path);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  if (ckpt.vocab_hash != vocab.content_hash()) {
    throw Error(Errc::kData, "checkpoint '" + ckpt_path +
                                 "' was trained with a different vocabulary");
  }

  const std::string registry_path = need_string(ctx.config, "registry", c);
  ctx.input(registry_path);
  const TaskRegistry registry = TaskRegistry::load(registry_path);
  const std::string task = need_string(ctx.config, "task", c);
  const std::string target = opt_string(ctx.config, "target", "", c);
  const PromptTemplate &tmpl = registry.get(task);
  if (!tmpl.needs_target && !target.empty()) {
    throw Error(Errc::kConfig,
                c + ": task '" + task + "' does not take a target");
  }
  const std::string target_display =
      tmpl.needs_target ? registry.target_name(task, target) : "";

  const std::string objective_name = need_string(ctx.config, "objective", c);
  FinetuneObjective objective;
  if (objective_name == "tags_only") {
    objective = FinetuneObjective::kTagsOnly;
  } else if (objective_name == "full_prompt") {
    objective = FinetuneObjective::kFullPrompt;
  } else {
    throw Error(Errc::kConfig,
                c + ": 'objective' must be tags_only or full_prompt");
  }

  const std::string data_path = need_string(ctx.config, "train_data", c);
  ctx.input(data_path);
  const auto rows = load_labeled_smiles(data_path);

  double frac_train = 0.8;
  double frac_valid = 0.1;
  double frac_test = 0.1;
  if (ctx.config.contains("split")) {
    const json &split_cfg = ctx.config.at("split");
    check_keys(split_cfg, {"train", "valid", "test"}, c + ".split");
    frac_train = need_double(split_cfg, "train", c);
    frac_valid = need_double(split_cfg, "valid", c);
    frac_test = need_double(split_cfg, "test", c);
  }

  // Appendix-style default sweep; configs may narrow it.
  std::vector<double> grid_lrs = {3e-5, 5e-5};
  std::vector<double> grid_dropouts = {0.1, 0.3};
  std::vector<int64_t> grid_epochs = {30, 50};
  if (ctx.config.contains("grid")) {
    const json &grid_cfg = ctx.config.at("grid");
    check_keys(grid_cfg, {"learning_rates", "dropouts", "epochs"}, c + ".grid");
    grid_lrs = need_double_list(grid_cfg, "learning_rates", c + ".grid");
    grid_dropouts = need_double_list(grid_cfg, "dropouts", c + ".grid");
    grid_epochs.clear();
    for (double e : need_double_list(grid_cfg, "epochs", c + ".grid")) {
      grid_epochs.push_back(static_cast<int64_t>(e));
    }
  }
  const int64_t batch_size = opt_i64(ctx.config, "batch_size", 8, c);

  const RenderedDataset data = render_dataset(
      vocab, table, tmpl, target_display, rows, ckpt.config.context_len);
  const ScaffoldSplit split =
      scaffold_split(data.smiles, frac_train, frac_valid, frac_test);

  std::vector<FinetuneExample> train_set;
  for (int64_t i : split.train) train_set.push_back(data.examples[i]);
  if (train_set.empty()) {
    throw Error(Errc::kData, "scaffold split left the train set empty");
  }

  const int32_t positive = tag_id(vocab, tmpl.positive_tag);
  const int32_t negative = tag_id(vocab, tmpl.negative_tag);

  json grid_report = json::array();
  std::optional<Gpt<float>> best_model;
  double best_auc = -1.0;
  json best_point;
  for (double lr : grid_lrs) {
    for (double dropout : grid_dropouts) {
      for (int64_t epochs : grid_epochs) {
        ModelConfig mc = ckpt.config;
        mc.dropout = dropout;
        Gpt<float> model(mc);
        AdamState<float> opt;
        restore_model(model, opt, ckpt);
        opt.reset(static_cast<int64_t>(model.params().size()));

        FinetuneOptions options;
        options.objective = objective;
        options.learning_rate = lr;
        options.epochs = epochs;
        options.batch_size = batch_size;
        options.seed = ctx.seed;
        options.deterministic = ctx.deterministic;
        const FinetuneResult fit = finetune(model, opt, train_set, options);

        const double valid_auc = auc_over(model, data.tagless, data.labels,
                                          split.valid, positive, negative);
        json point = {{"learning_rate", lr},
                      {"dropout", dropout},
                      {"epochs", epochs},
                      {"train_loss", fit.final_loss},
                      {"valid_auc", valid_auc}};
        grid_report.push_back(point);
        std::cout << "grid lr=" << lr << " dropout=" << dropout
                  << " epochs=" << epochs << " -> valid auc " << valid_auc
                  << "\n";
        if (valid_auc > best_auc) {
          best_auc = valid_auc;
          best_model = std::move(model);
          best_point = std::move(point);
        }
      }
    }
  }

  const double test_auc = auc_over(*best_model, data.tagless, data.labels,
                                   split.test, positive, negative);

  const fs::path out_ckpt = ctx.out_dir / "finetuned.ckpt";
  save_checkpoint(out_ckpt, *best_model, nullptr, vocab.content_hash(),
                  ctx.seed);
  ctx.output(out_ckpt);

  nlohmann::ordered_json metrics;
  metrics["task"] = task;
  if (!target.empty()) metrics["target"] = target;
  metrics["objective"] = objective_name;
  metrics["split_sizes"] = {{"train", split.train.size()},
                            {"valid", split.valid.size()},
                            {"test", split.test.size()}};
  metrics["grid"] = grid_report;
  metrics["chosen"] = best_point;
  metrics["valid_auc"] = best_auc;
  metrics["test_auc"] = test_auc;
  const fs::path metrics_path = ctx.out_dir / "metrics.json";
  write_file(metrics_path, metrics.dump(2) + "\n");
  ctx.output(metrics_path);

  std::cout << "finetune: valid auc " << best_auc << ", test auc " << test_auc
            << "\n";
}

void cmd_classify(CommandContext &ctx) {
  const std::string c = "classify config";
  check_keys(ctx.config,
             {"seed", "deterministic", "out_dir", "vocab", "merges",
              "checkpoint", "registry", "task", "target", "data"},
             c);
  const Vocab vocab = load_vocab_input(ctx, need_string(ctx.config, "vocab", c));
  const MergeTable table =
      load_merges_input(ctx, need_string(ctx.config, "merges", c));
  const std::string ckpt_path = need_string(ctx.config, "checkpoint", c);
  ctx.input(ckpt_path);
  Gpt<float> model = model_from_checkpoint(load_checkpoint(ckpt_path),
                                           vocab.content_hash(), ckpt_path);

  const std::string registry_path = need_string(ctx.config, "registry", c);
  ctx.input(registry_path);
  const TaskRegistry registry = TaskRegistry::load(registry_path);
  const std::string task = need_string(ctx.config, "task", c);
  const std::string target = opt_string(ctx.config, "target", "", c);
  const PromptTemplate &tmpl = registry.get(task);
  const std::string target_display =
      tmpl.needs_target ? registry.target_name(task, target) : "";

  const std::string data_path = need_string(ctx.config, "data", c);
  ctx.input(data_path);
  const auto lines = nonempty_lines(data_path);
  if (lines.empty()) {
    throw Error(Errc::kData, "no examples in " + data_path);
  }
  const bool labeled =
      std::all_of(lines.begin(), lines.end(), [](const std::string &line) {
        return line.find('\t') != std::string::npos;
      });

  std::vector<std::string> smiles;
  std::vector<int> labels;
  if (labeled) {
    for (const auto &row : load_labeled_smiles(data_path)) {
      smiles.push_back(row.smiles);
      labels.push_back(row.label);
    }
  } else {
    smiles = lines;
  }

  const int32_t positive = tag_id(vocab, tmpl.positive_tag);
  const int32_t negative = tag_id(vocab, tmpl.negative_tag);

  std::ostringstream csv;
  csv << "id,score\n";
  csv.precision(10);
  csv << std::fixed;
  std::vector<double> scores;
  for (size_t i = 0; i < smiles.size(); ++i) {
    const RenderedPrompt prompt = render_classification_prompt(
        vocab, table, tmpl, target_display, smiles[i], std::nullopt);
    require_prompt_fits(prompt.ids.size(), model.config().context_len,
                        "prompt for '" + smiles[i] + "'");
    const double score =
        classify_prompt(model, prompt.ids, positive, negative).positive;
    scores.push_back(score);
    csv << i << ',' << score << '\n';
  }
  const fs::path csv_path = ctx.out_dir / "predictions.csv";
  write_file(csv_path, csv.str());
  ctx.output(csv_path);

  if (labeled) {
    const double auc = roc_auc(scores, labels);
    nlohmann::ordered_json metrics;
    metrics["examples"] = smiles.size();
    metrics["auc"] = auc;
    const fs::path metrics_path = ctx.out_dir / "metrics.json";
    write_file(metrics_path, metrics.dump(2) + "\n");
    ctx.output(metrics_path);
    std::cout << "classify: " << smiles.size() << " examples, auc " << auc
              << "\n";
  } else {
    std::cout << "classify: " << smiles.size() << " examples scored\n";
  }
}

void cmd_generate(CommandContext &ctx) {
  const std::string c = "generate config";
  check_keys(ctx.config,
             {"seed", "deterministic", "out_dir", "vocab", "merges",
              "checkpoint", "mode", "prompts", "decoding"},
             c);
  const Vocab vocab = load_vocab_input(ctx, need_string(ctx.config, "vocab", c));
  const MergeTable table =
      load_merges_input(ctx, need_string(ctx.config, "merges", c));
  const std::string ckpt_path = need_string(ctx.config, "checkpoint", c);
  ctx.input(ckpt_path);
  Gpt<float> model = model_from_checkpoint(load_checkpoint(ckpt_path),
                                           vocab.content_hash(), ckpt_path);

  const std::string mode = need_string(ctx.config, "mode", c);
  if (mode != "text_to_molecule" && mode != "molecule_to_text") {
    throw Error(Errc::kConfig,
                c + ": 'mode' must be text_to_molecule or molecule_to_text");
  }
  const bool to_molecule = mode == "text_to_molecule";

  GenerateOptions base;
  base.greedy = true;
  int64_t num_samples = 1;
  if (ctx.config.contains("decoding")) {
    const json &dec = ctx.config.at("decoding");
    check_keys(dec, {"greedy", "top_k", "max_new_tokens", "num_samples"},
               c + ".decoding");
    base.greedy = opt_bool(dec, "greedy", true, c);
    base.top_k = static_cast<int32_t>(opt_i64(dec, "top_k", 50, c));
    base.max_new_tokens = opt_i64(dec, "max_new_tokens", 128, c);
    num_samples = opt_i64(dec, "num_samples", 1, c);
  } else {
    base.max_new_tokens = 128;
  }
  if (num_samples < 1) {
    throw Error(Errc::kConfig, c + ": 'num_samples' must be at least 1");
  }
  base.stop_tokens = {to_molecule ? Vocab::kEom : Vocab::kEos};

  const std::string prompts_path = need_string(ctx.config, "prompts", c);
  ctx.input(prompts_path);
  const auto prompts = nonempty_lines(prompts_path);
  if (prompts.empty()) {
    throw Error(Errc::kData, "no prompts in " + prompts_path);
  }

  // A molecule whose decode trips on a sentinel is emitted as an empty
  // string, which downstream metrics count as invalid.
  const auto decode = [&](const Generation &gen) -> std::string {
    if (!to_molecule) return decode_text(gen.tokens, vocab);
    try {
      return tokens_to_smiles(vocab, gen.tokens);
    } catch (const Error &) {
      return std::string();
    }
  };

  std::ostringstream out;
  for (size_t i = 0; i < prompts.size(); ++i) {
    const RenderedPrompt prompt =
        to_molecule
            ? render_text_to_molecule_prompt(vocab, table, prompts[i])
            : render_molecule_to_text_prompt(vocab, table, prompts[i]);
    GenerateOptions options = base;
    options.seed = derive_seed(ctx.seed, 6, static_cast<uint64_t>(i));
    if (num_samples == 1) {
      out << decode(generate(model, prompt.ids, options));
    } else {
      const auto candidates =
          generate_k(model, prompt.ids, options, num_samples);
      for (size_t k = 0; k < candidates.size(); ++k) {
        if (k > 0) out << '\t';
        out << decode(candidates[k]);
      }
    }
    out << '\n';
  }
  const fs::path out_path = ctx.out_dir / "generations.txt";
  write_file(out_path, out.str());
  ctx.output(out_path);

  std::cout << "generate: " << prompts.size() << " prompts -> "
            << out_path.string() << "\n";
}

void cmd_evaluate(CommandContext &ctx) {
  const std::string c = "evaluate config";
  check_keys(ctx.config,
             {"seed", "deterministic", "out_dir", "direction", "generated",
              "references", "smooth_bleu"},
             c);
  const std::string direction = need_string(ctx.config, "direction", c);
  if (direction != "molecule_to_text" && direction != "text_to_molecule") {
    throw Error(Errc::kConfig,
                c + ": 'direction' must be molecule_to_text or "
                    "text_to_molecule");
  }
  const std::string gen_path = need_string(ctx.config, "generated", c);
  const std::string ref_path = need_string(ctx.config, "references", c);
  ctx.input(gen_path);
  ctx.input(ref_path);
  const auto generated = read_lines(gen_path);
  const auto references = read_lines(ref_path);

  TranslationReport report;
  if (direction == "molecule_to_text") {
    report.mol_to_text = text_generation_metrics(
        generated, references, opt_bool(ctx.config, "smooth_bleu", false, c));
    report.mol_to_text_pairs = static_cast<int64_t>(generated.size());
  } else {
    const MoleculeReport mols = molecule_metrics(generated, references);
    report.text_to_mol = {{"exact", mols.exact},
                          {"morgan_sim", mols.morgan_sim},
                          {"path_sim", mols.path_sim},
                          {"validity", mols.validity}};
    report.text_to_mol_pairs = mols.pairs;
  }

  const fs::path report_path = ctx.out_dir / "report.json";
  write_file(report_path, report_json(report));
  ctx.output(report_path);
  std::cout << report_table(report);
}

TranslationReport parse_report_file(const fs::path &path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception &e) {
    throw Error(Errc::kData,
                "report '" + path.string() + "' is not valid JSON: " +
                    e.what());
  }
  TranslationReport report;
  const auto read_side = [&](const char *key,
                             std::map<std::string, double> &dest,
                             int64_t &pairs) {
    if (!doc.contains(key)) return;
    for (const auto &[name, value] : doc.at(key).items()) {
      if (name == "pairs") {
        pairs = value.get<int64_t>();
      } else {
        dest[name] = value.get<double>();
      }
    }
  };
  read_side("molecule_to_text", report.mol_to_text, report.mol_to_text_pairs);
  read_side("text_to_molecule", report.text_to_mol, report.text_to_mol_pairs);
  if (report.mol_to_text.empty() && report.text_to_mol.empty()) {
    throw Error(Errc::kData,
                "report '" + path.string() + "' holds no metric sections");
  }
  return report;
}

void cmd_report(CommandContext &ctx) {
  const std::string c = "report config";
  check_keys(ctx.config, {"seed", "deterministic", "out_dir", "report"}, c);
  const std::string report_path = need_string(ctx.config, "report", c);
  ctx.input(report_path);
  std::cout << report_table(parse_report_file(report_path));
}

}  // namespace

nlohmann::json RunManifest::to_json() const {
  nlohmann::ordered_json doc;
  doc["command"] = command;
  doc["config"] = config;
  doc["inputs"] = input_hashes;
  doc["outputs"] = output_hashes;
  doc["seed"] = seed;
  doc["wall_seconds"] = wall_seconds;
  return doc;
}

RunManifest RunManifest::from_json(const nlohmann::json &doc) {
  RunManifest manifest;
  manifest.command = doc.at("command").get<std::string>();
  manifest.config = doc.at("config");
  manifest.input_hashes =
      doc.at("inputs").get<std::map<std::string, std::string>>();
  manifest.output_hashes =
      doc.at("outputs").get<std::map<std::string, std::string>>();
  manifest.seed = doc.at("seed").get<uint64_t>();
  manifest.wall_seconds = doc.at("wall_seconds").get<double>();
  return manifest;
}

nlohmann::json load_config(const std::filesystem::path &path) {
  json config;
  try {
    config = json::parse(read_file(path));
  } catch (const json::exception &e) {
    throw Error(Errc::kConfig,
                "config '" + path.string() + "' is not valid JSON: " +
                    e.what());
  }
  if (!config.is_object()) {
    throw Error(Errc::kConfig,
                "config '" + path.string() + "' must be a JSON object");
  }
  return config;
}

RunManifest run_command(const std::string &command,
                        const nlohmann::json &config,
                        const CliOverrides &overrides) {
  CommandContext ctx;
  ctx.config = config;
  if (overrides.seed) ctx.config["seed"] = *overrides.seed;
  if (overrides.deterministic) {
    ctx.config["deterministic"] = *overrides.deterministic;
  }
  if (overrides.out_dir) ctx.config["out_dir"] = *overrides.out_dir;

  ctx.seed = need_u64(ctx.config, "seed", command + " config");
  ctx.deterministic =
      opt_bool(ctx.config, "deterministic", true, command + " config");
  if (ctx.deterministic) set_deterministic_compute();

  const bool out_dir_optional = command == "report";
  if (!out_dir_optional || ctx.config.contains("out_dir")) {
    ctx.out_dir =
        need_string(ctx.config, "out_dir", command + " config");
    std::filesystem::create_directories(ctx.out_dir);
  }

  ctx.manifest.command = command;
  ctx.manifest.seed = ctx.seed;

  const auto started = std::chrono::steady_clock::now();
  if (command == "tokenize") {
    cmd_tokenize(ctx);
  } else if (command == "build-corpus") {
    cmd_build_corpus(ctx);
  } else if (command == "pretrain") {
    cmd_pretrain(ctx);
  } else if (command == "finetune") {
    cmd_finetune(ctx);
  } else if (command == "classify") {
    cmd_classify(ctx);
  } else if (command == "generate") {
    cmd_generate(ctx);
  } else if (command == "evaluate") {
    cmd_evaluate(ctx);
  } else if (command == "report") {
    cmd_report(ctx);
  } else {
    throw Error(Errc::kConfig, "unknown command '" + command + "'");
  }
  ctx.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  ctx.manifest.config = ctx.config;

  if (!ctx.out_dir.empty()) {
    write_file(ctx.out_dir / "manifest.json",
               ctx.manifest.to_json().dump(2) + "\n");
  }
  return ctx.manifest;
}

}  // namespace moltext
