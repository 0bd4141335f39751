//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moltext/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "moltext/smiles.hpp"
#include "moltext/tokenize.hpp"

using namespace moltext;

namespace {

std::filesystem::path registry_path() {
  return std::filesystem::path(MOLTEXT_SOURCE_DIR) / "data" /
         "task_registry.json";
}

struct Toolkit {
  BpeTrainResult bpe;
  Vocab vocab;
};

const Toolkit &toolkit() {
  static const Toolkit kit = [] {
    const std::vector<std::string> docs = {
        "We can conclude that the BBB penetration of is true or false",
        "We can conclude that the activity outcome on Androgen Receptor is "
        "active or inactive",
        "We can conclude that the clinical trial toxicity of is true",
        "We can conclude that the FDA approval status of is false",
        "We can conclude that the screening result of ability to inhibit HIV "
        "replication of is active",
        "We can conclude that the binding result on beta-secretase 1 of is "
        "true",
        "We can conclude that the can bring about the side effect of "
        "headache is true",
        "The description of is: The molecule is a small diol compound.",
        "A red dye. The compound is water soluble and sweet.",
        "It is an alcohol with two carbons. It tastes sweet and burns "
        "quickly.",
    };
    Toolkit built;
    built.bpe = bpe_train(docs, 60, {});
    std::vector<std::string> smiles_tokens;
    for (const char *s :
         {"CCO", "CC(C)O", "c1ccccc1", "CC(=O)N", "[NH4+]", "ClCCBr", "C#N",
          "OCC(O)CO", "C1CO1", "C1CS1", "C1CN1", "C1CC1", "C1CCC1", "C1CCCC1",
          "C1CCCCC1", "C1CCOC1", "C1CCNC1", "C1CCSC1", "C1CCCCCC1",
          "O=S(=O)(O)O"}) {
      auto tokens = smiles_tokenize(s);
      REQUIRE(tokens.ok());
      for (auto &t : tokens.value()) smiles_tokens.push_back(std::move(t));
    }
    built.vocab = build_vocab(
        built.bpe, smiles_tokens,
        {"true</w>", "false</w>", "active</w>", "inactive</w>"});
    return built;
  }();
  return kit;
}

std::vector<int32_t> slice(const std::vector<int32_t> &ids, size_t from,
                           size_t to) {
  return std::vector<int32_t>(ids.begin() + from, ids.begin() + to);
}

size_t index_of(const std::vector<int32_t> &ids, int32_t value) {
  const auto it = std::find(ids.begin(), ids.end(), value);
  REQUIRE(it != ids.end());
  return static_cast<size_t>(it - ids.begin());
}

// Per-example NLL of one position, recomputed from raw logits in double.
double position_nll(Gpt<float> &model, const std::vector<int32_t> &inputs,
                    size_t position, int32_t target) {
  auto logits = model.forward(inputs, 1, inputs.size());
  const int64_t v = model.config().vocab_size;
  const auto *row = logits.data() + position * v;
  double max_val = row[0];
  for (int64_t j = 1; j < v; ++j) max_val = std::max(max_val, double(row[j]));
  double sum = 0.0;
  for (int64_t j = 0; j < v; ++j) sum += std::exp(double(row[j]) - max_val);
  return -(double(row[target]) - max_val - std::log(sum));
}

ModelConfig task_model_config(int32_t vocab_size) {
  ModelConfig config;
  config.n_layers = 2;
  config.d_model = 32;
  config.n_heads = 4;
  config.context_len = 64;
  config.vocab_size = vocab_size;
  return config;
}

}  // namespace

TEST_CASE("registry templates reproduce the published prompt wordings") {
  TaskRegistry reg = TaskRegistry::load(registry_path());

  const auto &bbbp = reg.get("bbbp");
  CHECK(bbbp.prefix == "We can conclude that the BBB penetration of");
  CHECK(bbbp.suffix == "is");
  CHECK(bbbp.positive_tag == "true");
  CHECK(bbbp.negative_tag == "false");
  CHECK_FALSE(bbbp.needs_target);

  const auto &tox21 = reg.get("tox21");
  CHECK(tox21.prefix == "We can conclude that the");
  CHECK(tox21.needs_target);
  CHECK(reg.target_name("tox21", "NR-AR") == "Androgen Receptor");
  const auto wording =
      prompt_wording(tox21, reg.target_name("tox21", "NR-AR"));
  CHECK(wording.first == "We can conclude that the");
  CHECK(wording.second == "activity outcome on Androgen Receptor is");
  CHECK(tox21.positive_tag == "active");
  CHECK(tox21.negative_tag == "inactive");

  CHECK(reg.get("clintox_ct_tox").prefix ==
        "We can conclude that the clinical trial toxicity of");
  CHECK(reg.get("clintox_fda_approved").prefix ==
        "We can conclude that the FDA approval status of");
  CHECK(reg.get("hiv").prefix ==
        "We can conclude that the screening result of ability to inhibit HIV "
        "replication of");
  CHECK(reg.get("hiv").positive_tag == "active");
  CHECK(reg.get("bace").prefix ==
        "We can conclude that the binding result on beta-secretase 1 of");
  const auto sider = prompt_wording(reg.get("sider"), "headache");
  CHECK(sider.second == "can bring about the side effect of headache is");

  CHECK(reg.task_names().size() == 7);
  CHECK_THROWS_AS((void)reg.get("nope"), Error);
  CHECK_THROWS_AS((void)reg.target_name("tox21", "XX"), Error);
  CHECK_THROWS_AS((void)reg.target_name("bbbp", "NR-AR"), Error);
  CHECK_THROWS_AS((void)prompt_wording(tox21, ""), Error);
}

TEST_CASE("registry load rejects malformed files") {
  const auto dir = std::filesystem::temp_directory_path() / "moltext_tasks";
  std::filesystem::create_directories(dir);
  const auto bad_json = dir / "bad.json";
  std::ofstream(bad_json) << "{ not json";
  CHECK_THROWS_AS(TaskRegistry::load(bad_json), Error);

  const auto unknown_key = dir / "unknown.json";
  std::ofstream(unknown_key)
      << R"({"tasks": {"a": {"prefix": "p", "suffix": "s", "positive": "t",)"
      << R"( "negative": "f", "extra": 1}}})";
  CHECK_THROWS_AS(TaskRegistry::load(unknown_key), Error);

  CHECK_THROWS_AS(TaskRegistry::load(dir / "absent.json"), Error);
}

TEST_CASE("classification prompt renders prefix, molecule span, suffix, tag") {
  const Toolkit &kit = toolkit();
  TaskRegistry reg = TaskRegistry::load(registry_path());
  const auto rendered = render_classification_prompt(
      kit.vocab, kit.bpe.table, reg.get("bbbp"), "", "CC", true);
  const auto &ids = rendered.ids;
  CHECK(rendered.unknown_count == 0);
  REQUIRE(ids.size() > 6);
  CHECK(ids.front() == Vocab::kBos);

  const size_t som = index_of(ids, Vocab::kSom);
  const size_t eom = index_of(ids, Vocab::kEom);
  REQUIRE(som < eom);
  CHECK(decode_text(slice(ids, 1, som), kit.vocab) ==
        "We can conclude that the BBB penetration of");
  const auto body = slice(ids, som + 1, eom);
  REQUIRE(body.size() == 2);
  CHECK(kit.vocab.token(body[0]) == "C");
  CHECK(kit.vocab.token(body[1]) == "C");
  CHECK(decode_text(slice(ids, eom + 1, ids.size() - 1), kit.vocab) == "is");
  CHECK(ids.back() == kit.vocab.id_of("true</w>").value());

  // Same prompt without a label stops right before the tag slot.
  const auto tagless = render_classification_prompt(
      kit.vocab, kit.bpe.table, reg.get("bbbp"), "", "CC", std::nullopt);
  CHECK(tagless.ids ==
        std::vector<int32_t>(ids.begin(), ids.end() - 1));

  // The negative label picks the other tag token.
  const auto negative = render_classification_prompt(
      kit.vocab, kit.bpe.table, reg.get("bbbp"), "", "CC", false);
  CHECK(negative.ids.back() == kit.vocab.id_of("false</w>").value());

  // Target substitution lands inside the rendered suffix.
  const auto tox = render_classification_prompt(
      kit.vocab, kit.bpe.table, reg.get("tox21"), "Androgen Receptor", "CCO",
      false);
  const size_t tox_eom = index_of(tox.ids, Vocab::kEom);
  CHECK(decode_text(slice(tox.ids, tox_eom + 1, tox.ids.size() - 1),
                    kit.vocab) ==
        "activity outcome on Androgen Receptor is");
  CHECK(tox.ids.back() == kit.vocab.id_of("inactive</w>").value());
}

TEST_CASE("translation prompts follow the two generation templates") {
  const Toolkit &kit = toolkit();

  const auto m2t =
      render_molecule_to_text_prompt(kit.vocab, kit.bpe.table, "CCO");
  CHECK(m2t.ids.front() == Vocab::kBos);
  const size_t som = index_of(m2t.ids, Vocab::kSom);
  const size_t eom = index_of(m2t.ids, Vocab::kEom);
  CHECK(decode_text(slice(m2t.ids, 1, som), kit.vocab) ==
        "The description of");
  CHECK(decode_text(slice(m2t.ids, eom + 1, m2t.ids.size()), kit.vocab) ==
        "is: The molecule is");

  const auto t2m = render_text_to_molecule_prompt(kit.vocab, kit.bpe.table,
                                                  "It is a small diol.");
  CHECK(t2m.ids.front() == Vocab::kBos);
  CHECK(t2m.ids.back() == Vocab::kSom);
  CHECK(decode_text(slice(t2m.ids, 1, t2m.ids.size() - 1), kit.vocab) ==
        "It is a small diol. The compound is");

  // A missing final period is added exactly once.
  const auto dotted = render_text_to_molecule_prompt(kit.vocab, kit.bpe.table,
                                                     "A red dye");
  CHECK(decode_text(slice(dotted.ids, 1, dotted.ids.size() - 1), kit.vocab) ==
        "A red dye. The compound is");

  CHECK_THROWS_AS(
      render_text_to_molecule_prompt(kit.vocab, kit.bpe.table, ""), Error);
}

TEST_CASE("translation examples append the answer and its terminator") {
  const Toolkit &kit = toolkit();

  const auto m2t = render_molecule_to_text_example(
      kit.vocab, kit.bpe.table, "CCO", "It is a small diol.");
  CHECK(m2t.ids.back() == Vocab::kEos);
  const auto prompt =
      render_molecule_to_text_prompt(kit.vocab, kit.bpe.table, "CCO");
  CHECK(m2t.completion_start == static_cast<int64_t>(prompt.ids.size()));
  CHECK(decode_text(slice(m2t.ids, m2t.completion_start, m2t.ids.size() - 1),
                    kit.vocab) == "It is a small diol.");

  const auto t2m = render_text_to_molecule_example(
      kit.vocab, kit.bpe.table, "It is a small diol.", "OCC(O)CO");
  CHECK(t2m.ids.back() == Vocab::kEom);
  CHECK(t2m.ids[t2m.completion_start - 1] == Vocab::kSom);
  const auto body =
      slice(t2m.ids, t2m.completion_start, t2m.ids.size() - 1);
  CHECK(tokens_to_smiles(kit.vocab, body) == "OCC(O)CO");

  CHECK_THROWS_AS(
      tokens_to_smiles(kit.vocab, std::vector<int32_t>{Vocab::kSom}), Error);
}

TEST_CASE("finetune batches carry the two objective weightings") {
  FinetuneExample a;
  a.ids = {Vocab::kBos, 10, 11, 12};
  a.label = 1;
  FinetuneExample b;
  b.ids = {Vocab::kBos, 10, 13};
  b.label = 0;
  const std::vector<FinetuneExample> examples = {a, b};

  const Batch tags = make_finetune_batch(examples, FinetuneObjective::kTagsOnly);
  CHECK(tags.batch == 2);
  CHECK(tags.time == 3);
  const auto pad = static_cast<int32_t>(Vocab::kPad);
  // The shorter example's last token stays as a weight-0 input.
  CHECK(tags.ids == std::vector<int32_t>{Vocab::kBos, 10, 11,  //
                                         Vocab::kBos, 10, 13});
  CHECK(tags.targets == std::vector<int32_t>{10, 11, 12,  //
                                             10, 13, pad});
  CHECK(tags.weights == std::vector<float>{0, 0, 1,  //
                                           0, 1, 0});

  const Batch full =
      make_finetune_batch(examples, FinetuneObjective::kFullPrompt);
  const float third = static_cast<float>(1.0 / 3.0);
  CHECK(full.weights == std::vector<float>{third, third, third,  //
                                           0.5f, 0.5f, 0});

  CHECK_THROWS_AS(
      make_finetune_batch({}, FinetuneObjective::kTagsOnly), Error);

  TranslationExample t;
  t.ids = {Vocab::kBos, 5, 6, 7, 8};
  t.completion_start = 3;
  const Batch completion = make_completion_batch(std::vector{t});
  CHECK(completion.weights == std::vector<float>{0, 0, 0.5f, 0.5f});
  t.completion_start = 5;
  CHECK_THROWS_AS(make_completion_batch(std::vector{t}), Error);
}

TEST_CASE("batched objective losses match per-example recomputation") {
  const Toolkit &kit = toolkit();
  TaskRegistry reg = TaskRegistry::load(registry_path());
  Gpt<float> model(task_model_config(kit.vocab.size()));
  model.init_params(77);

  std::vector<FinetuneExample> examples;
  for (const auto &[smiles, label] :
       std::vector<std::pair<std::string, int>>{
           {"CCO", 1}, {"CC(C)O", 0}, {"C1CC1", 1}, {"ClCCBr", 0}}) {
    auto rendered = render_classification_prompt(
        kit.vocab, kit.bpe.table, reg.get("bbbp"), "", smiles, label == 1);
    FinetuneExample ex;
    ex.ids = std::move(rendered.ids);
    ex.label = label;
    examples.push_back(std::move(ex));
  }

  // Tags only: the batch loss is the mean NLL of each example's tag.
  const Batch tags =
      make_finetune_batch(examples, FinetuneObjective::kTagsOnly);
  model.forward(tags.ids, tags.batch, tags.time);
  const double tags_loss = model.loss(tags.targets, tags.weights);
  double tag_sum = 0.0;
  for (const auto &ex : examples) {
    const std::vector<int32_t> inputs(ex.ids.begin(), ex.ids.end() - 1);
    tag_sum +=
        position_nll(model, inputs, inputs.size() - 1, ex.ids.back());
  }
  CHECK(tags_loss ==
        doctest::Approx(tag_sum / examples.size()).epsilon(1e-6));

  // Full prompt: per-sequence mean over every position, then batch mean.
  const Batch full =
      make_finetune_batch(examples, FinetuneObjective::kFullPrompt);
  model.forward(full.ids, full.batch, full.time);
  const double full_loss = model.loss(full.targets, full.weights);
  double seq_sum = 0.0;
  for (const auto &ex : examples) {
    const std::vector<int32_t> inputs(ex.ids.begin(), ex.ids.end() - 1);
    double seq = 0.0;
    for (size_t pos = 0; pos < inputs.size(); ++pos) {
      seq += position_nll(model, inputs, pos, ex.ids[pos + 1]);
    }
    seq_sum += seq / static_cast<double>(inputs.size());
  }
  CHECK(full_loss ==
        doctest::Approx(seq_sum / examples.size()).epsilon(1e-6));
}

TEST_CASE("classification normalizes the two tag probabilities") {
  const Toolkit &kit = toolkit();
  TaskRegistry reg = TaskRegistry::load(registry_path());
  Gpt<float> model(task_model_config(kit.vocab.size()));
  model.init_params(13);

  const auto prompt = render_classification_prompt(
      kit.vocab, kit.bpe.table, reg.get("bbbp"), "", "CCO", std::nullopt);
  const int32_t pos_tag = kit.vocab.id_of("true</w>").value();
  const int32_t neg_tag = kit.vocab.id_of("false</w>").value();
  const TagProbabilities probs =
      classify_prompt(model, prompt.ids, pos_tag, neg_tag);

  CHECK(probs.positive + probs.negative == 1.0);
  CHECK(probs.positive > 0.0);
  CHECK(probs.positive < 1.0);

  // Equals p_pos / (p_pos + p_neg) under the full-vocabulary softmax.
  auto logits = model.forward(prompt.ids, 1, prompt.ids.size());
  const int64_t v = model.config().vocab_size;
  const auto *row = logits.data() + (prompt.ids.size() - 1) * v;
  double max_val = row[0];
  for (int64_t j = 1; j < v; ++j) max_val = std::max(max_val, double(row[j]));
  double sum = 0.0;
  for (int64_t j = 0; j < v; ++j) sum += std::exp(double(row[j]) - max_val);
  const double p_pos = std::exp(double(row[pos_tag]) - max_val) / sum;
  const double p_neg = std::exp(double(row[neg_tag]) - max_val) / sum;
  CHECK(probs.positive ==
        doctest::Approx(p_pos / (p_pos + p_neg)).epsilon(1e-9));

  // Swapping the tag roles complements the score exactly.
  const TagProbabilities swapped =
      classify_prompt(model, prompt.ids, neg_tag, pos_tag);
  CHECK(swapped.positive == probs.negative);

  CHECK_THROWS_AS(classify_prompt(model, prompt.ids, pos_tag, pos_tag),
                  Error);
}

TEST_CASE("roc_auc matches the exhaustive pairwise oracle") {
  const std::vector<double> scores = {0.1, 0.4, 0.35, 0.8};
  const std::vector<int> labels = {0, 0, 1, 1};
  CHECK(roc_auc(scores, labels) == 0.75);

  CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.8, 0.9},
                std::vector<int>{0, 0, 1, 1}) == 1.0);
  CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5, 0.5},
                std::vector<int>{0, 1, 0, 1}) == 0.5);

  Rng rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 2 + rng.below(48);
    std::vector<double> s(n);
    std::vector<int> l(n);
    bool has_pos = false;
    bool has_neg = false;
    for (size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(8)) / 8.0;  // force ties
      l[i] = static_cast<int>(rng.below(2));
      (l[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
      CHECK_THROWS_AS(roc_auc(s, l), Error);
      continue;
    }
    double wins = 0.0;
    uint64_t pairs = 0;
    for (size_t i = 0; i < n; ++i) {
      if (l[i] != 1) continue;
      for (size_t j = 0; j < n; ++j) {
        if (l[j] != 0) continue;
        ++pairs;
        if (s[i] > s[j]) {
          wins += 1.0;
        } else if (s[i] == s[j]) {
          wins += 0.5;
        }
      }
    }
    CHECK(roc_auc(s, l) == wins / static_cast<double>(pairs));
  }

  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2},
                          std::vector<int>{1, 1}),
                  Error);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2},
                          std::vector<int>{0, 2}),
                  Error);
}

TEST_CASE("scaffold split fills quotas with whole groups, largest first") {
  // Ten distinct single-molecule scaffolds -> 8/1/1 at (0.8, 0.1, 0.1).
  const std::vector<std::string> singletons = {
      "C1CC1",    "C1CCC1",   "C1CCCC1",  "C1CCCCC1", "c1ccccc1",
      "C1CCOC1",  "C1CCNC1",  "C1CCSC1",  "C1CO1",    "C1CS1"};
  const ScaffoldSplit split = scaffold_split(singletons, 0.8, 0.1, 0.1);
  CHECK(split.train.size() == 8);
  CHECK(split.valid.size() == 1);
  CHECK(split.test.size() == 1);

  // One shared scaffold -> everything lands in train.
  const std::vector<std::string> shared = {"CCc1ccccc1", "c1ccccc1",
                                           "Cc1ccccc1C"};
  const ScaffoldSplit one = scaffold_split(shared, 0.34, 0.33, 0.33);
  CHECK(one.train.size() == 3);
  CHECK(one.valid.empty());
  CHECK(one.test.empty());

  CHECK_THROWS_AS(scaffold_split(shared, 0.5, 0.5, 0.5), Error);
  CHECK_THROWS_AS(
      scaffold_split(std::vector<std::string>{"C(("}, 0.8, 0.1, 0.1), Error);
}

TEST_CASE("scaffold split partitions and co-locates scaffold mates") {
  Rng rng(2024);
  std::vector<std::string> molecules;
  for (int i = 0; i < 100; ++i) {
    molecules.push_back(
        write_canonical(moltext::testing::random_molecule(rng)));
  }
  const ScaffoldSplit split = scaffold_split(molecules, 0.8, 0.1, 0.1);

  std::vector<int> where(molecules.size(), -1);
  auto mark = [&](const std::vector<int64_t> &part, int which) {
    for (int64_t idx : part) {
      REQUIRE(idx >= 0);
      REQUIRE(idx < static_cast<int64_t>(molecules.size()));
      CHECK(where[idx] == -1);  // disjoint
      where[idx] = which;
    }
  };
  mark(split.train, 0);
  mark(split.valid, 1);
  mark(split.test, 2);
  for (int w : where) CHECK(w != -1);  // covering

  std::map<std::string, std::set<int>> group_splits;
  for (size_t i = 0; i < molecules.size(); ++i) {
    const auto mol = parse_smiles(molecules[i]);
    REQUIRE(mol.ok());
    group_splits[scaffold_key(mol.value())].insert(where[i]);
  }
  for (const auto &[key, parts] : group_splits) {
    CHECK(parts.size() == 1);  // a scaffold never straddles splits
  }
}

TEST_CASE("finetuning separates a synthetic oxygen-vs-carbon set") {
  const Toolkit &kit = toolkit();
  TaskRegistry reg = TaskRegistry::load(registry_path());
  const auto &tmpl = reg.get("bbbp");

  const std::vector<std::string> positives = {
      "CCO",     "CO",        "OCC",     "CCCO",    "CC(O)C",
      "OCCO",    "CCOC",      "COC",     "CC(=O)C", "OC1CCC1",
      "C1CCOC1", "OCC(O)CO",  "CCCCO",   "CC(C)O",  "OCCCO",
      "COCC",    "OC1CCCC1",  "CCOCC",   "OCCC(O)C", "CC(=O)OC"};
  const std::vector<std::string> negatives = {
      "CC",      "CCC",      "CCCC",    "CC(C)C",  "C1CC1",
      "C1CCC1",  "C1CCCC1",  "CCC1CC1", "CC(C)CC", "CCCCC",
      "C1CCCCC1", "CC1CC1",  "CCCCCC",  "CC(C)(C)C", "C1CC1C",
      "CCC(C)C", "C1CCC1C",  "CCCC(C)C", "CC1CCC1", "CCCCCCC"};

  std::vector<FinetuneExample> examples;
  std::vector<std::pair<std::string, int>> eval_set;
  auto add = [&](const std::string &smiles, int label) {
    auto rendered = render_classification_prompt(
        kit.vocab, kit.bpe.table, tmpl, "", smiles, label == 1);
    REQUIRE(rendered.unknown_count == 0);
    FinetuneExample ex;
    ex.ids = std::move(rendered.ids);
    ex.label = label;
    examples.push_back(std::move(ex));
    eval_set.emplace_back(smiles, label);
  };
  for (const auto &s : positives) add(s, 1);
  for (const auto &s : negatives) add(s, 0);

  const int32_t pos_tag = kit.vocab.id_of("true</w>").value();
  const int32_t neg_tag = kit.vocab.id_of("false</w>").value();

  for (const FinetuneObjective objective :
       {FinetuneObjective::kTagsOnly, FinetuneObjective::kFullPrompt}) {
    Gpt<float> model(task_model_config(kit.vocab.size()));
    model.init_params(21);
    AdamState<float> opt;
    opt.reset(model.params().size());

    FinetuneOptions options;
    options.objective = objective;
    options.learning_rate = 2e-3;
    options.epochs = 60;
    options.batch_size = 8;
    options.seed = 9;
    const FinetuneResult result = finetune(model, opt, examples, options);
    CHECK(result.epoch_losses.size() == 60);
    CHECK(result.final_loss < result.epoch_losses.front());

    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto &[smiles, label] : eval_set) {
      const auto prompt = render_classification_prompt(
          kit.vocab, kit.bpe.table, tmpl, "", smiles, std::nullopt);
      scores.push_back(
          classify_prompt(model, prompt.ids, pos_tag, neg_tag).positive);
      labels.push_back(label);
    }
    CHECK(roc_auc(scores, labels) >= 0.95);
  }
}

TEST_CASE("an overfit model reproduces memorized continuations greedily") {
  ModelConfig config;
  config.n_layers = 2;
  config.d_model = 32;
  config.n_heads = 4;
  config.context_len = 24;
  config.vocab_size = 40;
  Gpt<float> model(config);
  model.init_params(5);
  AdamState<float> opt;
  opt.reset(model.params().size());

  // Distinct first tokens keep every position predictable; a shared start
  // would leave an irreducible entropy floor at the first target.
  std::vector<std::vector<int32_t>> blocks;
  Rng rng(93);
  for (int i = 0; i < 4; ++i) {
    std::vector<int32_t> block = {static_cast<int32_t>(10 + i)};
    for (int j = 0; j < 8; ++j) {
      block.push_back(static_cast<int32_t>(6 + rng.below(34)));
    }
    block.push_back(Vocab::kEos);
    blocks.push_back(std::move(block));
  }

  TrainOptions train;
  train.total_steps = 1500;
  train.batch_blocks = 4;
  train.peak_lr = 2e-3;
  train.warmup_steps = 50;
  train.seed = 71;
  train.target_loss = 0.02;
  TrainResult fit = train_on_blocks(model, opt, blocks, train);
  REQUIRE(fit.final_loss < 0.1);

  GenerateOptions options;
  options.stop_tokens = {Vocab::kEos};
  options.max_new_tokens = 20;
  for (const auto &block : blocks) {
    const std::vector<int32_t> prompt(block.begin(), block.begin() + 3);
    const Generation gen = generate(model, prompt, options);
    CHECK(gen.stopped);
    CHECK(gen.tokens ==
          std::vector<int32_t>(block.begin() + 3, block.end() - 1));
    CHECK(gen.log_prob < 0.0);
    CHECK(gen.log_prob > -2.0);

    // Greedy decoding is deterministic.
    const Generation again = generate(model, prompt, options);
    CHECK(again.tokens == gen.tokens);

    // Top-1 sampling reduces to the greedy choice.
    GenerateOptions top1 = options;
    top1.greedy = false;
    top1.top_k = 1;
    CHECK(generate(model, prompt, top1).tokens == gen.tokens);
  }

  // Sampling is reproducible per seed.
  GenerateOptions sample = options;
  sample.greedy = false;
  sample.top_k = 5;
  sample.seed = 33;
  const std::vector<int32_t> prompt = {blocks[0][0], blocks[0][1]};
  const Generation a = generate(model, prompt, sample);
  const Generation b = generate(model, prompt, sample);
  CHECK(a.tokens == b.tokens);

  const auto many = generate_k(model, prompt, sample, 5);
  CHECK(many.size() == 5);

  // Length cap and context bounds.
  GenerateOptions capped = options;
  capped.max_new_tokens = 2;
  capped.stop_tokens.clear();
  const Generation cut = generate(model, prompt, capped);
  CHECK(cut.tokens.size() == 2);
  CHECK_FALSE(cut.stopped);

  std::vector<int32_t> huge(config.context_len, 7);
  CHECK_THROWS_AS(generate(model, huge, options), Error);
  CHECK_THROWS_AS(generate_k(model, prompt, options, 0), Error);
}

TEST_CASE("dataset loaders validate their tab-separated rows") {
  const auto dir = std::filesystem::temp_directory_path() / "moltext_tasks";
  std::filesystem::create_directories(dir);

  const auto labeled = dir / "labeled.tsv";
  std::ofstream(labeled) << "CCO\t1\nCC\t0\n\nC1CC1\t1\n";
  const auto rows = load_labeled_smiles(labeled);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].smiles == "CCO");
  CHECK(rows[0].label == 1);
  CHECK(rows[2].smiles == "C1CC1");

  const auto bad_label = dir / "bad_label.tsv";
  std::ofstream(bad_label) << "CCO\t1\nCC\t7\n";
  try {
    load_labeled_smiles(bad_label);
    FAIL("expected a data error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  const auto no_tab = dir / "no_tab.tsv";
  std::ofstream(no_tab) << "CCO 1\n";
  CHECK_THROWS_AS(load_labeled_smiles(no_tab), Error);

  const auto pairs = dir / "pairs.tsv";
  std::ofstream(pairs) << "CCO\tIt is a small diol.\nCC\tA gas.\n";
  const auto loaded = load_smiles_text_pairs(pairs);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].description == "It is a small diol.");

  const auto empty = dir / "empty.tsv";
  std::ofstream(empty) << "\n";
  CHECK_THROWS_AS(load_labeled_smiles(empty), Error);
  CHECK_THROWS_AS(load_smiles_text_pairs(empty), Error);
}

TEST_CASE("translation finetuning learns a one-pair mapping") {
  const Toolkit &kit = toolkit();
  Gpt<float> model(task_model_config(kit.vocab.size()));
  model.init_params(3);
  AdamState<float> opt;
  opt.reset(model.params().size());

  const std::vector<TranslationExample> examples = {
      render_text_to_molecule_example(kit.vocab, kit.bpe.table,
                                      "It is a small diol.", "OCCO"),
      render_text_to_molecule_example(kit.vocab, kit.bpe.table, "A red dye",
                                      "c1ccccc1"),
  };

  FinetuneOptions options;
  options.learning_rate = 2e-3;
  options.epochs = 250;
  options.batch_size = 2;
  options.seed = 12;
  const FinetuneResult result =
      finetune_translation(model, opt, examples, options);
  CHECK(result.final_loss < 0.1);

  const auto prompt = render_text_to_molecule_prompt(
      kit.vocab, kit.bpe.table, "It is a small diol.");
  GenerateOptions gen;
  gen.stop_tokens = {Vocab::kEom};
  gen.max_new_tokens = 16;
  const Generation out = generate(model, prompt.ids, gen);
  CHECK(out.stopped);
  CHECK(tokens_to_smiles(kit.vocab, out.tokens) == "OCCO");
}
