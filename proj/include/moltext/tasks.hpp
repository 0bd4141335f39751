//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_TASKS_HPP_
#define MOLTEXT_TASKS_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "moltext/model.hpp"
#include "moltext/vocab.hpp"

namespace moltext {

// A classification prompt: prefix, molecule span, suffix, then a one-token
// tag.  The suffix may carry a "{target}" slot for per-subtask wording.
struct PromptTemplate {
  std::string task;
  std::string prefix;
  std::string suffix;
  std::string positive_tag;
  std::string negative_tag;
  bool needs_target = false;
};

class TaskRegistry {
 public:
  static TaskRegistry load(const std::filesystem::path &path);

  const PromptTemplate &get(std::string_view task) const;
  // Display name for a subtask slot (e.g. receptor names); throws when the
  // task has no such table or the subtask is unknown.
  const std::string &target_name(std::string_view task,
                                 std::string_view subtask) const;
  std::vector<std::string> task_names() const;

 private:
  std::map<std::string, PromptTemplate, std::less<>> templates_;
  std::map<std::string, std::map<std::string, std::string, std::less<>>,
           std::less<>>
      targets_;
};

struct RenderedPrompt {
  std::vector<int32_t> ids;  // starts with <bos>; tag last when present
  int64_t unknown_count = 0;
};

// Instantiates "{target}" in the suffix; returns the final prompt wording
// as "<prefix> <som> ... <eom> <suffix>" halves for golden checks.
std::pair<std::string, std::string> prompt_wording(const PromptTemplate &tmpl,
                                                   std::string_view target);

// prefix <som> SMILES <eom> suffix [tag]; the tag is looked up as one
// word-final vocabulary token and is never split.
RenderedPrompt render_classification_prompt(
    const Vocab &vocab, const MergeTable &merges, const PromptTemplate &tmpl,
    std::string_view target, const std::string &smiles,
    std::optional<bool> label);

// "The description of <som> S <eom> is: The molecule is" ...
RenderedPrompt render_molecule_to_text_prompt(const Vocab &vocab,
                                              const MergeTable &merges,
                                              const std::string &smiles);
// description ". The compound is" <som> ...  (one period is ensured, never
// doubled)
RenderedPrompt render_text_to_molecule_prompt(const Vocab &vocab,
                                              const MergeTable &merges,
                                              const std::string &description);

// Prompt plus completion plus closing sentinel, for finetuning; also
// reports where the completion starts.
struct TranslationExample {
  std::vector<int32_t> ids;
  int64_t completion_start = 0;  // first id index that belongs to the answer
};
TranslationExample render_molecule_to_text_example(
    const Vocab &vocab, const MergeTable &merges, const std::string &smiles,
    const std::string &description);
TranslationExample render_text_to_molecule_example(
    const Vocab &vocab, const MergeTable &merges,
    const std::string &description, const std::string &smiles);

// Concatenates the spellings of molecule-grammar tokens back into a SMILES
// string (sentinels and word-final tokens are rejected).
std::string tokens_to_smiles(const Vocab &vocab, std::span<const int32_t> ids);

// ---------------------------------------------------------------------------
// Finetuning

struct FinetuneExample {
  std::vector<int32_t> ids;  // [<bos>, s_1 .. s_T]; s_T is the tag
  int label = 0;
};

enum class FinetuneObjective {
  kTagsOnly,    // loss on the tag position only
  kFullPrompt,  // per-sequence mean over every position, then batch mean
};

// Pads the examples to one length and emits the shifted batch with the
// objective's position weights.
Batch make_finetune_batch(std::span<const FinetuneExample> examples,
                          FinetuneObjective objective);

// Like the full-prompt objective restricted to the completion: each
// sequence contributes the mean NLL of its tokens from completion_start on.
Batch make_completion_batch(std::span<const TranslationExample> examples);

struct FinetuneOptions {
  FinetuneObjective objective = FinetuneObjective::kTagsOnly;
  double learning_rate = 3e-5;
  int64_t epochs = 30;
  int64_t batch_size = 8;
  uint64_t seed = 1;
  bool deterministic = true;  // pins BLAS to one thread; dropout stays seeded
};

struct FinetuneResult {
  double final_loss = 0.0;
  std::vector<double> epoch_losses;  // mean update loss per epoch
};

FinetuneResult finetune(Gpt<float> &model, AdamState<float> &opt,
                        std::span<const FinetuneExample> examples,
                        const FinetuneOptions &options);
FinetuneResult finetune_translation(Gpt<float> &model, AdamState<float> &opt,
                                    std::span<const TranslationExample> examples,
                                    const FinetuneOptions &options);

// ---------------------------------------------------------------------------
// Scoring

// Next-token probabilities of the two tags after a tagless prompt,
// normalized as p_pos / (p_pos + p_neg); the pair sums to one exactly.
struct TagProbabilities {
  double positive = 0.0;
  double negative = 0.0;
};
TagProbabilities classify_prompt(Gpt<float> &model,
                                 std::span<const int32_t> prompt_ids,
                                 int32_t positive_tag, int32_t negative_tag);

// Mann-Whitney ROC-AUC with ties counted one half; exact rational
// accumulation in integers.  Throws Error(kData) on single-class input.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// ---------------------------------------------------------------------------
// Scaffold split

struct ScaffoldSplit {
  std::vector<int64_t> train;
  std::vector<int64_t> valid;
  std::vector<int64_t> test;
};

// Groups molecules by canonical scaffold and assigns whole groups, largest
// first (ties by scaffold string), to train until its rounded quota fills,
// then valid, then test.
ScaffoldSplit scaffold_split(std::span<const std::string> smiles,
                             double frac_train, double frac_valid,
                             double frac_test);

// ---------------------------------------------------------------------------
// Generation

struct GenerateOptions {
  int64_t max_new_tokens = 256;
  bool greedy = true;  // otherwise top-k sampling
  int32_t top_k = 50;
  uint64_t seed = 1;
  std::vector<int32_t> stop_tokens;
};

struct Generation {
  std::vector<int32_t> tokens;  // stop token excluded
  double log_prob = 0.0;        // sum of emitted-token log probabilities
  bool stopped = false;         // ended on a stop token rather than length
};

Generation generate(Gpt<float> &model, std::span<const int32_t> prompt,
                    const GenerateOptions &options);
// K candidates; sampling reseeds per candidate, greedy repeats one result.
std::vector<Generation> generate_k(Gpt<float> &model,
                                   std::span<const int32_t> prompt,
                                   const GenerateOptions &options, int64_t k);

// ---------------------------------------------------------------------------
// Dataset files

struct LabeledSmiles {
  std::string smiles;
  int label = 0;  // 0 or 1
};
// Lines of "smiles<TAB>label"; diagnostics carry path:line.
std::vector<LabeledSmiles> load_labeled_smiles(
    const std::filesystem::path &path);

struct SmilesTextPair {
  std::string smiles;
  std::string description;
};
// Lines of "smiles<TAB>description".
std::vector<SmilesTextPair> load_smiles_text_pairs(
    const std::filesystem::path &path);

}  // namespace moltext

#endif  // MOLTEXT_TASKS_HPP_
