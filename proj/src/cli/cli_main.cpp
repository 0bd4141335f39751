//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "moltext/cli.hpp"
#include "moltext/error.hpp"

namespace moltext {

std::string config_reference() {
  return R"(# Config reference

Every command reads one JSON object.  Unknown keys are rejected.  Keys shared
by all commands:

| key | type | required | meaning |
| --- | --- | --- | --- |
| seed | integer | yes | master seed for every random draw in the run |
| deterministic | bool | no (true) | pin BLAS to one thread for bit-stable math |
| out_dir | string | yes (optional for report) | directory for artifacts and manifest.json |

`--seed`, `--deterministic` and `--out-dir` override the config values.

## tokenize

| key | type | required | meaning |
| --- | --- | --- | --- |
| text_corpus | path | yes | training documents, one per line |
| smiles_corpus | path | yes | molecules whose tokens seed the vocabulary |
| num_merges | integer | yes | BPE merges to learn (0 = characters only) |
| extra_tokens | string array | no | words added as atomic tokens, e.g. tag words |

Writes vocab.txt and merges.txt.

## build-corpus

| key | type | required | meaning |
| --- | --- | --- | --- |
| vocab | path | yes | vocab.txt from tokenize |
| merges | path | yes | merges.txt from tokenize |
| text_corpus | path | yes | documents, one per line |
| smiles_corpus | path | yes | molecules, one per line |
| lexicon | path | yes | name<TAB>smiles dictionary |
| case_fold | bool | no (false) | match lexicon names case-insensitively |

Writes text.stream, smiles.stream, wrapped.stream and stats.json.

## pretrain

| key | type | required | meaning |
| --- | --- | --- | --- |
| vocab | path | yes | vocabulary the streams were encoded with |
| streams.text | path | yes | text stream file |
| streams.smiles | path | yes | molecule stream file |
| streams.wrapped | path | yes | wrapped stream file |
| model.n_layers | integer | yes | transformer blocks |
| model.d_model | integer | yes | embedding width |
| model.n_heads | integer | yes | attention heads |
| model.context_len | integer | yes | maximum sequence length |
| model.dropout | number | no (0) | dropout probability |
| train.total_steps | integer | yes | optimizer steps (total, including resumed) |
| train.batch_blocks | integer | no (4) | blocks per micro batch |
| train.accum_steps | integer | no (1) | micro batches per optimizer step |
| train.block_len | integer | yes | tokens per block, in [2, context_len + 1] |
| train.peak_lr | number | yes | learning-rate peak after warmup |
| train.warmup_steps | integer | yes | linear warmup length |
| train.grad_clip | number | no (0 = off) | global-norm gradient clip |
| train.stream_weights | 3 numbers | no (1,1,1) | sampling weights for text/smiles/wrapped |
| train.target_loss | number | no (0 = off) | stop early below this loss |
| train.log_every | integer | no (10) | CSV logging interval |
| resume | path | no | checkpoint to continue from |

Writes model.ckpt and train_log.csv.

## finetune

| key | type | required | meaning |
| --- | --- | --- | --- |
| vocab | path | yes | vocabulary |
| merges | path | yes | BPE merges |
| checkpoint | path | yes | pretrained model.ckpt |
| registry | path | yes | task template file |
| task | string | yes | template name, e.g. bbbp |
| target | string | no | subtask key for templated tasks |
| train_data | path | yes | smiles<TAB>label rows |
| objective | string | yes | tags_only or full_prompt |
| batch_size | integer | no (8) | examples per update |
| split.train/valid/test | numbers | no (0.8/0.1/0.1) | scaffold split fractions |
| grid.learning_rates | number array | no (3e-5, 5e-5) | sweep values |
| grid.dropouts | number array | no (0.1, 0.3) | sweep values |
| grid.epochs | number array | no (30, 50) | sweep values |

Sweeps the grid, selects on validation ROC-AUC, reports test ROC-AUC.
Writes finetuned.ckpt and metrics.json.

## classify

| key | type | required | meaning |
| --- | --- | --- | --- |
| vocab | path | yes | vocabulary |
| merges | path | yes | BPE merges |
| checkpoint | path | yes | finetuned.ckpt |
| registry | path | yes | task template file |
| task | string | yes | template name |
| target | string | no | subtask key |
| data | path | yes | smiles<TAB>label rows, or bare SMILES lines |

Writes predictions.csv (id,score) and, when labels are present, metrics.json.

## generate

| key | type | required | meaning |
| --- | --- | --- | --- |
| vocab | path | yes | vocabulary |
| merges | path | yes | BPE merges |
| checkpoint | path | yes | model checkpoint |
| mode | string | yes | text_to_molecule or molecule_to_text |
| prompts | path | yes | one description or SMILES per line |
| decoding.greedy | bool | no (true) | greedy instead of sampling |
| decoding.top_k | integer | no (50) | sampling pool size |
| decoding.max_new_tokens | integer | no (128) | generation cap |
| decoding.num_samples | integer | no (1) | candidates per prompt (tab-separated) |

Writes generations.txt, one prompt per line.

## evaluate

| key | type | required | meaning |
| --- | --- | --- | --- |
| direction | string | yes | molecule_to_text or text_to_molecule |
| generated | path | yes | generated lines |
| references | path | yes | reference lines, same count |
| smooth_bleu | bool | no (false) | add-one smoothing for BLEU orders above 1 |

Writes report.json and prints the metric table.

## report

| key | type | required | meaning |
| --- | --- | --- | --- |
| report | path | yes | report.json from evaluate |

Prints the metric table; out_dir is optional and only stores the manifest.

## Exit codes

0 success, 2 config error, 3 data error, 4 numeric failure.
)";
}

int cli_main(int argc, char **argv) {
  CLI::App app{"molecule/text language modeling toolkit"};
  bool show_reference = false;
  app.add_flag("--config-reference", show_reference,
               "Print the config key reference and exit");

  struct SubArgs {
    std::string config;
    std::optional<uint64_t> seed;
    bool deterministic = false;
    std::string out_dir;
  } args;

  const std::pair<const char *, const char *> subcommands[] = {
      {"tokenize", "Train BPE and assemble the unified vocabulary"},
      {"build-corpus", "Detect mentions and encode the pretraining streams"},
      {"pretrain", "Train the language model on the mixed streams"},
      {"finetune", "Prompt-finetune a checkpoint on a classification task"},
      {"classify", "Score molecules with a finetuned checkpoint"},
      {"generate", "Decode molecules or descriptions from prompts"},
      {"evaluate", "Compute translation metrics for generated output"},
      {"report", "Print a saved evaluation report"},
  };
  std::string chosen;
  for (const auto &[name, description] : subcommands) {
    CLI::App *sub = app.add_subcommand(name, description);
    sub->add_option("--config", args.config, "JSON config file")->required();
    sub->add_option("--seed", args.seed, "Override the config seed");
    sub->add_flag("--deterministic", args.deterministic,
                  "Force deterministic compute");
    sub->add_option("--out-dir", args.out_dir,
                    "Override the output directory");
    sub->callback([&chosen, name = std::string(name)] { chosen = name; });
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (show_reference) {
    std::cout << config_reference();
    return 0;
  }
  if (chosen.empty()) {
    std::cout << app.help();
    return 2;
  }

  CliOverrides overrides;
  if (args.seed) overrides.seed = *args.seed;
  if (args.deterministic) overrides.deterministic = true;
  if (!args.out_dir.empty()) overrides.out_dir = args.out_dir;

  try {
    run_command(chosen, load_config(args.config), overrides);
    return 0;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(Errc::kData);
  }
}

}  // namespace moltext
