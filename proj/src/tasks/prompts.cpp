//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moltext/tasks.hpp"
#include "moltext/tokenize.hpp"

namespace moltext {

namespace {

std::string substitute_target(const std::string &text,
                              std::string_view target) {
  const auto pos = text.find("{target}");
  if (pos == std::string::npos) return text;
  std::string out = text;
  out.replace(pos, 8, target);
  return out;
}

void append_sequence(RenderedPrompt &out, const TokenSequence &seq) {
  out.ids.insert(out.ids.end(), seq.ids.begin(), seq.ids.end());
  out.unknown_count += seq.unknown_count;
}

int32_t tag_token_id(const Vocab &vocab, const std::string &tag) {
  const auto id = vocab.id_of(tag + std::string(kWordEnd));
  if (!id.has_value()) {
    throw Error(Errc::kConfig,
                "classification tag is not a single vocabulary token: " + tag);
  }
  return *id;
}

}  // namespace

std::pair<std::string, std::string> prompt_wording(const PromptTemplate &tmpl,
                                                   std::string_view target) {
  if (tmpl.needs_target && target.empty()) {
    throw Error(Errc::kConfig,
                "task '" + tmpl.task + "' needs a target to fill its prompt");
  }
  return {substitute_target(tmpl.prefix, target),
          substitute_target(tmpl.suffix, target)};
}

RenderedPrompt render_classification_prompt(
    const Vocab &vocab, const MergeTable &merges, const PromptTemplate &tmpl,
    std::string_view target, const std::string &smiles,
    std::optional<bool> label) {
  const auto [prefix, suffix] = prompt_wording(tmpl, target);
  RenderedPrompt out;
  out.ids.push_back(Vocab::kBos);
  append_sequence(out, encode_mixed({{SegmentKind::kText, prefix},
                                     {SegmentKind::kSmiles, smiles},
                                     {SegmentKind::kText, suffix}},
                                    merges, vocab));
  if (label.has_value()) {
    const std::string &tag = *label ? tmpl.positive_tag : tmpl.negative_tag;
    out.ids.push_back(tag_token_id(vocab, tag));
  }
  return out;
}

RenderedPrompt render_molecule_to_text_prompt(const Vocab &vocab,
                                              const MergeTable &merges,
                                              const std::string &smiles) {
  RenderedPrompt out;
  out.ids.push_back(Vocab::kBos);
  append_sequence(out,
                  encode_mixed({{SegmentKind::kText, "The description of"},
                                {SegmentKind::kSmiles, smiles},
                                {SegmentKind::kText, "is: The molecule is"}},
                               merges, vocab));
  return out;
}

RenderedPrompt render_text_to_molecule_prompt(const Vocab &vocab,
                                              const MergeTable &merges,
                                              const std::string &description) {
  if (description.empty()) {
    throw Error(Errc::kData, "empty description");
  }
  std::string text = description;
  if (text.back() != '.') text += '.';
  text += " The compound is";
  RenderedPrompt out;
  out.ids.push_back(Vocab::kBos);
  append_sequence(out,
                  encode_mixed({{SegmentKind::kText, text}}, merges, vocab));
  out.ids.push_back(Vocab::kSom);
  return out;
}

TranslationExample render_molecule_to_text_example(
    const Vocab &vocab, const MergeTable &merges, const std::string &smiles,
    const std::string &description) {
  RenderedPrompt prompt = render_molecule_to_text_prompt(vocab, merges, smiles);
  TranslationExample out;
  out.ids = std::move(prompt.ids);
  out.completion_start = static_cast<int64_t>(out.ids.size());
  const TokenSequence desc =
      encode_mixed({{SegmentKind::kText, description}}, merges, vocab);
  out.ids.insert(out.ids.end(), desc.ids.begin(), desc.ids.end());
  out.ids.push_back(Vocab::kEos);
  return out;
}

TranslationExample render_text_to_molecule_example(
    const Vocab &vocab, const MergeTable &merges,
    const std::string &description, const std::string &smiles) {
  RenderedPrompt prompt =
      render_text_to_molecule_prompt(vocab, merges, description);
  TranslationExample out;
  out.ids = std::move(prompt.ids);
  // The prompt already ends with <som>; the answer is the molecule body
  // plus its closing sentinel.
  out.completion_start = static_cast<int64_t>(out.ids.size());
  const TokenSequence body =
      encode_mixed({{SegmentKind::kSmiles, smiles}}, merges, vocab);
  // encode_mixed wraps with both sentinels; drop its opening <som>.
  out.ids.insert(out.ids.end(), body.ids.begin() + 1, body.ids.end());
  return out;
}

std::string tokens_to_smiles(const Vocab &vocab,
                             std::span<const int32_t> ids) {
  std::string out;
  for (int32_t id : ids) {
    if (id < static_cast<int32_t>(Vocab::kSpecials.size())) {
      throw Error(Errc::kData,
                  "sentinel token inside a molecule span: " + vocab.token(id));
    }
    std::string_view spelling = vocab.token(id);
    if (spelling.ends_with(kWordEnd)) {
      spelling.remove_suffix(kWordEnd.size());
    }
    out += spelling;
  }
  return out;
}

}  // namespace moltext
