//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_VOCAB_HPP_
#define MOLTEXT_VOCAB_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "moltext/tokenize.hpp"

namespace moltext {

// One id space shared by text pieces, SMILES tokens and specials.  The six
// specials always occupy ids 0..5; everything after them is appended in a
// deterministic order and duplicates collapse onto the existing id.
class Vocab {
 public:
  enum Special : int32_t {
    kSom = 0,  // molecule start sentinel
    kEom = 1,  // molecule end sentinel
    kBos = 2,
    kEos = 3,
    kPad = 4,
    kUnk = 5,
  };
  static constexpr std::array<std::string_view, 6> kSpecials = {
      "<som>", "<eom>", "<bos>", "<eos>", "<pad>", "<unk>"};

  Vocab();

  // Returns the existing id when the spelling is already present.
  int32_t add_token(std::string token);
  std::optional<int32_t> id_of(std::string_view token) const;
  const std::string &token(int32_t id) const;
  int32_t size() const { return static_cast<int32_t>(tokens_.size()); }

  // Unknown pieces map to <unk>.
  int32_t id_or_unk(std::string_view token) const;

  // FNV-1a over all spellings in id order; stored in stream and checkpoint
  // headers so mismatched artifacts are rejected.
  uint64_t content_hash() const;

  // One escaped spelling per line, line number = id.
  void save(const std::filesystem::path &path) const;
  static Vocab load(const std::filesystem::path &path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int32_t> ids_;
};

// Deterministic unified vocabulary: specials, then the BPE alphabet
// (byte-sorted), then merge products in rank order, then SMILES tokens
// (byte-sorted), then extra whole-word tokens (classification tags).
Vocab build_vocab(const BpeTrainResult &bpe,
                  const std::vector<std::string> &smiles_tokens,
                  const std::vector<std::string> &word_tokens);

enum class SegmentKind : uint8_t { kText = 0, kSmiles = 1 };

struct Segment {
  SegmentKind kind;
  std::string content;
};

struct TokenSequence {
  std::vector<int32_t> ids;
  int64_t unknown_count = 0;
};

// Text segments pass through BPE; SMILES segments are tokenized with the
// molecule grammar and wrapped in <som>/<eom>.  A SMILES segment that does
// not scan throws Error(kData).
TokenSequence encode_mixed(const std::vector<Segment> &segments,
                           const MergeTable &table, const Vocab &vocab);

// Checks that <som>/<eom> strictly alternate starting with <som> and close
// by the end of the sequence.
bool sentinels_balanced(const std::vector<int32_t> &ids);

// Inverse of text encoding: ids -> pieces -> text.  Specials other than
// whitespace/word pieces render as their literal spelling.
std::string decode_text(const std::vector<int32_t> &ids, const Vocab &vocab);

}  // namespace moltext

#endif  // MOLTEXT_VOCAB_HPP_
