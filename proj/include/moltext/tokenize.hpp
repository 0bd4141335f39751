//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_TOKENIZE_HPP_
#define MOLTEXT_TOKENIZE_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "moltext/error.hpp"

namespace moltext {

struct TokenizeError {
  size_t position;
  std::string message;
};

// Splits a SMILES string into the token inventory used for the molecule side
// of the vocabulary: bracket atoms as single tokens, two-letter Cl/Br, the
// organic-subset and aromatic one-letter atoms, digits and %nn ring
// closures, bonds, branches and the remaining structural characters.  The
// grammar is written out in docs/tokenization.md; concatenating the tokens
// always reproduces the input.
Expected<std::vector<std::string>, TokenizeError> smiles_tokenize(
    std::string_view smiles);

// Word-final marker attached to the last character of every pretokenized
// word.  A piece carrying this suffix ends a word; decoding renders the
// word boundary as a single space unless an explicit whitespace token
// follows.
inline constexpr std::string_view kWordEnd = "</w>";

// Whitespace characters that become explicit single-character tokens when a
// boundary is anything other than one plain space between two words.
inline constexpr std::string_view kWhitespaceTokens = " \t\n\r";

struct MergeTable {
  std::vector<std::pair<std::string, std::string>> merges;

  void rebuild_index();
  // Rank of a pair, or -1 when the pair is not mergeable.
  int64_t rank_of(const std::string &left, const std::string &right) const;

  void save(const std::filesystem::path &path) const;
  static MergeTable load(const std::filesystem::path &path);

 private:
  std::unordered_map<std::string, int64_t> index_;  // "left right" -> rank
};

struct BpeTrainResult {
  MergeTable table;
  std::vector<std::string> alphabet;  // byte-sorted initial symbols
};

// Greedy pair merging over a whitespace-pretokenized corpus.  Each step
// merges the most frequent adjacent symbol pair; ties go to the
// lexicographically smallest pair and training stops early once the best
// pair occurs fewer than twice.  Pairs whose concatenation equals one of
// `forbidden` (the sentinel/special spellings) are never merged.  The
// whitespace tokens are always part of the alphabet.
BpeTrainResult bpe_train(const std::vector<std::string> &docs,
                         size_t num_merges,
                         const std::vector<std::string> &forbidden);

// Applies merges to one word (no whitespace) by repeatedly merging the
// lowest-ranked pair present.
std::vector<std::string> bpe_encode_word(std::string_view word,
                                         const MergeTable &table);

// Piece stream for a whole text.  One plain space between two words is
// implicit in the word-end marker; every other whitespace character becomes
// an explicit token, which makes decoding the exact inverse.
std::vector<std::string> bpe_encode_text(std::string_view text,
                                         const MergeTable &table);
std::string bpe_decode_pieces(const std::vector<std::string> &pieces);

}  // namespace moltext

#endif  // MOLTEXT_TOKENIZE_HPP_
