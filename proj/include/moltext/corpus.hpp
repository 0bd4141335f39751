//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLTEXT_CORPUS_HPP_
#define MOLTEXT_CORPUS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moltext/rng.hpp"
#include "moltext/vocab.hpp"

namespace moltext {

struct LexiconEntry {
  std::string name;
  std::string smiles;  // canonical form
};

// Name -> structure dictionary for replacing molecule mentions in text.
// Entries are held longest-name-first so that matching at a position always
// prefers the longest name.
class NameLexicon {
 public:
  // Tab-separated "name<TAB>smiles" lines.  Every SMILES must parse; it is
  // stored canonicalized.  Duplicate names (after optional ASCII case
  // folding) are rejected.
  static NameLexicon load(const std::filesystem::path &path, bool case_fold);
  static NameLexicon from_entries(std::vector<LexiconEntry> entries,
                                  bool case_fold);

  const std::vector<LexiconEntry> &entries() const { return entries_; }
  bool case_fold() const { return case_fold_; }
  size_t size() const { return entries_.size(); }

 private:
  std::vector<LexiconEntry> entries_;
  bool case_fold_ = false;
};

struct MentionSpan {
  size_t begin;
  size_t end;          // half-open byte range in the text
  size_t entry_index;  // into lexicon.entries()
};

// Greedy left-to-right scan: at each word boundary the longest matching
// name wins and scanning resumes after it, so spans never overlap.  A match
// must start and end at a word boundary (neighbors are not alphanumeric).
std::vector<MentionSpan> detect_mentions(std::string_view text,
                                         const NameLexicon &lexicon);

// Splits the text at the mention spans into alternating text and SMILES
// segments; the text between mentions is preserved byte for byte.  Returns
// nullopt when there are no mentions.  Spans must be sorted, in bounds and
// non-overlapping (as detect_mentions produces them); anything else throws.
std::optional<std::vector<Segment>> wrap_sequence(
    std::string_view text, const std::vector<MentionSpan> &spans,
    const NameLexicon &lexicon);

struct CorpusStats {
  int64_t text_docs = 0;
  int64_t smiles_molecules = 0;
  int64_t wrapped_docs = 0;
  int64_t docs_with_mentions = 0;
  int64_t total_mentions = 0;
  int64_t text_tokens = 0;
  int64_t smiles_tokens = 0;
  int64_t wrapped_tokens = 0;
  int64_t unknown_tokens = 0;
};

// The three pretraining streams.  Index 0: text documents as BPE ids.
// Index 1: one molecule per sequence as <som> tokens <eom>.  Index 2: text
// documents with detected mentions replaced inline; these documents also
// stay in the text stream unchanged.
struct CorpusStreams {
  std::vector<std::vector<int32_t>> text;
  std::vector<std::vector<int32_t>> smiles;
  std::vector<std::vector<int32_t>> wrapped;
  uint64_t vocab_hash = 0;
  CorpusStats stats;
};

// A SMILES line that does not parse throws Error(kData) with its line
// number; molecules are tokenized as written.
CorpusStreams build_corpus(const std::vector<std::string> &text_docs,
                           const std::vector<std::string> &smiles_lines,
                           const NameLexicon &lexicon, const MergeTable &table,
                           const Vocab &vocab);

// Binary sequence container: magic, version, vocab hash, then
// length-prefixed id arrays.
void save_stream(const std::filesystem::path &path,
                 const std::vector<std::vector<int32_t>> &sequences,
                 uint64_t vocab_hash);
struct LoadedStream {
  std::vector<std::vector<int32_t>> sequences;
  uint64_t vocab_hash;
};
LoadedStream load_stream(const std::filesystem::path &path);

// Seeded categorical sampling over the nonempty streams, packing drawn
// sequences (each followed by <eos>) into fixed-length blocks.  Block k is a
// pure function of (streams, weights, context length, seed), so a resumed
// consumer can skip ahead and see exactly the continuation.  Streams cycle,
// so the block sequence never ends.
class BatchMixer {
 public:
  BatchMixer(const CorpusStreams &streams, std::array<double, 3> weights,
             uint32_t context_len, uint64_t seed);

  std::vector<int32_t> next_block();
  void skip_blocks(int64_t count);

  // Finite variant: draws exactly `draws` sequences and pads the final
  // partial block with <pad>.
  static std::vector<std::vector<int32_t>> materialize(
      const CorpusStreams &streams, std::array<double, 3> weights,
      uint32_t context_len, uint64_t seed, int64_t draws);

 private:
  const std::vector<int32_t> &draw();

  std::array<const std::vector<std::vector<int32_t>> *, 3> streams_;
  std::array<double, 3> cumulative_{};
  std::array<size_t, 3> cursors_{};
  uint32_t context_len_;
  Rng rng_;
  std::vector<int32_t> buffer_;
};

}  // namespace moltext

#endif  // MOLTEXT_CORPUS_HPP_
