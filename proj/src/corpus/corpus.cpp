//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moltext/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "moltext/io.hpp"
#include "moltext/smiles.hpp"

namespace moltext {

namespace {

bool word_char(char c) { return std::isalnum(static_cast<uint8_t>(c)) != 0; }

char fold(char c, bool case_fold) {
  return case_fold ? static_cast<char>(std::tolower(static_cast<uint8_t>(c)))
                   : c;
}

bool equals_folded(std::string_view text, std::string_view name,
                   bool case_fold) {
  if (text.size() != name.size()) return false;
  for (size_t i = 0; i < text.size(); ++i)
    if (fold(text[i], case_fold) != fold(name[i], case_fold)) return false;
  return true;
}

}  // namespace

NameLexicon NameLexicon::from_entries(std::vector<LexiconEntry> entries,
                                      bool case_fold) {
  NameLexicon lexicon;
  lexicon.case_fold_ = case_fold;
  for (LexiconEntry &entry : entries) {
    if (entry.name.empty())
      throw Error(Errc::kData, "lexicon entry with empty name");
    auto parsed = parse_smiles(entry.smiles);
    if (!parsed.ok())
      throw Error(Errc::kData, "lexicon SMILES for '" + entry.name +
                                   "' does not parse: " +
                                   parsed.error().message);
    entry.smiles = write_canonical(parsed.value());
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const LexiconEntry &a, const LexiconEntry &b) {
                     if (a.name.size() != b.name.size())
                       return a.name.size() > b.name.size();
                     return a.name < b.name;
                   });
  for (size_t i = 0; i + 1 < entries.size(); ++i)
    if (equals_folded(entries[i].name, entries[i + 1].name, case_fold))
      throw Error(Errc::kData, "duplicate lexicon name: " + entries[i].name);
  lexicon.entries_ = std::move(entries);
  return lexicon;
}

NameLexicon NameLexicon::load(const std::filesystem::path &path,
                              bool case_fold) {
  std::vector<LexiconEntry> entries;
  std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string &line = lines[i];
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos)
      throw Error(Errc::kData, path.string() + ":" + std::to_string(i + 1) +
                                   ": expected 'name<TAB>smiles'");
    entries.push_back(LexiconEntry{line.substr(0, tab), line.substr(tab + 1)});
  }
  try {
    return from_entries(std::move(entries), case_fold);
  } catch (const Error &e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<MentionSpan> detect_mentions(std::string_view text,
                                         const NameLexicon &lexicon) {
  std::vector<MentionSpan> spans;
  size_t i = 0;
  while (i < text.size()) {
    if (i > 0 && word_char(text[i - 1])) {
      ++i;  // not a word boundary
      continue;
    }
    bool matched = false;
    for (size_t e = 0; e < lexicon.entries().size(); ++e) {
      const std::string &name = lexicon.entries()[e].name;
      if (i + name.size() > text.size()) continue;
      if (!equals_folded(text.substr(i, name.size()), name,
                         lexicon.case_fold()))
        continue;
      size_t end = i + name.size();
      if (end < text.size() && word_char(text[end])) continue;
      spans.push_back(MentionSpan{i, end, e});
      i = end;
      matched = true;
      break;
    }
    if (!matched) ++i;
  }
  return spans;
}

std::optional<std::vector<Segment>> wrap_sequence(
    std::string_view text, const std::vector<MentionSpan> &spans,
    const NameLexicon &lexicon) {
  if (spans.empty()) return std::nullopt;
  size_t cursor = 0;
  std::vector<Segment> segments;
  for (const MentionSpan &span : spans) {
    if (span.begin < cursor || span.end > text.size() ||
        span.begin >= span.end)
      throw Error(Errc::kData, "mention spans are overlapping or unordered");
    if (span.entry_index >= lexicon.size())
      throw Error(Errc::kData, "mention references a missing lexicon entry");
    if (span.begin > cursor)
      segments.push_back(Segment{
          SegmentKind::kText,
          std::string(text.substr(cursor, span.begin - cursor))});
    segments.push_back(Segment{SegmentKind::kSmiles,
                               lexicon.entries()[span.entry_index].smiles});
    cursor = span.end;
  }
  if (cursor < text.size())
    segments.push_back(
        Segment{SegmentKind::kText, std::string(text.substr(cursor))});
  return segments;
}

CorpusStreams build_corpus(const std::vector<std::string> &text_docs,
                           const std::vector<std::string> &smiles_lines,
                           const NameLexicon &lexicon, const MergeTable &table,
                           const Vocab &vocab) {
  CorpusStreams out;
  out.vocab_hash = vocab.content_hash();

  for (const std::string &doc : text_docs) {
    TokenSequence seq =
        encode_mixed({Segment{SegmentKind::kText, doc}}, table, vocab);
    out.stats.text_tokens += static_cast<int64_t>(seq.ids.size());
    out.stats.unknown_tokens += seq.unknown_count;
    out.text.push_back(std::move(seq.ids));
    ++out.stats.text_docs;

    std::vector<MentionSpan> spans = detect_mentions(doc, lexicon);
    if (spans.empty()) continue;
    ++out.stats.docs_with_mentions;
    out.stats.total_mentions += static_cast<int64_t>(spans.size());
    auto segments = wrap_sequence(doc, spans, lexicon);
    TokenSequence wrapped = encode_mixed(*segments, table, vocab);
    out.stats.wrapped_tokens += static_cast<int64_t>(wrapped.ids.size());
    out.stats.unknown_tokens += wrapped.unknown_count;
    out.wrapped.push_back(std::move(wrapped.ids));
    ++out.stats.wrapped_docs;
  }

  for (size_t i = 0; i < smiles_lines.size(); ++i) {
    const std::string &line = smiles_lines[i];
    if (line.empty()) continue;
    auto parsed = parse_smiles(line);
    if (!parsed.ok())
      throw Error(Errc::kData,
                  "SMILES line " + std::to_string(i + 1) +
                      " does not parse: " + parsed.error().message);
    TokenSequence seq =
        encode_mixed({Segment{SegmentKind::kSmiles, line}}, table, vocab);
    out.stats.smiles_tokens += static_cast<int64_t>(seq.ids.size());
    out.stats.unknown_tokens += seq.unknown_count;
    out.smiles.push_back(std::move(seq.ids));
    ++out.stats.smiles_molecules;
  }
  return out;
}

namespace {
constexpr char kStreamMagic[8] = {'M', 'L', 'T', 'X', 'S', 'T', 'R', 'M'};
constexpr uint32_t kStreamVersion = 1;
}  // namespace

void save_stream(const std::filesystem::path &path,
                 const std::vector<std::vector<int32_t>> &sequences,
                 uint64_t vocab_hash) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::kData, "cannot open for write: " + path.string());
  write_bytes(os, kStreamMagic, sizeof(kStreamMagic));
  write_u32(os, kStreamVersion);
  write_u64(os, vocab_hash);
  write_u64(os, sequences.size());
  for (const auto &seq : sequences) {
    write_u32(os, static_cast<uint32_t>(seq.size()));
    for (int32_t id : seq) write_u32(os, static_cast<uint32_t>(id));
  }
  if (!os) throw Error(Errc::kData, "write failed: " + path.string());
}

LoadedStream load_stream(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::kData, "cannot open file: " + path.string());
  char magic[8];
  read_bytes(is, magic, sizeof(magic));
  if (!std::equal(magic, magic + 8, kStreamMagic))
    throw Error(Errc::kData, path.string() + " is not a token stream file");
  uint32_t version = read_u32(is);
  if (version != kStreamVersion)
    throw Error(Errc::kData, "unsupported stream version " +
                                 std::to_string(version));
  LoadedStream out;
  out.vocab_hash = read_u64(is);
  uint64_t count = read_u64(is);
  out.sequences.reserve(count);
  for (uint64_t s = 0; s < count; ++s) {
    uint32_t len = read_u32(is);
    std::vector<int32_t> seq(len);
    for (uint32_t i = 0; i < len; ++i)
      seq[i] = static_cast<int32_t>(read_u32(is));
    out.sequences.push_back(std::move(seq));
  }
  return out;
}

BatchMixer::BatchMixer(const CorpusStreams &streams,
                       std::array<double, 3> weights, uint32_t context_len,
                       uint64_t seed)
    : streams_{&streams.text, &streams.smiles, &streams.wrapped},
      context_len_(context_len),
      rng_(seed) {
  if (context_len_ == 0)
    throw Error(Errc::kConfig, "context length must be positive");
  double total = 0;
  for (size_t k = 0; k < 3; ++k) {
    if (weights[k] < 0)
      throw Error(Errc::kConfig, "stream weights must be nonnegative");
    if (streams_[k]->empty()) weights[k] = 0;  // nothing to draw
    total += weights[k];
  }
  if (total <= 0)
    throw Error(Errc::kConfig,
                "no stream has both sequences and positive weight");
  double acc = 0;
  for (size_t k = 0; k < 3; ++k) {
    acc += weights[k] / total;
    cumulative_[k] = acc;
  }
  cumulative_[2] = 1.0;
}

const std::vector<int32_t> &BatchMixer::draw() {
  double u = rng_.next_double();
  size_t k = 0;
  while (k < 2 && u >= cumulative_[k]) ++k;
  while (streams_[k]->empty()) k = (k + 1) % 3;  // weights guarantee progress
  const auto &stream = *streams_[k];
  const std::vector<int32_t> &seq = stream[cursors_[k] % stream.size()];
  ++cursors_[k];
  return seq;
}

std::vector<int32_t> BatchMixer::next_block() {
  while (buffer_.size() < context_len_) {
    const std::vector<int32_t> &seq = draw();
    buffer_.insert(buffer_.end(), seq.begin(), seq.end());
    buffer_.push_back(Vocab::kEos);
  }
  std::vector<int32_t> block(buffer_.begin(),
                             buffer_.begin() + context_len_);
  buffer_.erase(buffer_.begin(), buffer_.begin() + context_len_);
  return block;
}

void BatchMixer::skip_blocks(int64_t count) {
  for (int64_t i = 0; i < count; ++i) next_block();
}

std::vector<std::vector<int32_t>> BatchMixer::materialize(
    const CorpusStreams &streams, std::array<double, 3> weights,
    uint32_t context_len, uint64_t seed, int64_t draws) {
  BatchMixer mixer(streams, weights, context_len, seed);
  std::vector<int32_t> flat;
  for (int64_t d = 0; d < draws; ++d) {
    const std::vector<int32_t> &seq = mixer.draw();
    flat.insert(flat.end(), seq.begin(), seq.end());
    flat.push_back(Vocab::kEos);
  }
  while (flat.size() % context_len != 0) flat.push_back(Vocab::kPad);
  std::vector<std::vector<int32_t>> blocks;
  for (size_t i = 0; i < flat.size(); i += context_len)
    blocks.emplace_back(flat.begin() + static_cast<int64_t>(i),
                        flat.begin() + static_cast<int64_t>(i + context_len));
  return blocks;
}

}  // namespace moltext
