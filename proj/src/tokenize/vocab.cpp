//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moltext/vocab.hpp"

#include <algorithm>

#include "moltext/hash.hpp"
#include "moltext/io.hpp"

namespace moltext {

namespace {

std::string escape_token(const std::string &token) {
  std::string out;
  for (char c : token) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string unescape_token(const std::string &line) {
  std::string out;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] != '\\') {
      out += line[i];
      continue;
    }
    if (i + 1 == line.size())
      throw Error(Errc::kData, "dangling escape in vocab line");
    switch (line[++i]) {
      case '\\':
        out += '\\';
        break;
      case 'n':
        out += '\n';
        break;
      case 't':
        out += '\t';
        break;
      case 'r':
        out += '\r';
        break;
      default:
        throw Error(Errc::kData, "unknown escape in vocab line");
    }
  }
  return out;
}

}  // namespace

Vocab::Vocab() {
  for (std::string_view special : kSpecials) add_token(std::string(special));
}

int32_t Vocab::add_token(std::string token) {
  if (token.empty()) throw Error(Errc::kData, "empty vocab token");
  auto [it, fresh] =
      ids_.try_emplace(token, static_cast<int32_t>(tokens_.size()));
  if (fresh) tokens_.push_back(std::move(token));
  return it->second;
}

std::optional<int32_t> Vocab::id_of(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string &Vocab::token(int32_t id) const {
  if (id < 0 || id >= size()) throw Error(Errc::kData, "token id out of range");
  return tokens_[static_cast<size_t>(id)];
}

int32_t Vocab::id_or_unk(std::string_view token) const {
  return id_of(token).value_or(kUnk);
}

uint64_t Vocab::content_hash() const {
  uint64_t state = kFnvOffsetBasis;
  for (const std::string &token : tokens_) {
    state = fnv1a64(token, state);
    state = fnv1a64_u64(token.size(), state);
  }
  return state;
}

void Vocab::save(const std::filesystem::path &path) const {
  std::string out;
  for (const std::string &token : tokens_) {
    out += escape_token(token);
    out += '\n';
  }
  write_file(path, out);
}

Vocab Vocab::load(const std::filesystem::path &path) {
  Vocab vocab;
  std::vector<std::string> lines = read_lines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    std::string token = unescape_token(lines[i]);
    int32_t id = vocab.add_token(token);
    if (id != static_cast<int32_t>(i))
      throw Error(Errc::kData,
                  "vocab line " + std::to_string(i) + " duplicates id " +
                      std::to_string(id));
  }
  if (vocab.size() < static_cast<int32_t>(Vocab::kSpecials.size()))
    throw Error(Errc::kData, "vocab file is missing the special tokens");
  return vocab;
}

Vocab build_vocab(const BpeTrainResult &bpe,
                  const std::vector<std::string> &smiles_tokens,
                  const std::vector<std::string> &word_tokens) {
  Vocab vocab;
  for (const std::string &symbol : bpe.alphabet) vocab.add_token(symbol);
  for (const auto &[left, right] : bpe.table.merges)
    vocab.add_token(left + right);
  std::vector<std::string> sorted = smiles_tokens;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const std::string &token : sorted) vocab.add_token(token);
  for (const std::string &token : word_tokens) vocab.add_token(token);
  return vocab;
}

TokenSequence encode_mixed(const std::vector<Segment> &segments,
                           const MergeTable &table, const Vocab &vocab) {
  TokenSequence seq;
  auto push = [&](std::string_view token) {
    int32_t id = vocab.id_or_unk(token);
    if (id == Vocab::kUnk && token != Vocab::kSpecials[Vocab::kUnk])
      ++seq.unknown_count;
    seq.ids.push_back(id);
  };
  for (const Segment &segment : segments) {
    if (segment.kind == SegmentKind::kText) {
      for (const std::string &piece : bpe_encode_text(segment.content, table))
        push(piece);
      continue;
    }
    auto tokens = smiles_tokenize(segment.content);
    if (!tokens.ok())
      throw Error(Errc::kData, "SMILES segment does not tokenize at offset " +
                                   std::to_string(tokens.error().position) +
                                   ": " + tokens.error().message);
    seq.ids.push_back(Vocab::kSom);
    for (const std::string &token : tokens.value()) push(token);
    seq.ids.push_back(Vocab::kEom);
  }
  return seq;
}

bool sentinels_balanced(const std::vector<int32_t> &ids) {
  bool open = false;
  for (int32_t id : ids) {
    if (id == Vocab::kSom) {
      if (open) return false;
      open = true;
    } else if (id == Vocab::kEom) {
      if (!open) return false;
      open = false;
    }
  }
  return !open;
}

std::string decode_text(const std::vector<int32_t> &ids, const Vocab &vocab) {
  std::vector<std::string> pieces;
  pieces.reserve(ids.size());
  for (int32_t id : ids) pieces.push_back(vocab.token(id));
  return bpe_decode_pieces(pieces);
}

}  // namespace moltext
