//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include "moltext/io.hpp"
#include "moltext/tokenize.hpp"

namespace moltext {

namespace {

bool is_whitespace_char(char c) {
  return kWhitespaceTokens.find(c) != std::string_view::npos;
}

std::string pair_key(const std::string &left, const std::string &right) {
  return left + ' ' + right;  // merge symbols never contain whitespace
}

// UTF-8 aware character split: multi-byte sequences stay together so that
// text passes through without normalization.
std::vector<std::string> split_chars(std::string_view word) {
  std::vector<std::string> chars;
  size_t i = 0;
  while (i < word.size()) {
    size_t len = 1;
    uint8_t lead = static_cast<uint8_t>(word[i]);
    if ((lead & 0xe0) == 0xc0)
      len = 2;
    else if ((lead & 0xf0) == 0xe0)
      len = 3;
    else if ((lead & 0xf8) == 0xf0)
      len = 4;
    len = std::min(len, word.size() - i);
    chars.emplace_back(word.substr(i, len));
    i += len;
  }
  return chars;
}

std::vector<std::string> word_symbols(std::string_view word) {
  std::vector<std::string> symbols = split_chars(word);
  symbols.back() += kWordEnd;
  return symbols;
}

struct TrainWord {
  std::vector<std::string> symbols;
  int64_t freq = 0;
};

}  // namespace

void MergeTable::rebuild_index() {
  index_.clear();
  for (size_t r = 0; r < merges.size(); ++r)
    index_[pair_key(merges[r].first, merges[r].second)] =
        static_cast<int64_t>(r);
}

int64_t MergeTable::rank_of(const std::string &left,
                            const std::string &right) const {
  auto it = index_.find(pair_key(left, right));
  return it == index_.end() ? -1 : it->second;
}

void MergeTable::save(const std::filesystem::path &path) const {
  std::string out;
  for (const auto &[left, right] : merges) {
    out += left;
    out += ' ';
    out += right;
    out += '\n';
  }
  write_file(path, out);
}

MergeTable MergeTable::load(const std::filesystem::path &path) {
  MergeTable table;
  for (const std::string &line : read_lines(path)) {
    if (line.empty()) continue;
    size_t space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 == line.size())
      throw Error(Errc::kData, "malformed merge line: " + line);
    table.merges.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  table.rebuild_index();
  return table;
}

BpeTrainResult bpe_train(const std::vector<std::string> &docs,
                         size_t num_merges,
                         const std::vector<std::string> &forbidden) {
  // Unique pretokenized words with frequencies, in first-seen order.
  std::vector<TrainWord> words;
  std::unordered_map<std::string, size_t> word_index;
  std::set<std::string> alphabet;
  for (char c : kWhitespaceTokens) alphabet.emplace(1, c);
  for (const std::string &doc : docs) {
    size_t i = 0;
    while (i < doc.size()) {
      while (i < doc.size() && is_whitespace_char(doc[i])) ++i;
      size_t start = i;
      while (i < doc.size() && !is_whitespace_char(doc[i])) ++i;
      if (i == start) continue;
      std::string word = doc.substr(start, i - start);
      auto [it, fresh] = word_index.try_emplace(word, words.size());
      if (fresh) {
        words.push_back(TrainWord{word_symbols(word), 0});
        for (const std::string &sym : words.back().symbols)
          alphabet.insert(sym);
      }
      ++words[it->second].freq;
    }
  }

  std::unordered_set<std::string> blocked(forbidden.begin(), forbidden.end());
  std::map<std::pair<std::string, std::string>, int64_t> pair_counts;
  std::map<std::pair<std::string, std::string>, std::vector<size_t>>
      pair_words;

  auto count_word = [&](size_t w, int64_t sign) {
    const auto &symbols = words[w].symbols;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto key = std::make_pair(symbols[i], symbols[i + 1]);
      int64_t &count = pair_counts[key];
      count += sign * words[w].freq;
      if (count <= 0)
        pair_counts.erase(key);
      else if (sign > 0)
        pair_words[key].push_back(w);
    }
  };
  for (size_t w = 0; w < words.size(); ++w) count_word(w, +1);

  BpeTrainResult result;
  result.alphabet.assign(alphabet.begin(), alphabet.end());

  for (size_t step = 0; step < num_merges; ++step) {
    // Highest count wins; ties go to the lexicographically smallest pair.
    // std::map iteration is already in pair order, so the first maximum seen
    // is the winner.
    const std::pair<std::string, std::string> *best = nullptr;
    int64_t best_count = 0;
    for (const auto &[pair, count] : pair_counts) {
      if (count <= best_count) continue;
      if (blocked.contains(pair.first + pair.second)) continue;
      best = &pair;
      best_count = count;
    }
    if (best == nullptr || best_count < 2) break;

    auto [left, right] = *best;
    std::string merged = left + right;
    result.table.merges.emplace_back(left, right);

    std::vector<size_t> touched =
        std::move(pair_words[std::make_pair(left, right)]);
    pair_words.erase(std::make_pair(left, right));
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    for (size_t w : touched) {
      auto &symbols = words[w].symbols;
      bool contains = false;
      for (size_t i = 0; i + 1 < symbols.size(); ++i)
        if (symbols[i] == left && symbols[i + 1] == right) {
          contains = true;
          break;
        }
      if (!contains) continue;  // stale index entry
      count_word(w, -1);
      std::vector<std::string> next;
      next.reserve(symbols.size());
      for (size_t i = 0; i < symbols.size();) {
        if (i + 1 < symbols.size() && symbols[i] == left &&
            symbols[i + 1] == right) {
          next.push_back(merged);
          i += 2;
        } else {
          next.push_back(symbols[i]);
          ++i;
        }
      }
      symbols = std::move(next);
      count_word(w, +1);
    }
  }

  result.table.rebuild_index();
  return result;
}

std::vector<std::string> bpe_encode_word(std::string_view word,
                                         const MergeTable &table) {
  std::vector<std::string> symbols = word_symbols(word);
  for (;;) {
    int64_t best_rank = std::numeric_limits<int64_t>::max();
    size_t best_pos = 0;
    for (size_t i = 0; i + 1 < symbols.size(); ++i) {
      int64_t rank = table.rank_of(symbols[i], symbols[i + 1]);
      if (rank >= 0 && rank < best_rank) {
        best_rank = rank;
        best_pos = i;
      }
    }
    if (best_rank == std::numeric_limits<int64_t>::max()) return symbols;
    const std::string left = symbols[best_pos];
    const std::string right = symbols[best_pos + 1];
    std::string merged = left + right;
    std::vector<std::string> next;
    next.reserve(symbols.size());
    for (size_t i = 0; i < symbols.size();) {
      if (i + 1 < symbols.size() && symbols[i] == left &&
          symbols[i + 1] == right) {
        next.push_back(merged);
        i += 2;
      } else {
        next.push_back(symbols[i]);
        ++i;
      }
    }
    symbols = std::move(next);
  }
}

std::vector<std::string> bpe_encode_text(std::string_view text,
                                         const MergeTable &table) {
  std::vector<std::string> pieces;
  size_t i = 0;
  while (i < text.size()) {
    if (!is_whitespace_char(text[i])) {
      size_t start = i;
      while (i < text.size() && !is_whitespace_char(text[i])) ++i;
      for (auto &piece : bpe_encode_word(text.substr(start, i - start), table))
        pieces.push_back(std::move(piece));
      continue;
    }
    size_t start = i;
    while (i < text.size() && is_whitespace_char(text[i])) ++i;
    bool implicit = (i - start == 1) && text[start] == ' ' && start > 0 &&
                    i < text.size();
    if (implicit) continue;  // rendered by the preceding word-end marker
    for (size_t k = start; k < i; ++k) pieces.emplace_back(1, text[k]);
  }
  return pieces;
}

std::string bpe_decode_pieces(const std::vector<std::string> &pieces) {
  std::string text;
  bool pending_space = false;
  for (const std::string &piece : pieces) {
    if (piece.size() == 1 && is_whitespace_char(piece[0])) {
      // Explicit whitespace realizes the pending word boundary itself.
      pending_space = false;
      text += piece;
      continue;
    }
    if (pending_space) text += ' ';
    pending_space = false;
    if (piece.size() >= kWordEnd.size() && piece.ends_with(kWordEnd)) {
      text.append(piece.data(), piece.size() - kWordEnd.size());
      pending_space = true;
    } else {
      text += piece;
    }
  }
  return text;
}

}  // namespace moltext
