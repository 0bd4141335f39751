//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>

#include "moltext/tokenize.hpp"

namespace moltext {

namespace {

bool single_char_token(char c) {
  switch (c) {
    case 'B':
    case 'C':
    case 'N':
    case 'O':
    case 'P':
    case 'S':
    case 'F':
    case 'I':
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 's':
    case 'p':
    case '(':
    case ')':
    case '.':
    case '=':
    case '#':
    case '-':
    case '+':
    case '\\':
    case '/':
    case ':':
    case '~':
    case '@':
    case '?':
    case '>':
    case '*':
    case '$':
      return true;
    default:
      return std::isdigit(static_cast<uint8_t>(c)) != 0;
  }
}

}  // namespace

Expected<std::vector<std::string>, TokenizeError> smiles_tokenize(
    std::string_view smiles) {
  std::vector<std::string> tokens;
  size_t i = 0;
  while (i < smiles.size()) {
    char c = smiles[i];
    if (c == '[') {
      size_t close = smiles.find(']', i + 1);
      if (close == std::string_view::npos)
        return TokenizeError{i, "unterminated bracket token"};
      if (close == i + 1)
        return TokenizeError{i, "empty bracket token"};
      tokens.emplace_back(smiles.substr(i, close - i + 1));
      i = close + 1;
      continue;
    }
    if (c == '%') {
      if (i + 2 >= smiles.size() ||
          !std::isdigit(static_cast<uint8_t>(smiles[i + 1])) ||
          !std::isdigit(static_cast<uint8_t>(smiles[i + 2])))
        return TokenizeError{i, "'%' ring closure needs two digits"};
      tokens.emplace_back(smiles.substr(i, 3));
      i += 3;
      continue;
    }
    if ((c == 'B' && i + 1 < smiles.size() && smiles[i + 1] == 'r') ||
        (c == 'C' && i + 1 < smiles.size() && smiles[i + 1] == 'l')) {
      tokens.emplace_back(smiles.substr(i, 2));
      i += 2;
      continue;
    }
    if (single_char_token(c)) {
      tokens.emplace_back(1, c);
      ++i;
      continue;
    }
    return TokenizeError{i, "character not in the SMILES token grammar"};
  }
  return tokens;
}

}  // namespace moltext
