#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "xlat/lang.hpp"
#include "xlat/util.hpp"

namespace xlat {

// ---------------------------------------------------------------------------
// Comment / string-literal masking.
//
// Returns a same-length copy of `code` where every character belonging to a
// comment or a string literal (delimiters included) is replaced by a space.
// Newlines are preserved so line/column structure survives. Scanners that
// must not trip over keywords inside literals run on the masked text.
// ---------------------------------------------------------------------------
inline std::string mask_code(std::string_view code, Lang lang) {
  std::string out(code);
  const size_t n = code.size();
  auto blank = [&](size_t from, size_t to) {  // [from, to)
    for (size_t k = from; k < to && k < n; ++k)
      if (out[k] != '\n') out[k] = ' ';
  };

  size_t i = 0;
  if (lang == Lang::python) {
    while (i < n) {
      const char c = code[i];
      if (c == '#') {
        size_t j = i;
        while (j < n && code[j] != '\n') ++j;
        blank(i, j);
        i = j;
      } else if (c == '"' || c == '\'') {
        const bool triple = i + 2 < n && code[i + 1] == c && code[i + 2] == c;
        const size_t start = i;
        if (triple) {
          size_t j = i + 3;
          while (j + 2 < n &&
                 !(code[j] == c && code[j + 1] == c && code[j + 2] == c)) {
            if (code[j] == '\\') ++j;
            ++j;
          }
          i = j + 2 < n ? j + 3 : n;
        } else {
          size_t j = i + 1;
          while (j < n && code[j] != c && code[j] != '\n') {
            if (code[j] == '\\') ++j;
            ++j;
          }
          i = j < n ? j + 1 : n;
        }
        blank(start, i);
      } else {
        ++i;
      }
    }
  } else {  // java / cpp
    while (i < n) {
      const char c = code[i];
      if (c == '/' && i + 1 < n && code[i + 1] == '/') {
        size_t j = i;
        while (j < n && code[j] != '\n') ++j;
        blank(i, j);
        i = j;
      } else if (c == '/' && i + 1 < n && code[i + 1] == '*') {
        size_t j = i + 2;
        while (j + 1 < n && !(code[j] == '*' && code[j + 1] == '/')) ++j;
        const size_t end = j + 1 < n ? j + 2 : n;
        blank(i, end);
        i = end;
      } else if (c == '"' || c == '\'') {
        const size_t start = i;
        size_t j = i + 1;
        while (j < n && code[j] != c && code[j] != '\n') {
          if (code[j] == '\\') ++j;
          ++j;
        }
        i = j < n ? j + 1 : n;
        blank(start, i);
      } else {
        ++i;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lexer. Shared by the signature scanner, the construct detector, the TF-IDF
// embedder and BLEU.
// ---------------------------------------------------------------------------
struct Token {
  enum class Kind { ident, number, punct };
  Kind kind;
  std::string text;
  size_t pos;  // byte offset in the input
};

namespace detail {

inline bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
inline bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

inline constexpr std::array<std::string_view, 22> kTwoCharOps = {
    "==", "!=", "<=", ">=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=",
    "%=", "->", "::", "<<", ">>", "**", "//", "^=", "|=", "&="};

}  // namespace detail

inline std::vector<Token> lex(std::string_view text) {
  std::vector<Token> toks;
  const size_t n = text.size();
  size_t i = 0;
  while (i < n) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (detail::ident_start(c)) {
      size_t j = i + 1;
      while (j < n && detail::ident_char(text[j])) ++j;
      toks.push_back({Token::Kind::ident, std::string(text.substr(i, j - i)), i});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i + 1;
      while (j < n) {
        const char d = text[j];
        if (detail::ident_char(d) || d == '.') {
          ++j;
        } else if ((d == '+' || d == '-') &&
                   (text[j - 1] == 'e' || text[j - 1] == 'E') &&
                   j + 1 < n && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
          ++j;  // exponent sign
        } else {
          break;
        }
      }
      toks.push_back({Token::Kind::number, std::string(text.substr(i, j - i)), i});
      i = j;
      continue;
    }
    // punctuation; greedy two-char match
    std::string op(1, c);
    if (i + 1 < n) {
      const std::string_view two = text.substr(i, 2);
      for (std::string_view cand : detail::kTwoCharOps) {
        if (two == cand) {
          op = std::string(two);
          break;
        }
      }
    }
    toks.push_back({Token::Kind::punct, op, i});
    i += op.size();
  }
  return toks;
}

// Token stream used by the TF-IDF embedder and by BLEU: identifier, keyword,
// number and operator tokens, lowercased.
inline std::vector<std::string> code_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const Token& t : lex(text)) out.push_back(to_lower(t.text));
  return out;
}

}  // namespace xlat
