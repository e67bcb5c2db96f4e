// Copyright 2026 The vulnrepro Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vulnrepro/shell_words.h"

#include <optional>
#include <string>

#include "vulnrepro/error.h"

namespace vulnrepro {

namespace {

enum class TokenKind { kWord, kOperator, kRedirect };

struct Token {
  TokenKind kind;
  std::string text;
  size_t begin;
  size_t end;
};

bool IsBlank(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::vector<Token> Tokenize(std::string_view s) {
  std::vector<Token> tokens;
  size_t i = 0;
  const size_t n = s.size();
  while (i < n) {
    const char c = s[i];
    if (IsBlank(c)) {
      ++i;
      continue;
    }
    if (c == '\\' && i + 1 < n && s[i + 1] == '\n') {
      i += 2;
      continue;
    }
    if (c == '\\' && i + 2 < n && s[i + 1] == '\r' && s[i + 2] == '\n') {
      i += 3;
      continue;
    }
    if (c == '\n') {
      tokens.push_back({TokenKind::kOperator, "\n", i, i + 1});
      ++i;
      continue;
    }
    if (c == '#') {
      while (i < n && s[i] != '\n') ++i;
      continue;
    }
    if (c == '&' || c == '|' || c == ';' || c == '(' || c == ')') {
      size_t len = 1;
      if ((c == '&' || c == '|') && i + 1 < n && s[i + 1] == c) len = 2;
      tokens.push_back(
          {TokenKind::kOperator, std::string(s.substr(i, len)), i, i + len});
      i += len;
      continue;
    }
    if (c == '>' || c == '<') {
      size_t len = 1;
      while (i + len < n && (s[i + len] == '>' || s[i + len] == '&' ||
                             s[i + len] == '<')) {
        ++len;
      }
      tokens.push_back(
          {TokenKind::kRedirect, std::string(s.substr(i, len)), i, i + len});
      i += len;
      continue;
    }
    // A word: runs until an unquoted blank or operator.
    Token word{TokenKind::kWord, "", i, i};
    while (i < n) {
      const char d = s[i];
      if (IsBlank(d) || d == '\n' || d == '&' || d == '|' || d == ';' ||
          d == '(' || d == ')' || d == '>' || d == '<') {
        break;
      }
      if (d == '\\') {
        if (i + 1 < n && s[i + 1] == '\n') {
          i += 2;
          break;
        }
        if (i + 1 < n) word.text.push_back(s[i + 1]);
        i += 2;
        continue;
      }
      if (d == '\'') {
        const size_t close = s.find('\'', i + 1);
        if (close == std::string_view::npos) {
          throw Error(ErrorCode::kParseError, "unbalanced single quote");
        }
        word.text.append(s.substr(i + 1, close - i - 1));
        i = close + 1;
        continue;
      }
      if (d == '"') {
        size_t j = i + 1;
        for (; j < n && s[j] != '"'; ++j) {
          if (s[j] == '\\' && j + 1 < n) {
            ++j;
            if (s[j] == '\n') continue;
          }
          word.text.push_back(s[j]);
        }
        if (j >= n) {
          throw Error(ErrorCode::kParseError, "unbalanced double quote");
        }
        i = j + 1;
        continue;
      }
      word.text.push_back(d);
      ++i;
    }
    word.end = i;
    // A trailing continuation was consumed into the word scan; keep the span
    // tight around the visible characters.
    while (word.end > word.begin &&
           (s[word.end - 1] == '\n' || s[word.end - 1] == '\\')) {
      --word.end;
    }
    tokens.push_back(std::move(word));
  }
  return tokens;
}

}  // namespace

std::vector<ShellCommand> SplitShellCommands(std::string_view source) {
  std::vector<ShellCommand> commands;
  ShellCommand current;
  bool skip_next_word = false;
  const auto flush = [&] {
    if (!current.words.empty()) commands.push_back(std::move(current));
    current = ShellCommand{};
  };
  for (Token &t : Tokenize(source)) {
    switch (t.kind) {
      case TokenKind::kOperator:
        skip_next_word = false;
        flush();
        break;
      case TokenKind::kRedirect:
        // `2>&1` style redirects carry their own target.
        skip_next_word = !t.text.ends_with("&");
        break;
      case TokenKind::kWord:
        if (skip_next_word) {
          skip_next_word = false;
          break;
        }
        if (current.words.empty()) current.begin = t.begin;
        current.end = t.end;
        current.words.push_back({std::move(t.text), t.begin, t.end});
        break;
    }
  }
  flush();
  return commands;
}

AndChain SplitAndChain(std::string_view source) {
  const std::vector<Token> tokens = Tokenize(source);
  AndChain chain;
  int depth = 0;
  constexpr size_t kNone = std::string_view::npos;
  size_t seg_begin = kNone;
  size_t seg_end = 0;
  for (const Token &t : tokens) {
    if (t.kind == TokenKind::kOperator && t.text == "(") ++depth;
    if (t.kind == TokenKind::kOperator && t.text == ")") {
      if (--depth < 0) {
        throw Error(ErrorCode::kParseError, "unbalanced parenthesis");
      }
    }
    if (depth == 0 && t.kind == TokenKind::kOperator && t.text == "&&") {
      if (seg_begin == kNone) {
        throw Error(ErrorCode::kParseError, "empty command before &&");
      }
      chain.segments.push_back({seg_begin, seg_end});
      seg_begin = kNone;
      continue;
    }
    if (depth == 0 && t.kind == TokenKind::kOperator && t.text == "\n" &&
        seg_begin == kNone) {
      continue;
    }
    if (seg_begin == kNone) seg_begin = t.begin;
    seg_end = t.end;
  }
  if (depth != 0) throw Error(ErrorCode::kParseError, "unbalanced parenthesis");
  if (seg_begin != kNone) {
    chain.segments.push_back({seg_begin, seg_end});
  } else if (!chain.segments.empty()) {
    throw Error(ErrorCode::kParseError, "dangling &&");
  }
  for (size_t i = 0; i + 1 < chain.segments.size(); ++i) {
    chain.separators.push_back(
        {chain.segments[i].end, chain.segments[i + 1].begin});
  }
  return chain;
}

}  // namespace vulnrepro
