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

// A POSIX-shell lexer just deep enough to find simple commands inside a RUN
// line and to cut an `&&` chain apart without touching its formatting. No
// expansion is performed; words keep `$VAR` literally.

#ifndef VULNREPRO_SHELL_WORDS_H_
#define VULNREPRO_SHELL_WORDS_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vulnrepro {

struct ShellWord {
  std::string text;  // quotes removed
  size_t begin = 0;  // byte offsets into the source
  size_t end = 0;
};

struct ShellCommand {
  std::vector<ShellWord> words;  // redirections and their targets excluded
  size_t begin = 0;
  size_t end = 0;
};

// Simple commands separated by any of `&& || ; | &`, parentheses or
// unescaped newlines. Throws Error(kParseError) on unbalanced quotes.
std::vector<ShellCommand> SplitShellCommands(std::string_view source);

struct Span {
  size_t begin = 0;
  size_t end = 0;
};

// Top-level `&&` chain. `separators[i]` covers everything between
// `segments[i]` and `segments[i + 1]` (the `&&`, surrounding blanks and any
// backslash-newline continuations), so that
//   source[0, segments[0].begin) + seg0 + sep0 + seg1 + ... + tail
// reproduces the source exactly.
struct AndChain {
  std::vector<Span> segments;
  std::vector<Span> separators;
};

// Throws Error(kParseError) on unbalanced quotes or parentheses.
AndChain SplitAndChain(std::string_view source);

}  // namespace vulnrepro

#endif  // VULNREPRO_SHELL_WORDS_H_
