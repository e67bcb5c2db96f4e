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

// Small helpers shared by all modules: UTC timestamps, digests, file I/O,
// repository-locator normalization and string utilities.

#ifndef VULNREPRO_UTIL_H_
#define VULNREPRO_UTIL_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vulnrepro {

using Timestamp = std::chrono::sys_seconds;

inline Timestamp FromUnixSeconds(int64_t s) {
  return Timestamp{std::chrono::seconds{s}};
}
inline int64_t ToUnixSeconds(Timestamp t) {
  return t.time_since_epoch().count();
}

// Accepts `YYYY-MM-DDTHH:MM:SS[.frac](Z|+HH:MM|-HH:MM)`; a space may replace
// the `T`. Fractional seconds are truncated. Throws Error(kParseError).
Timestamp ParseIso8601(std::string_view text);
// Always `YYYY-MM-DDTHH:MM:SSZ`.
std::string FormatIso8601(Timestamp t);

std::string Sha256Hex(std::span<const uint8_t> data);
std::string Sha256Hex(std::string_view data);

std::string ReadFile(const std::filesystem::path &path);
std::vector<uint8_t> ReadBinaryFile(const std::filesystem::path &path);
// Writes through a temporary file and renames, so readers never observe a
// partially written result.
void WriteFile(const std::filesystem::path &path, std::string_view contents);
void WriteBinaryFile(const std::filesystem::path &path,
                     std::span<const uint8_t> contents);

// Repository locator equivalence: lowercased host, no http/https/git scheme,
// no trailing "/" or ".git". Other schemes (file://, svn://, ...) are kept.
std::string NormalizeUrl(std::string_view url);
bool SameRepository(std::string_view a, std::string_view b);
// Last path component of a locator with any trailing "/" or ".git" removed.
std::string UrlBasename(std::string_view url);

// fnmatch(3) semantics without FNM_PATHNAME: `*` also matches `/`.
// Prefix-compatible revision identity ("6f6caf" names "6f6caf12...").
bool SameRevision(std::string_view a, std::string_view b);

bool GlobMatch(std::string_view pattern, std::string_view text);

std::string_view Trim(std::string_view s);
std::vector<std::string> SplitLines(std::string_view text);
bool ContainsWord(std::string_view haystack, std::string_view needle);
// Single-quotes `word` for /bin/sh when it contains anything but
// [A-Za-z0-9_./:@%+=,-]. `$` is left unquoted so `$SRC/dep` still expands.
std::string ShellQuote(std::string_view word);

}  // namespace vulnrepro

#endif  // VULNREPRO_UTIL_H_
