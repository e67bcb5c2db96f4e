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

#include "vulnrepro/util.h"

#include <fnmatch.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "vulnrepro/error.h"

namespace vulnrepro {

namespace {

bool ParseFixedInt(std::string_view s, size_t pos, size_t len, int &out) {
  if (pos + len > s.size()) return false;
  const char *begin = s.data() + pos;
  for (size_t i = 0; i < len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(begin[i]))) return false;
  }
  auto [ptr, ec] = std::from_chars(begin, begin + len, out);
  return ec == std::errc() && ptr == begin + len;
}

std::string ToLower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

Timestamp ParseIso8601(std::string_view text) {
  const auto fail = [&]() -> Error {
    return Error(ErrorCode::kParseError,
                 "timestamp '" + std::string(text) + "'");
  };
  int year, month, day, hour, minute, second;
  if (!ParseFixedInt(text, 0, 4, year) || text.size() < 19 || text[4] != '-' ||
      !ParseFixedInt(text, 5, 2, month) || text[7] != '-' ||
      !ParseFixedInt(text, 8, 2, day) || (text[10] != 'T' && text[10] != ' ') ||
      !ParseFixedInt(text, 11, 2, hour) || text[13] != ':' ||
      !ParseFixedInt(text, 14, 2, minute) || text[16] != ':' ||
      !ParseFixedInt(text, 17, 2, second)) {
    throw fail();
  }
  size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos]))) {
      ++pos;
    }
  }
  int offset_seconds = 0;
  if (pos == text.size()) throw fail();
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '+' ? 1 : -1;
    int oh, om;
    if (!ParseFixedInt(text, pos + 1, 2, oh)) throw fail();
    size_t mpos = pos + 3;
    if (mpos < text.size() && text[mpos] == ':') ++mpos;
    if (!ParseFixedInt(text, mpos, 2, om)) throw fail();
    offset_seconds = sign * (oh * 3600 + om * 60);
    pos = mpos + 2;
  } else {
    throw fail();
  }
  if (pos != text.size()) throw fail();

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year},
                           std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) throw fail();
  const sys_seconds local = sys_days{ymd} + hours{hour} + minutes{minute} +
                            seconds{second};
  return local - seconds{offset_seconds};
}

std::string FormatIso8601(Timestamp t) {
  using namespace std::chrono;
  const sys_days day = floor<days>(t);
  const year_month_day ymd{day};
  const auto rest = t - day;
  const auto h = duration_cast<hours>(rest);
  const auto m = duration_cast<minutes>(rest - h);
  const auto s = rest - h - m;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<int>(h.count()),
                static_cast<int>(m.count()), static_cast<int>(s.count()));
  return buf;
}

std::string Sha256Hex(std::span<const uint8_t> data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int md_len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &md_len, EVP_sha256(),
                 nullptr) != 1) {
    throw Error(ErrorCode::kIoError, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(md_len * 2);
  for (unsigned int i = 0; i < md_len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string Sha256Hex(std::string_view data) {
  return Sha256Hex(std::span<const uint8_t>(
      reinterpret_cast<const uint8_t *>(data.data()), data.size()));
}

std::string ReadFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<uint8_t> ReadBinaryFile(const std::filesystem::path &path) {
  std::string s = ReadFile(path);
  return {s.begin(), s.end()};
}

void WriteFile(const std::filesystem::path &path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void WriteBinaryFile(const std::filesystem::path &path,
                     std::span<const uint8_t> contents) {
  WriteFile(path, std::string_view(reinterpret_cast<const char *>(
                                       contents.data()),
                                   contents.size()));
}

std::string NormalizeUrl(std::string_view url) {
  std::string s(Trim(url));
  std::string host_and_path;
  bool strip_scheme = false;
  static constexpr std::string_view kStripped[] = {"https://", "http://",
                                                   "git://"};
  for (std::string_view scheme : kStripped) {
    if (s.size() >= scheme.size() &&
        ToLower(s.substr(0, scheme.size())) == scheme) {
      host_and_path = s.substr(scheme.size());
      strip_scheme = true;
      break;
    }
  }
  std::string prefix;
  if (!strip_scheme) {
    const size_t sep = s.find("://");
    if (sep != std::string::npos) {
      prefix = ToLower(s.substr(0, sep + 3));
      host_and_path = s.substr(sep + 3);
    } else {
      // scp-like `user@host:path` is the ssh spelling of the same locator.
      const size_t at = s.find('@');
      const size_t colon = s.find(':');
      if (at != std::string::npos && colon != std::string::npos && at < colon &&
          s.find('/') > colon) {
        host_and_path = s.substr(at + 1, colon - at - 1) + "/" +
                        s.substr(colon + 1);
      } else {
        return [&] {
          std::string p = s;
          while (!p.empty() && p.back() == '/') p.pop_back();
          if (p.size() > 4 && p.ends_with(".git")) p.resize(p.size() - 4);
          return p;
        }();
      }
    }
  }
  const size_t slash = host_and_path.find('/');
  std::string host = host_and_path.substr(0, slash);
  std::string path =
      slash == std::string::npos ? "" : host_and_path.substr(slash);
  // Drop credentials; they never identify a repository.
  if (const size_t at = host.rfind('@'); at != std::string::npos) {
    host = host.substr(at + 1);
  }
  std::string out = prefix + ToLower(host) + path;
  while (!out.empty() && out.back() == '/') out.pop_back();
  if (out.size() > 4 && out.ends_with(".git")) out.resize(out.size() - 4);
  while (!out.empty() && out.back() == '/') out.pop_back();
  return out;
}

bool SameRepository(std::string_view a, std::string_view b) {
  return NormalizeUrl(a) == NormalizeUrl(b);
}

std::string UrlBasename(std::string_view url) {
  std::string s(Trim(url));
  if (const size_t at = s.rfind('@'); at != std::string::npos &&
                                      s.find("://") != std::string::npos &&
                                      at > s.rfind('/')) {
    s.resize(at);  // svn peg revision: url@rev
  }
  while (!s.empty() && s.back() == '/') s.pop_back();
  if (s.size() > 4 && s.ends_with(".git")) s.resize(s.size() - 4);
  const size_t slash = s.find_last_of("/:");
  return slash == std::string::npos ? s : s.substr(slash + 1);
}

bool SameRevision(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) return false;
  return a.starts_with(b) || b.starts_with(a);
}

bool GlobMatch(std::string_view pattern, std::string_view text) {
  return ::fnmatch(std::string(pattern).c_str(), std::string(text).c_str(),
                   0) == 0;
}

std::string_view Trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

bool ContainsWord(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return false;
  const auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  };
  for (size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word(haystack[pos - 1]);
    const size_t end = pos + needle.size();
    const bool right_ok = end == haystack.size() || !is_word(haystack[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

std::string ShellQuote(std::string_view word) {
  const auto safe = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) ||
           std::string_view("_./:@%+=,-${}").find(c) != std::string_view::npos;
  };
  if (!word.empty() && std::all_of(word.begin(), word.end(), safe)) {
    return std::string(word);
  }
  std::string out = "\"";
  for (char c : word) {
    if (c == '"' || c == '\\' || c == '`') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace vulnrepro
