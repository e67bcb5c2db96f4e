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

#include "vulnrepro/diffstat.h"

#include <regex>

#include "vulnrepro/error.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace {

std::string StripSide(std::string_view path) {
  const size_t tab = path.find('\t');
  if (tab != std::string_view::npos) path = path.substr(0, tab);
  path = Trim(path);
  if (path.size() >= 2 && path.front() == '"' && path.back() == '"') {
    path = path.substr(1, path.size() - 2);
  }
  if (path.starts_with("a/") || path.starts_with("b/")) path.remove_prefix(2);
  return std::string(path);
}

[[noreturn]] void Malformed(size_t line_no, const std::string &what) {
  throw Error(ErrorCode::kParseError,
              "diff line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<std::string> DiffStat::touched_files() const {
  std::vector<std::string> out;
  for (const FileDiffStat &f : files) out.push_back(f.path);
  return out;
}

DiffStat ParseUnifiedDiff(std::string_view diff) {
  static const std::regex kHunk(R"(^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@)");
  DiffStat stat;
  FileDiffStat *file = nullptr;
  bool file_has_body = false;  // +++ or a hunk seen for `file`
  std::string old_path;
  long old_left = 0, new_left = 0;

  const std::vector<std::string> lines = SplitLines(diff);
  for (size_t n = 0; n < lines.size(); ++n) {
    const std::string &line = lines[n];
    if (old_left > 0 || new_left > 0) {
      if (line.starts_with("\\")) continue;  // "\ No newline at end of file"
      const char c = line.empty() ? ' ' : line[0];
      if (c == ' ') {
        --old_left;
        --new_left;
      } else if (c == '-') {
        --old_left;
        ++file->removed;
      } else if (c == '+') {
        --new_left;
        ++file->added;
      } else {
        Malformed(n + 1, "unexpected line in hunk");
      }
      if (old_left < 0 || new_left < 0) Malformed(n + 1, "hunk overflows header");
      continue;
    }
    if (line.starts_with("diff --git ")) {
      std::string_view rest = std::string_view(line).substr(11);
      const size_t b = rest.rfind(" b/");
      stat.files.push_back({StripSide(b == std::string_view::npos
                                          ? rest
                                          : rest.substr(b + 1)),
                            0, 0, false});
      file = &stat.files.back();
      file_has_body = false;
      old_path.clear();
    } else if (line.starts_with("--- ")) {
      if (file == nullptr || file_has_body) {
        stat.files.push_back({"", 0, 0, false});
        file = &stat.files.back();
        file_has_body = false;
      }
      old_path = StripSide(std::string_view(line).substr(4));
      if (file->path.empty()) file->path = old_path;
    } else if (line.starts_with("+++ ")) {
      if (file == nullptr) Malformed(n + 1, "+++ without ---");
      const std::string p = StripSide(std::string_view(line).substr(4));
      file->path = p == "/dev/null" ? old_path : p;
      file_has_body = true;
    } else if (line.starts_with("@@ ")) {
      if (file == nullptr) Malformed(n + 1, "hunk outside a file");
      std::smatch m;
      if (!std::regex_search(line, m, kHunk)) Malformed(n + 1, "bad hunk header");
      old_left = m[2].matched ? std::stol(m[2].str()) : 1;
      new_left = m[4].matched ? std::stol(m[4].str()) : 1;
      file_has_body = true;
    } else if (file != nullptr &&
               ((line.starts_with("Binary files ") && line.ends_with(" differ")) ||
                line == "GIT binary patch")) {
      file->binary = true;
      file_has_body = true;
    }
  }
  if (old_left > 0 || new_left > 0) Malformed(lines.size(), "truncated hunk");
  for (const FileDiffStat &f : stat.files) {
    stat.added += f.added;
    stat.removed += f.removed;
  }
  return stat;
}

}  // namespace vulnrepro
