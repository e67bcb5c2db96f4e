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

#ifndef VULNREPRO_DIFFSTAT_H_
#define VULNREPRO_DIFFSTAT_H_

#include <string>
#include <string_view>
#include <vector>

namespace vulnrepro {

struct FileDiffStat {
  std::string path;  // new side, or old side for deletions
  int added = 0;
  int removed = 0;
  bool binary = false;

  bool operator==(const FileDiffStat &) const = default;
};

struct DiffStat {
  std::vector<FileDiffStat> files;
  int added = 0;
  int removed = 0;

  int files_changed() const { return static_cast<int>(files.size()); }
  std::vector<std::string> touched_files() const;
};

// Git-style or plain unified diff. Lines are counted from the hunk bodies,
// bounded by the hunk header counts; binary files count with zero lines.
// Throws kParseError on a hunk whose body disagrees with its header.
DiffStat ParseUnifiedDiff(std::string_view diff);

}  // namespace vulnrepro

#endif  // VULNREPRO_DIFFSTAT_H_
