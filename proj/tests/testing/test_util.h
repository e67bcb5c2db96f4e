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

#ifndef VULNREPRO_TESTING_TEST_UTIL_H_
#define VULNREPRO_TESTING_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vulnrepro/history.h"
#include "vulnrepro/ingest.h"
#include "vulnrepro/util.h"

namespace vulnrepro::testing {

std::filesystem::path TestDataDir();

// A fresh directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;

  const std::filesystem::path &path() const { return path_; }
  std::filesystem::path operator/(const std::string &rel) const {
    return path_ / rel;
  }

 private:
  std::filesystem::path path_;
};

// Runs git in `dir`; throws on a nonzero exit. Returns trimmed stdout.
std::string Git(const std::filesystem::path &dir,
                const std::vector<std::string> &args,
                const std::map<std::string, std::string> &extra_env = {});

// A git repository whose commits carry fixed author and committer dates.
class GitRepo {
 public:
  explicit GitRepo(std::filesystem::path dir);

  // Writes `files` (relative path -> contents), removes `removed`, commits
  // everything at `when`. Returns the commit id.
  std::string Commit(const std::map<std::string, std::string> &files,
                     const std::string &message, Timestamp when,
                     const std::vector<std::string> &removed = {});

  const std::filesystem::path &dir() const { return dir_; }
  std::string url() const { return "file://" + dir_.string(); }

 private:
  std::filesystem::path dir_;
};

// Deterministic generator shared by the property tests.
using Rng = std::mt19937_64;

// Strictly increasing commit times starting at `start`, gaps in [0, max_gap]
// seconds (zero gaps produce ties). Ids are "c<index>-<40 hex>".
std::vector<CommitInfo> RandomHistory(Rng &rng, size_t n, Timestamp start,
                                      int max_gap);

Timestamp T(const char *iso);

}  // namespace vulnrepro::testing

#endif  // VULNREPRO_TESTING_TEST_UTIL_H_
