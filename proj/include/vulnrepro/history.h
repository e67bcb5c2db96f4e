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

// Commit histories of the main project and its dependencies. The fix
// locator, the auditor and the timestamp fallback of the reproducer read
// histories through HistorySource; GitHistory talks to real repositories and
// StaticHistory serves a JSON document for the simulated backend.

#ifndef VULNREPRO_HISTORY_H_
#define VULNREPRO_HISTORY_H_

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnrepro/ingest.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

struct CommitInfo {
  std::string id;
  Timestamp time;
  std::vector<std::string> parents;

  bool operator==(const CommitInfo &) const = default;
};

class HistorySource {
 public:
  virtual ~HistorySource() = default;

  // All commits reachable from any branch, ascending by commit timestamp;
  // equal timestamps keep topological order (parents first).
  virtual std::vector<CommitInfo> Log(const DependencyPin &repo) = 0;
  // Default-branch tip.
  virtual CommitInfo Tip(const DependencyPin &repo) = 0;
  // Unified diff of `commit` against its first parent (or the empty tree for
  // a root commit).
  virtual std::string Diff(const DependencyPin &repo,
                           std::string_view commit) = 0;
};

// Finds `revision` in `history`, accepting an abbreviated id. Null if absent
// or ambiguous.
const CommitInfo *FindCommit(std::span<const CommitInfo> history,
                             std::string_view revision);

// True if `ancestor` is reachable from `descendant` through parent links
// (a commit is its own ancestor).
bool IsAncestor(std::span<const CommitInfo> history, std::string_view ancestor,
                std::string_view descendant);

// Mirrors git repositories into `cache_dir` on first use. Mercurial and SVN
// locators throw kUnsupportedVcs. Thread-safe.
class GitHistory : public HistorySource {
 public:
  explicit GitHistory(std::filesystem::path cache_dir);

  std::vector<CommitInfo> Log(const DependencyPin &repo) override;
  CommitInfo Tip(const DependencyPin &repo) override;
  std::string Diff(const DependencyPin &repo, std::string_view commit) override;

 private:
  std::filesystem::path Mirror(const DependencyPin &repo);

  std::filesystem::path cache_dir_;
  std::mutex mu_;
  std::map<std::string, std::filesystem::path> mirrors_;
  std::map<std::string, std::vector<CommitInfo>> logs_;
};

// {"<url>": {"tip": "<id>",
//            "commits": [{"id": .., "time": ISO-8601, "parents": [..]}],
//            "diffs": {"<id>": "<unified diff>"}}}
// Repositories are looked up by normalized url.
class StaticHistory : public HistorySource {
 public:
  explicit StaticHistory(const OrderedJson &doc);
  static StaticHistory Load(const std::filesystem::path &path);

  std::vector<CommitInfo> Log(const DependencyPin &repo) override;
  CommitInfo Tip(const DependencyPin &repo) override;
  std::string Diff(const DependencyPin &repo, std::string_view commit) override;

 private:
  struct Repo {
    std::vector<CommitInfo> commits;
    std::string tip;
    std::map<std::string, std::string> diffs;
  };
  const Repo &Get(const DependencyPin &repo) const;

  std::map<std::string, Repo> repos_;
};

}  // namespace vulnrepro

#endif  // VULNREPRO_HISTORY_H_
