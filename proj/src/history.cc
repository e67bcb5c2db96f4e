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

#include "vulnrepro/history.h"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include "vulnrepro/error.h"
#include "vulnrepro/subprocess.h"

namespace vulnrepro {

namespace fs = std::filesystem;

namespace {

// Shortest abbreviation accepted by FindCommit.
constexpr size_t kMinPrefix = 4;

void SortByTime(std::vector<CommitInfo> &commits) {
  std::stable_sort(commits.begin(), commits.end(),
                   [](const CommitInfo &a, const CommitInfo &b) {
                     return a.time < b.time;
                   });
}

ProcessResult Git(const fs::path &dir, std::vector<std::string> args) {
  std::vector<std::string> argv = {"git", "-C", dir.string()};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions opts;
  opts.timeout = std::chrono::minutes(30);
  opts.output_limit = size_t{256} << 20;
  auto env = CurrentEnvironment();
  env["GIT_TERMINAL_PROMPT"] = "0";
  opts.env = std::move(env);
  return RunProcess(argv, opts);
}

}  // namespace

const CommitInfo *FindCommit(std::span<const CommitInfo> history,
                             std::string_view revision) {
  if (revision.empty()) return nullptr;
  for (const CommitInfo &c : history) {
    if (c.id == revision) return &c;
  }
  if (revision.size() < kMinPrefix) return nullptr;
  const CommitInfo *found = nullptr;
  for (const CommitInfo &c : history) {
    if (!c.id.starts_with(revision)) continue;
    if (found != nullptr) return nullptr;  // ambiguous
    found = &c;
  }
  return found;
}

bool IsAncestor(std::span<const CommitInfo> history, std::string_view ancestor,
                std::string_view descendant) {
  const CommitInfo *a = FindCommit(history, ancestor);
  const CommitInfo *d = FindCommit(history, descendant);
  if (a == nullptr || d == nullptr) return false;
  std::unordered_map<std::string_view, const CommitInfo *> by_id;
  for (const CommitInfo &c : history) by_id.emplace(c.id, &c);
  std::set<std::string_view> seen;
  std::deque<const CommitInfo *> queue = {d};
  while (!queue.empty()) {
    const CommitInfo *c = queue.front();
    queue.pop_front();
    if (c->id == a->id) return true;
    if (!seen.insert(c->id).second) continue;
    for (const std::string &p : c->parents) {
      auto it = by_id.find(p);
      if (it != by_id.end()) queue.push_back(it->second);
    }
  }
  return false;
}

GitHistory::GitHistory(fs::path cache_dir) : cache_dir_(std::move(cache_dir)) {}

fs::path GitHistory::Mirror(const DependencyPin &repo) {
  if (repo.vcs != VcsKind::kGit) {
    throw Error(ErrorCode::kUnsupportedVcs,
                "history for " + std::string(VcsKindName(repo.vcs)));
  }
  const std::string key = NormalizeUrl(repo.url);
  auto it = mirrors_.find(key);
  if (it != mirrors_.end()) return it->second;
  const fs::path dir = cache_dir_ / (Sha256Hex(key).substr(0, 16) + ".git");
  fs::create_directories(cache_dir_);
  ProcessResult r;
  if (fs::exists(dir / "HEAD")) {
    r = Git(dir, {"fetch", "-q", "--prune", "origin",
                  "+refs/*:refs/*"});
  } else {
    r = Git(cache_dir_, {"clone", "-q", "--mirror", repo.url, dir.string()});
  }
  if (!r.ok()) {
    throw Error(ErrorCode::kIoError, "mirror " + repo.url + ": " + r.err);
  }
  mirrors_[key] = dir;
  return dir;
}

std::vector<CommitInfo> GitHistory::Log(const DependencyPin &repo) {
  std::lock_guard<std::mutex> lock(mu_);
  const std::string key = NormalizeUrl(repo.url);
  auto cached = logs_.find(key);
  if (cached != logs_.end()) return cached->second;
  const fs::path dir = Mirror(repo);
  const ProcessResult r = Git(
      dir, {"log", "--all", "--topo-order", "--reverse", "--format=%H %ct %P"});
  if (!r.ok()) throw Error(ErrorCode::kIoError, "git log " + repo.url + ": " + r.err);
  std::vector<CommitInfo> commits;
  for (const std::string &line : SplitLines(r.out)) {
    std::istringstream in(line);
    CommitInfo c;
    int64_t t = 0;
    if (!(in >> c.id >> t)) continue;
    c.time = FromUnixSeconds(t);
    std::string p;
    while (in >> p) c.parents.push_back(p);
    commits.push_back(std::move(c));
  }
  SortByTime(commits);
  logs_[key] = commits;
  return commits;
}

CommitInfo GitHistory::Tip(const DependencyPin &repo) {
  const std::vector<CommitInfo> log = Log(repo);
  fs::path dir;
  {
    std::lock_guard<std::mutex> lock(mu_);
    dir = Mirror(repo);
  }
  const ProcessResult r = Git(dir, {"rev-parse", "HEAD"});
  if (!r.ok()) throw Error(ErrorCode::kIoError, "tip " + repo.url + ": " + r.err);
  const CommitInfo *c = FindCommit(log, Trim(r.out));
  if (c == nullptr) throw Error(ErrorCode::kNotFound, "tip of " + repo.url);
  return *c;
}

std::string GitHistory::Diff(const DependencyPin &repo, std::string_view commit) {
  const std::vector<CommitInfo> log = Log(repo);
  const CommitInfo *c = FindCommit(log, commit);
  if (c == nullptr) {
    throw Error(ErrorCode::kNotFound, std::string(commit) + " in " + repo.url);
  }
  fs::path dir;
  {
    std::lock_guard<std::mutex> lock(mu_);
    dir = Mirror(repo);
  }
  const ProcessResult r =
      c->parents.empty()
          ? Git(dir, {"show", "--no-color", "--no-ext-diff", "--format=", c->id})
          : Git(dir, {"diff", "--no-color", "--no-ext-diff", c->parents.front(),
                      c->id});
  if (!r.ok()) throw Error(ErrorCode::kIoError, "diff " + c->id + ": " + r.err);
  return r.out;
}

StaticHistory::StaticHistory(const OrderedJson &doc) {
  if (!doc.is_object() || !doc.contains("repos") || !doc["repos"].is_object()) {
    throw Error(ErrorCode::kParseError, "history: repos");
  }
  for (const auto &[url, r] : doc["repos"].items()) {
    Repo repo;
    try {
      for (const auto &c : r.at("commits")) {
        CommitInfo info;
        info.id = c.at("id").get<std::string>();
        const auto &t = c.at("time");
        info.time = t.is_string() ? ParseIso8601(t.get<std::string>())
                                  : FromUnixSeconds(t.get<int64_t>());
        if (c.contains("parents")) {
          info.parents = c["parents"].get<std::vector<std::string>>();
        }
        repo.commits.push_back(std::move(info));
      }
      if (r.contains("diffs")) {
        repo.diffs = r["diffs"].get<std::map<std::string, std::string>>();
      }
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorCode::kParseError, "history[" + url + "]: " + e.what());
    }
    SortByTime(repo.commits);
    repo.tip = r.value("tip", repo.commits.empty() ? std::string()
                                                   : repo.commits.back().id);
    repos_[NormalizeUrl(url)] = std::move(repo);
  }
}

StaticHistory StaticHistory::Load(const fs::path &path) {
  try {
    return StaticHistory(OrderedJson::parse(ReadFile(path)));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

const StaticHistory::Repo &StaticHistory::Get(const DependencyPin &repo) const {
  auto it = repos_.find(NormalizeUrl(repo.url));
  if (it == repos_.end()) {
    throw Error(ErrorCode::kNotFound, "no history for " + repo.url);
  }
  return it->second;
}

std::vector<CommitInfo> StaticHistory::Log(const DependencyPin &repo) {
  return Get(repo).commits;
}

CommitInfo StaticHistory::Tip(const DependencyPin &repo) {
  const Repo &r = Get(repo);
  const CommitInfo *c = FindCommit(r.commits, r.tip);
  if (c == nullptr) throw Error(ErrorCode::kNotFound, "tip of " + repo.url);
  return *c;
}

std::string StaticHistory::Diff(const DependencyPin &repo,
                                std::string_view commit) {
  const Repo &r = Get(repo);
  const CommitInfo *c = FindCommit(r.commits, commit);
  if (c == nullptr) {
    throw Error(ErrorCode::kNotFound, std::string(commit) + " in " + repo.url);
  }
  auto it = r.diffs.find(c->id);
  if (it == r.diffs.end()) {
    throw Error(ErrorCode::kNotFound, "diff of " + c->id);
  }
  return it->second;
}

}  // namespace vulnrepro
