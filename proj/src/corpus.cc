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

#include "vulnrepro/corpus.h"

#include <algorithm>
#include <charconv>

#include "vulnrepro/error.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace fs = std::filesystem;

Corpus Corpus::Open(const fs::path &root) {
  if (!fs::is_directory(root / "issues")) {
    throw Error(ErrorCode::kIoError, "not a corpus: " + root.string());
  }
  return Corpus(fs::absolute(root));
}

std::vector<int64_t> Corpus::IssueIds() const {
  std::vector<int64_t> ids;
  for (const auto &e : fs::directory_iterator(root_ / "issues")) {
    if (e.path().extension() != ".json") continue;
    const std::string stem = e.path().stem().string();
    int64_t id = 0;
    auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
    if (ec == std::errc() && ptr == stem.data() + stem.size() && id > 0) {
      ids.push_back(id);
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

IssueRecord Corpus::LoadIssue(int64_t local_id, HistorySource *history) const {
  const fs::path path = root_ / "issues" / (std::to_string(local_id) + ".json");
  if (!fs::exists(path)) {
    throw Error(ErrorCode::kNotFound, "issue " + std::to_string(local_id));
  }
  OrderedJson doc;
  try {
    doc = OrderedJson::parse(ReadFile(path));
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  CommitTimeLookup lookup;
  if (history != nullptr) {
    lookup = [&](std::string_view project,
                 std::string_view revision) -> std::optional<Timestamp> {
      // The main project's locator comes from whichever srcmap is readable.
      for (const char *side : {"vulnerable", "verified"}) {
        try {
          const std::string locator = doc.at(side).at("srcmap").get<std::string>();
          const SrcMap map = ParseSrcMap(ReadFile(root_ / locator), project);
          const std::vector<CommitInfo> log = history->Log(map.main());
          if (const CommitInfo *c = FindCommit(log, revision)) return c->time;
        } catch (const std::exception &) {
        }
      }
      return std::nullopt;
    };
  }
  IssueRecord issue = ParseIssue(doc, lookup);
  if (issue.local_id != local_id) {
    throw Error(ErrorCode::kParseError, "local_id");
  }
  return issue;
}

std::vector<IssueRecord> Corpus::LoadAll(HistorySource *history) const {
  std::vector<IssueRecord> out;
  for (int64_t id : IssueIds()) out.push_back(LoadIssue(id, history));
  return out;
}

SrcMap Corpus::LoadSrcMap(const IssueRecord &issue,
                          const RevisionRef &ref) const {
  const fs::path path = root_ / ref.srcmap;
  if (ref.srcmap.empty() || !fs::is_regular_file(path)) {
    throw Error(ErrorCode::kMissingSrcMap,
                std::to_string(issue.local_id) + ": " + ref.srcmap);
  }
  SrcMap map = ParseSrcMap(ReadFile(path), issue.project);
  if (!SameRevision(map.main().revision, ref.main_revision)) {
    throw Error(ErrorCode::kParseError,
                ref.srcmap + ": main revision " + map.main().revision +
                    " != " + ref.main_revision);
  }
  return map;
}

std::vector<uint8_t> Corpus::LoadPoc(const PocRef &ref) const {
  std::string_view digest = ref.digest;
  if (digest.starts_with("sha256:")) digest.remove_prefix(7);
  const fs::path path = root_ / "pocs" / std::string(digest);
  if (digest.empty() || !fs::is_regular_file(path)) {
    throw Error(ErrorCode::kMissingPoC, ref.digest);
  }
  std::vector<uint8_t> blob = ReadBinaryFile(path);
  CheckPoc(ref, blob);
  return blob;
}

fs::path Corpus::ProjectDir(const std::string &project) const {
  return root_ / "projects" / project;
}

BuildSpec Corpus::LoadBuildSpec(const std::string &project) const {
  const fs::path path = ProjectDir(project) / "Dockerfile";
  if (!fs::is_regular_file(path)) {
    throw Error(ErrorCode::kNotFound, "build file for " + project);
  }
  return ParseBuildSpec(ReadFile(path), path.string());
}

}  // namespace vulnrepro
