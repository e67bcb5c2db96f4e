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

// Offline issue corpus:
//
//   issues/<local_id>.json          one issue record per file
//   srcmaps/<name>.json             referenced by the issues' srcmap fields
//   pocs/<sha256 hex>               PoC blobs, content-addressed
//   projects/<project>/Dockerfile   build file plus its COPY context
//   rules.txt                       resource rule store (optional)
//   sim_manifest.json               simulated backend table (optional)
//   histories.json                  static histories (optional)

#ifndef VULNREPRO_CORPUS_H_
#define VULNREPRO_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vulnrepro/buildspec.h"
#include "vulnrepro/history.h"
#include "vulnrepro/ingest.h"

namespace vulnrepro {

class Corpus {
 public:
  // Throws kIoError when `root` has no issues/ directory.
  static Corpus Open(const std::filesystem::path &root);

  const std::filesystem::path &root() const { return root_; }

  std::vector<int64_t> IssueIds() const;  // ascending
  // With `history`, absent timestamps fall back to the main project's commit
  // time. Throws kNotFound for an unknown id.
  IssueRecord LoadIssue(int64_t local_id,
                        HistorySource *history = nullptr) const;
  std::vector<IssueRecord> LoadAll(HistorySource *history = nullptr) const;

  // Throws kMissingSrcMap when the document is absent and kParseError when
  // its main entry disagrees with ref.main_revision.
  SrcMap LoadSrcMap(const IssueRecord &issue, const RevisionRef &ref) const;
  // Throws kMissingPoC / kDigestMismatch.
  std::vector<uint8_t> LoadPoc(const PocRef &ref) const;

  std::filesystem::path ProjectDir(const std::string &project) const;
  BuildSpec LoadBuildSpec(const std::string &project) const;

  std::filesystem::path RulesPath() const { return root_ / "rules.txt"; }
  std::filesystem::path SimManifestPath() const {
    return root_ / "sim_manifest.json";
  }
  std::filesystem::path HistoriesPath() const {
    return root_ / "histories.json";
  }

 private:
  explicit Corpus(std::filesystem::path root) : root_(std::move(root)) {}

  std::filesystem::path root_;
};

}  // namespace vulnrepro

#endif  // VULNREPRO_CORPUS_H_
