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

// Reproduction bundles, patch records and their statistics, and comparison
// of located fixes with an external fix database.
//
// Bundle directory <out>/<local_id>/:
//   manifest.json     identity, tags, pins, paths below
//   vul.Dockerfile    exact build files of both builds (pinned, rule-fixed)
//   fix.Dockerfile
//   context/          the project's build context (build.sh, ...)
//   rules.txt         the rules the builds used
//   poc               the PoC blob
//   fix.diff          located fix, when there is one
//   srcmap-vul.json, srcmap-fix.json

#ifndef VULNREPRO_DATASET_H_
#define VULNREPRO_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnrepro/corpus.h"
#include "vulnrepro/executor.h"
#include "vulnrepro/fixlocator.h"
#include "vulnrepro/history.h"
#include "vulnrepro/reproducer.h"
#include "vulnrepro/resources.h"

namespace vulnrepro {

// "<local_id>-vul" / "<local_id>-fix".
std::string ImageTag(int64_t local_id, BuildVariant variant);

struct DatasetEntry {
  int64_t local_id = 0;
  std::string project;
  SrcMap vuln_srcmap;
  std::optional<std::string> fix_commit;
  PocRef poc;
  std::vector<std::string> tags;
  std::filesystem::path bundle_dir;
  int64_t dup_group = 0;
};

// Throws kBundleIncomplete when the report is not Reproduced+Verified, a
// stage lacks its build file, the PoC is unavailable, or the fix is Located
// without `fix_diff`.
DatasetEntry EmitBundle(const IssueRecord &issue,
                        const ReproductionReport &report, const FixResult &fix,
                        const Corpus &corpus, const RuleStore &store,
                        const std::optional<std::string> &fix_diff,
                        const std::filesystem::path &out_root,
                        int64_t dup_group = 0);

struct ReplayResult {
  BuildOutcome build;
  std::optional<RunOutcome> run;  // absent when the build failed
};

// Rebuilds one variant from the bundle alone and runs its PoC.
ReplayResult ReplayBundle(const std::filesystem::path &bundle_dir,
                          BuildVariant variant, ExecutionBackend &backend,
                          const std::string &workspace_prefix = "replay-");

struct PatchRecord {
  int64_t local_id = 0;
  std::string project;
  std::string fix_commit;
  int parent_count = 1;
  int files_changed = 0;
  int lines_added = 0;
  int lines_removed = 0;
  std::vector<std::string> touched_files;
  int64_t dup_group = 0;   // local_id of the group representative
  bool duplicate = false;  // not the representative

  bool merge() const { return parent_count > 1; }
  bool operator==(const PatchRecord &) const = default;
};

// Counts from the unified diff of `fix` against its first parent.
PatchRecord MakePatchRecord(int64_t local_id, std::string project,
                            const CommitInfo &fix, std::string_view diff);

OrderedJson PatchRecordToJson(const PatchRecord &r);
PatchRecord PatchRecordFromJson(const OrderedJson &doc);

// Groups by fix_commit; the representative is the lowest local_id. Order is
// preserved and nothing is removed.
std::vector<PatchRecord> DedupPatches(std::vector<PatchRecord> records);

// Representatives that are not merge commits.
std::vector<PatchRecord> FilterForStats(std::span<const PatchRecord> records);

struct Summary {
  double mean = 0;
  double median = 0;
  double stddev = 0;  // population
};

struct PatchStats {
  size_t count = 0;
  Summary files_changed;
  Summary lines_added;
  Summary lines_removed;
  double single_file_fraction = 0;
  // added + removed < 60
  double under_60_lines_fraction = 0;
};

// Throws kEmptyStats.
PatchStats ComputePatchStats(std::span<const PatchRecord> records);
OrderedJson PatchStatsToJson(const PatchStats &stats);
std::string RenderPatchStats(const PatchStats &stats);

struct ComparisonVerdict {
  enum class Bucket { kAgree, kDisagree, kTheirsMissing, kMergeParentRelation };

  int64_t local_id = 0;
  std::string ours;
  std::optional<std::string> theirs;
  Bucket bucket = Bucket::kDisagree;
  std::string preferred;  // kMergeParentRelation: the parent commit

  bool operator==(const ComparisonVerdict &) const = default;
};

std::string_view BucketName(ComparisonVerdict::Bucket b);

// The main-project history of an issue, or null when unknown.
using HistoryLookup =
    std::function<const std::vector<CommitInfo> *(int64_t local_id)>;

// One verdict per entry of `ours`, ascending by local_id.
std::vector<ComparisonVerdict> CompareWithExternal(
    const std::map<int64_t, std::string> &ours,
    const std::map<int64_t, std::string> &theirs,
    const HistoryLookup &histories);

}  // namespace vulnrepro

#endif  // VULNREPRO_DATASET_H_
