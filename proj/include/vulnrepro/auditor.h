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

// Audits issues recorded as fixed whose PoC may still crash.
//
// A later commit that stops the crash cannot be told apart from a genuine
// fix without root-cause analysis, so a located commit is reported as
// BrokenReport and flagged for manual review when its diff touches no file
// named in the crash report.

#ifndef VULNREPRO_AUDITOR_H_
#define VULNREPRO_AUDITOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnrepro/corpus.h"
#include "vulnrepro/executor.h"
#include "vulnrepro/fixlocator.h"
#include "vulnrepro/history.h"
#include "vulnrepro/ingest.h"
#include "vulnrepro/resources.h"

namespace vulnrepro {

enum class AuditCategory {
  kConfirmedFixed,
  kPotentialZeroDay,
  kBrokenReport,
  kNeedsManualReview,
};

std::string_view AuditCategoryName(AuditCategory c);
std::optional<AuditCategory> ParseAuditCategory(std::string_view name);

struct AuditProbe {
  std::string label;  // "prebuilt-fix", "recorded-fix", "latest"
  std::string commit;
  ProbeResult result = ProbeResult::kBuildFailed;
  std::string detail;

  bool operator==(const AuditProbe &) const = default;
};

struct AuditVerdict {
  int64_t local_id = 0;
  AuditCategory category = AuditCategory::kNeedsManualReview;
  std::string located_commit;  // kBrokenReport
  // kBrokenReport whose diff touches no file named in the crash report.
  bool manual_review = false;
  std::string reason;
  std::string latest_commit;
  Timestamp latest_time;
  std::vector<AuditProbe> probes;
  std::optional<FixResult> search;  // when the true-fix search ran
};

struct AuditOptions {
  LocateOptions locate;
  // Try the upstream-built fixed binary before rebuilding.
  bool use_prebuilt = true;
};

// Same contract as BisectFix.
FixResult SearchTrueFix(const CommitRange &range, const ProbeFn &probe);

// Commits strictly after the verified revision up to and including
// `latest`. The verified revision is located by id, else by verify_time.
CommitRange TrueFixRange(std::span<const CommitInfo> log,
                         const IssueRecord &issue, const CommitInfo &latest);

// recorded fix (prebuilt first) Clean -> ConfirmedFixed; latest Crash ->
// PotentialZeroDay; latest unbuildable -> NeedsManualReview; latest Clean ->
// search (verified, latest]: Located -> BrokenReport, else NeedsManualReview.
AuditVerdict AuditIssue(const IssueRecord &issue, const CommitInfo &latest,
                        const Corpus &corpus, ExecutionBackend &backend,
                        const RuleStore &store, HistorySource &history,
                        const AuditOptions &options = {});

// True if some touched file's name (or path) appears in the crash report.
// Without a report nothing can be ruled out and the result is true.
bool TouchesReportedFile(const IssueRecord &issue,
                         std::span<const std::string> touched_files);

OrderedJson AuditVerdictToJson(const AuditVerdict &v);
AuditVerdict AuditVerdictFromJson(const OrderedJson &doc);

// Report text for a PotentialZeroDay; nullopt for other categories.
std::optional<std::string> DisclosureText(const IssueRecord &issue,
                                          const AuditVerdict &verdict);

// Counts per category, plain text.
std::string RenderAuditSummary(std::span<const AuditVerdict> verdicts);

}  // namespace vulnrepro

#endif  // VULNREPRO_AUDITOR_H_
