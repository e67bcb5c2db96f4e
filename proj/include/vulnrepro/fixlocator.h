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

// Finds the earliest commit between report and verification at which the
// PoC stops crashing.
//
// Candidates are ordered by commit time, not topology, so commits from other
// branches take part; a located fix that is not an ancestor of the verified
// revision is reported with a warning.

#ifndef VULNREPRO_FIXLOCATOR_H_
#define VULNREPRO_FIXLOCATOR_H_

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnrepro/corpus.h"
#include "vulnrepro/executor.h"
#include "vulnrepro/history.h"
#include "vulnrepro/ingest.h"
#include "vulnrepro/resources.h"

namespace vulnrepro {

struct CommitRange {
  std::vector<CommitInfo> candidates;  // ascending time, high anchor last
  std::string low_anchor;              // known to crash, not a candidate
  std::string high_anchor;             // known to be clean
};

// Commits with time in (report_time, verify_time], cut after the high anchor
// (which is appended when the window misses it); the low anchor is never a
// candidate. Throws kNoCandidates on an empty window.
CommitRange EnumerateCandidates(std::span<const CommitInfo> history,
                                const IssueRecord &issue);

// Each dependency pinned to its last commit at or before the candidate's
// time. Dependencies without an entry in `histories` keep their revision.
// Throws kNoCommitBefore.
std::vector<DependencyPin> AlignDependencies(
    const CommitInfo &candidate, std::span<const DependencyPin> dependencies,
    const std::map<std::string, std::vector<CommitInfo>> &histories);

enum class ProbeResult { kCrash, kClean, kBuildFailed };
std::string_view ProbeResultName(ProbeResult r);
std::optional<ProbeResult> ParseProbeResult(std::string_view name);

using ProbeFn = std::function<ProbeResult(const CommitInfo &candidate)>;

// Linear steps tried around an unbuildable midpoint, alternating mid+1,
// mid-1, mid+2, ...
inline constexpr int kMaxLinearSteps = 10;

struct ProbeRecord {
  size_t index = 0;
  std::string commit;
  ProbeResult result = ProbeResult::kBuildFailed;
  std::vector<DependencyPin> pins;  // filled by LocateFix
  std::string detail;

  bool operator==(const ProbeRecord &) const = default;
};

struct BisectionState {
  long known_crashing = -1;  // -1: the low anchor
  long known_clean = 0;
  std::map<size_t, ProbeResult> probed;
  int steps_used = 0;
};

struct FixResult {
  enum class Status { kLocated, kUnresolved };

  Status status = Status::kUnresolved;
  std::string fix_commit;  // kLocated
  size_t fix_index = 0;    // kLocated, index into the candidates
  std::string reason;      // kUnresolved
  bool non_monotone = false;
  int probes = 0;
  int build_failures = 0;
  std::vector<ProbeRecord> transcript;
  std::vector<std::string> warnings;

  bool located() const { return status == Status::kLocated; }
};

inline constexpr std::string_view kReasonUnbuildable = "unbuildable region";
inline constexpr std::string_view kReasonNonMonotone = "non-monotone";
inline constexpr std::string_view kReasonNoCandidates = "no candidates";

// Requires probe(low_anchor) = Crash. The high anchor is probed first: a
// crash there is NonMonotone; a failed build falls back on it being known
// clean.
FixResult BisectFix(const CommitRange &range, const ProbeFn &probe);

OrderedJson FixResultToJson(const FixResult &result);
FixResult FixResultFromJson(const OrderedJson &doc);

struct LocateOptions {
  bool pin_dependencies = true;
  std::vector<std::string> preapplied_rules;
  std::string workspace_prefix;
  ErrorPatternTable patterns = ErrorPatternTable::Defaults();
};

struct ProbeNote {
  std::vector<DependencyPin> pins;  // main project first
  std::string detail;
};

// Builds the issue at a candidate main-project revision, with dependencies
// aligned to the candidate's time, and runs the PoC. A failed build, a
// dependency without a commit before the candidate, and a timed-out run all
// probe as kBuildFailed. Workspaces are "<prefix><id>-probe-<commit12>".
class RevisionProber {
 public:
  // Loads the main and dependency histories; dependencies without one keep
  // their recorded revision (with a warning).
  RevisionProber(const IssueRecord &issue, const Corpus &corpus,
                 ExecutionBackend &backend, const RuleStore &store,
                 HistorySource &history, const LocateOptions &options);

  ProbeResult Probe(const CommitInfo &candidate);
  ProbeFn AsProbeFn() {
    return [this](const CommitInfo &c) { return Probe(c); };
  }
  // Copies pins and details into the transcript.
  void Annotate(FixResult &result) const;

  const SrcMap &srcmap() const { return map_; }
  const std::vector<CommitInfo> &main_log() const { return log_; }
  const std::vector<std::string> &warnings() const { return warnings_; }
  const ProbeNote *Note(std::string_view commit) const;

 private:
  const IssueRecord &issue_;
  const Corpus &corpus_;
  ExecutionBackend &backend_;
  const RuleStore &store_;
  LocateOptions options_;
  SrcMap map_;
  std::vector<CommitInfo> log_;
  std::vector<DependencyPin> deps_;
  std::map<std::string, std::vector<CommitInfo>> dep_histories_;
  std::vector<std::string> warnings_;
  std::map<std::string, ProbeNote, std::less<>> notes_;
};

// enumerate -> per probe (align, pin, rules, build, run) -> bisect. A window
// with no candidates yields Unresolved("no candidates").
FixResult LocateFix(const IssueRecord &issue, const Corpus &corpus,
                    ExecutionBackend &backend, const RuleStore &store,
                    HistorySource &history, const LocateOptions &options = {});

}  // namespace vulnrepro

#endif  // VULNREPRO_FIXLOCATOR_H_
