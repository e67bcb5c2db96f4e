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

// Rebuilds an issue at its vulnerable and verified revisions and checks the
// PoC against both.
//
// Each build pins every srcmap entry (the main project included) into the
// project's build file, applies the rules already known to be needed, and
// builds. On a FetchError the log is scanned for broken resources; store
// rules matching them are added and the build is retried once.

#ifndef VULNREPRO_REPRODUCER_H_
#define VULNREPRO_REPRODUCER_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vulnrepro/buildspec.h"
#include "vulnrepro/corpus.h"
#include "vulnrepro/executor.h"
#include "vulnrepro/history.h"
#include "vulnrepro/ingest.h"
#include "vulnrepro/resources.h"

namespace vulnrepro {

// Everything needed to turn a build file and a set of pins into a request.
struct BuildInputs {
  BuildSpec base;  // the project's build file, unmodified
  DependencyPin main_pin;
  std::vector<DependencyPin> dependencies;
  std::vector<std::string> run_command;
  std::filesystem::path context_dir;
  std::string workspace_id;
  std::string patch;
  // Rules applied up front, before any failure was seen.
  std::vector<std::string> preapplied_rules;
  // false: only the main project is pinned, dependencies build at head.
  bool pin_dependencies = true;
};

struct RecoveredBuild {
  BuildOutcome outcome;
  BuildRequest request;  // the last request sent
  std::vector<PinEdit> pin_edits;
  std::vector<DependencyPin> unmatched_pins;
  std::vector<std::string> applied_rules;
  std::vector<BrokenResource> broken;  // from the first failed attempt
  std::vector<std::string> warnings;
  int attempts = 0;
};

// Pin, apply rules, build; one retry after rule recovery. Throws whatever
// the backend throws and kAmbiguousPin / kRuleApplicationError.
RecoveredBuild BuildWithRecovery(ExecutionBackend &backend,
                                 const BuildInputs &inputs,
                                 const RuleStore &store,
                                 const ErrorPatternTable &patterns =
                                     ErrorPatternTable::Defaults());

enum class FailureKind {
  kBuildFailed,
  kFetchFailed,
  kVulnNotReproduced,
  kFixedStillCrashes,
  kTimeout,
};

std::string_view FailureKindName(FailureKind kind);
std::optional<FailureKind> ParseFailureKind(std::string_view name);

struct FailureClass {
  FailureKind kind = FailureKind::kBuildFailed;
  std::string detail;  // log excerpt

  bool operator==(const FailureClass &) const = default;
};

struct StageResult {
  enum class Status { kNotRun, kPassed, kFailed };

  Status status = Status::kNotRun;
  FailureClass failure;  // kFailed only
  std::string artifact;  // set whenever the build succeeded
  std::optional<RunOutcome> run;
  std::string buildspec;  // the exact build file sent to the backend
  std::vector<DependencyPin> pins;
  std::vector<DependencyPin> unmatched_pins;
  std::vector<std::string> rules;  // applied to `buildspec`
  std::map<std::string, std::string> checked_out;
  int builds = 0;

  bool passed() const { return status == Status::kPassed; }
};

struct ReproductionReport {
  int64_t local_id = 0;
  std::string backend;
  StageResult vuln;  // passed: Reproduced
  StageResult fix;   // passed: Verified; runs only after vuln passed
  std::vector<std::string> applied_rules;
  std::vector<std::string> warnings;
  // Crash class differs from the recorded one; still counts as Reproduced.
  bool crash_class_mismatch = false;
  double elapsed_seconds = 0;

  bool Reproduced() const { return vuln.passed(); }
  bool Verified() const { return fix.passed(); }
  bool Reproducible() const { return Reproduced() && Verified(); }
};

// [{"path","type","url","rev"}, ...]
OrderedJson PinsToJson(std::span<const DependencyPin> pins);
std::vector<DependencyPin> PinsFromJson(const OrderedJson &doc);

OrderedJson ReportToJson(const ReproductionReport &report);
// Throws kParseError.
ReproductionReport ReportFromJson(const OrderedJson &doc);

struct ReproducerOptions {
  bool pin_dependencies = true;
  // When set, a dependency revision missing from its history is replaced by
  // the commit closest before the stage's timestamp.
  HistorySource *history = nullptr;
  ErrorPatternTable patterns = ErrorPatternTable::Defaults();
  std::string workspace_prefix;
};

// Backend kEnvironmentError propagates; other problems become failures.
ReproductionReport ReproduceIssue(const IssueRecord &issue,
                                  const Corpus &corpus,
                                  ExecutionBackend &backend,
                                  const RuleStore &store,
                                  const ReproducerOptions &options = {});

// Inputs for building `issue` from a srcmap with the corpus build file.
BuildInputs MakeBuildInputs(const IssueRecord &issue, const Corpus &corpus,
                            const SrcMap &srcmap, std::string workspace_id);

enum class PatchVerdict { kNoCrash, kCrash, kCompileFailed };
std::string_view PatchVerdictName(PatchVerdict v);

// Applies `patch` to the vulnerable tree, rebuilds and runs the PoC. An
// empty patch rebuilds the vulnerable tree unchanged. Throws
// kPatchApplyError when the patch does not apply.
PatchVerdict VerifyCandidatePatch(const IssueRecord &issue,
                                  const Corpus &corpus, std::string_view patch,
                                  ExecutionBackend &backend,
                                  const RuleStore &store,
                                  const ReproducerOptions &options = {});

}  // namespace vulnrepro

#endif  // VULNREPRO_REPRODUCER_H_
