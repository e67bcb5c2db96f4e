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

// The build-and-run substrate. Three backends implement ExecutionBackend:
//   SimBackend        table-driven, for tests and dry runs (sim_backend.h)
//   LocalBackend      real VCS and compiler on the host (local_backend.h)
//   ContainerBackend  builds inside the archived builder image
//                     (container_backend.h)
//
// Every request names a workspace; backends keep all side effects inside it
// and share no mutable state between workspaces, so requests with distinct
// workspace ids may run concurrently.

#ifndef VULNREPRO_EXECUTOR_H_
#define VULNREPRO_EXECUTOR_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnrepro/buildspec.h"
#include "vulnrepro/ingest.h"

namespace vulnrepro {

struct BuildRequest {
  BuildSpec spec;  // already pinned and rule-fixed
  DependencyPin main_pin;
  std::string workspace_id;
  // Pins the spec was instrumented with, and the rules applied to it. The
  // simulated backend keys its table on these; real backends only report
  // them back.
  std::vector<DependencyPin> pins;
  std::vector<std::string> applied_rules;
  // Stored with the artifact and used by RunPoc.
  std::vector<std::string> run_command;
  // Files referenced by COPY/ADD (the project directory with build.sh).
  std::filesystem::path context_dir;
  // Unified diff applied to the main project tree before compiling.
  std::string patch;
};

struct BuildOutcome {
  enum class Status { kSuccess, kCompileError, kFetchError };

  Status status = Status::kCompileError;
  std::string artifact_id;  // kSuccess
  std::string failed_url;   // kFetchError
  std::string log;
  double duration_seconds = 0;
  // Source path ("/src/dep") -> revision actually materialized.
  std::map<std::string, std::string> checked_out;

  bool ok() const { return status == Status::kSuccess; }
};

std::string_view BuildStatusName(BuildOutcome::Status status);

struct RunOutcome {
  enum class Status { kCrash, kClean, kTimeout };

  Status status = Status::kClean;
  CrashClass observed;  // kCrash
  int exit_code = 0;    // or the terminating signal number, negated
  double duration_seconds = 0;
  std::string output;   // sanitizer report / stderr tail
};

std::string_view RunStatusName(RunOutcome::Status status);

enum class BuildVariant { kVulnerable, kFixed };

// "vul" / "fix", as used in image tags.
std::string_view VariantTag(BuildVariant v);

class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;

  virtual std::string_view name() const = 0;

  // Throws Error(kEnvironmentError) when the host lacks the toolchain and
  // Error(kPatchApplyError) when req.patch does not apply. Any other build
  // problem is reported in the outcome.
  virtual BuildOutcome Build(const BuildRequest &req) = 0;

  // Throws Error(kNotFound) for an unknown artifact.
  virtual RunOutcome RunPoc(std::string_view artifact_id,
                            std::span<const uint8_t> poc) = 0;

  // The binary the upstream service used for `variant`, when the backend can
  // retrieve it.
  virtual std::optional<std::string> FetchPrebuilt(const IssueRecord &issue,
                                                   BuildVariant variant) {
    (void)issue;
    (void)variant;
    return std::nullopt;
  }
};

// Crash iff the process died from a signal or printed a sanitizer report;
// the class comes from the report, else "signal-<NAME>".
RunOutcome ClassifyProcessExit(bool signaled, int term_signal, int exit_code,
                               bool timed_out, std::string_view output);

}  // namespace vulnrepro

#endif  // VULNREPRO_EXECUTOR_H_
