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

#include "vulnrepro/executor.h"

#include <signal.h>

#include <string>

namespace vulnrepro {

std::string_view BuildStatusName(BuildOutcome::Status status) {
  switch (status) {
    case BuildOutcome::Status::kSuccess: return "success";
    case BuildOutcome::Status::kCompileError: return "compile_error";
    case BuildOutcome::Status::kFetchError: return "fetch_error";
  }
  return "compile_error";
}

std::string_view RunStatusName(RunOutcome::Status status) {
  switch (status) {
    case RunOutcome::Status::kCrash: return "crash";
    case RunOutcome::Status::kClean: return "clean";
    case RunOutcome::Status::kTimeout: return "timeout";
  }
  return "clean";
}

std::string_view VariantTag(BuildVariant v) {
  return v == BuildVariant::kVulnerable ? "vul" : "fix";
}

RunOutcome ClassifyProcessExit(bool signaled, int term_signal, int exit_code,
                               bool timed_out, std::string_view output) {
  RunOutcome run;
  // Keep the tail; sanitizer summaries come last.
  constexpr size_t kKeep = 16 << 10;
  run.output = std::string(
      output.size() > kKeep ? output.substr(output.size() - kKeep) : output);
  if (timed_out) {
    run.status = RunOutcome::Status::kTimeout;
    run.exit_code = -SIGKILL;
    return run;
  }
  run.exit_code = signaled ? -term_signal : exit_code;
  const bool report = HasSanitizerMarker(output);
  if (!signaled && !report) {
    run.status = RunOutcome::Status::kClean;
    return run;
  }
  run.status = RunOutcome::Status::kCrash;
  run.observed = ClassifySanitizerReport(output);
  if (run.observed.empty()) {
    const char *abbrev = signaled ? sigabbrev_np(term_signal) : nullptr;
    run.observed = CrashClass(abbrev ? "signal-SIG" + std::string(abbrev)
                                     : "signal-" + std::to_string(term_signal));
  }
  return run;
}

}  // namespace vulnrepro
