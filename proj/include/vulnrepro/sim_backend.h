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

// Table-driven backend. The manifest scripts build and run outcomes:
//
// {
//   "dead_urls": ["https://ftp.example.org/lib.tar.gz"],
//   "builds": [
//     {"revision": "6f6caf", "pins": {"/src/zlib": "r2"}, "rules": [],
//      "outcome": {"status": "success", "artifact": "im-vul"}},
//     {"revisions": ["a1", "a2"],
//      "outcome": {"status": "compile_error", "log": "..."}}
//   ],
//   "runs": {"im-vul": {"status": "crash", "crash_type": "heap-buffer-overflow"}},
//   "prebuilt": {"44851-fix": "im-fix"}
// }
//
// A build entry matches when its revision is a prefix-compatible match of
// the main pin's revision, every listed pin path carries the listed revision
// (or "pins_fingerprint" equals PinsFingerprint of the request), "rules"
// (when present) equals the applied rule ids as a set, and "patch" (when
// present) equals the sha256 of the request patch. Absent keys match
// anything except that an entry without "patch" only matches unpatched
// requests. First match wins.
//
// A spec mentioning a dead url fails with FetchError before the table is
// consulted. A success without an explicit artifact is named after the
// revision; its checked_out defaults to the request pins.

#ifndef VULNREPRO_SIM_BACKEND_H_
#define VULNREPRO_SIM_BACKEND_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vulnrepro/executor.h"

namespace vulnrepro {

// sha256 over the sorted "path=revision" lines of `pins`.
std::string PinsFingerprint(std::span<const DependencyPin> pins);

class SimBackend : public ExecutionBackend {
 public:
  // Throws kParseError on a malformed manifest.
  explicit SimBackend(OrderedJson manifest);
  static SimBackend Load(const std::filesystem::path &path);

  std::string_view name() const override { return "sim"; }
  BuildOutcome Build(const BuildRequest &req) override;
  RunOutcome RunPoc(std::string_view artifact_id,
                    std::span<const uint8_t> poc) override;
  std::optional<std::string> FetchPrebuilt(const IssueRecord &issue,
                                           BuildVariant variant) override;

 private:
  OrderedJson manifest_;
};

}  // namespace vulnrepro

#endif  // VULNREPRO_SIM_BACKEND_H_
