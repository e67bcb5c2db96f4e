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

// Issue records and source maps as published by the upstream fuzzing
// service, plus the label filter that selects reproducible candidates.
//
// Issue document (one JSON file per issue):
//   {"local_id": 44851, "project": "imagemagick",
//    "labels": ["Bug-Security", "Reproducible", "Verified"],
//    "crash": {"type": "heap-buffer-overflow", "sanitizer": "address",
//              "fuzzer": "libfuzzer", "command": ["/out/x", "{testcase}"],
//              "report": "..."},
//    "vulnerable": {"srcmap": "srcmaps/44851-vul.json", "rev": "6f6caf..."},
//    "verified": {"srcmap": "srcmaps/44851-fix.json", "rev": "aa668b..."},
//    "report_time": "2022-02-18T10:00:00Z",
//    "verify_time": "2022-02-20T09:00:00Z",
//    "poc": {"digest": "sha256:<hex>", "bytes": 17}}
//
// Source map (one JSON object per build):
//   {"/src/imagemagick": {"type": "git", "url": "...", "rev": "..."}, ...}

#ifndef VULNREPRO_INGEST_H_
#define VULNREPRO_INGEST_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vulnrepro/util.h"

namespace vulnrepro {

using OrderedJson = nlohmann::ordered_json;

// Stands for the PoC file path in CrashInfo::run_command.
inline constexpr std::string_view kPocPlaceholder = "{testcase}";

// The three labels an issue needs to be a reproduction candidate. Matched
// case-sensitively.
inline constexpr std::string_view kLabelSecurity = "Bug-Security";
inline constexpr std::string_view kLabelReproducible = "Reproducible";
inline constexpr std::string_view kLabelVerified = "Verified";

enum class VcsKind { kGit, kMercurial, kSvn };

// "git", "hg", "svn".
std::string_view VcsKindName(VcsKind kind);
// Also accepts "mercurial" and "subversion".
std::optional<VcsKind> ParseVcsKind(std::string_view name);

struct DependencyPin {
  std::string path;  // e.g. "/src/zlib"
  VcsKind vcs = VcsKind::kGit;
  std::string url;
  std::string revision;

  bool operator==(const DependencyPin &) const = default;
};

// True if `url` is a plausible locator for `kind`: a scheme URL, an absolute
// path, or (git only) the scp-like `user@host:path` form.
bool IsValidRepositoryUrl(VcsKind kind, std::string_view url);

class SrcMap {
 public:
  SrcMap() = default;
  // Throws kParseError on duplicate paths or an out-of-range main index.
  SrcMap(std::vector<DependencyPin> entries, size_t main_index);

  const std::vector<DependencyPin> &entries() const { return entries_; }
  const DependencyPin &main() const { return entries_.at(main_index_); }
  size_t main_index() const { return main_index_; }
  const DependencyPin *Find(std::string_view path) const;
  // Every entry except the main project, in document order.
  std::vector<DependencyPin> Dependencies() const;

  bool operator==(const SrcMap &) const = default;

 private:
  std::vector<DependencyPin> entries_;
  size_t main_index_ = 0;
};

// The main project entry is the one whose path basename equals
// `main_project` (exactly, else case-insensitively).
// Throws kMainProjectMissing, kUnsupportedVcs, kParseError.
SrcMap ParseSrcMap(const OrderedJson &doc, std::string_view main_project);
SrcMap ParseSrcMap(std::string_view json_text, std::string_view main_project);
inline SrcMap ParseSrcMap(const std::string &json_text,
                          std::string_view main_project) {
  return ParseSrcMap(std::string_view(json_text), main_project);
}
OrderedJson SerializeSrcMap(const SrcMap &map);

// A sanitizer crash class such as "heap-buffer-overflow". Known classes are
// listed in KnownCrashClasses(); anything else is kept verbatim.
class CrashClass {
 public:
  CrashClass() = default;
  explicit CrashClass(std::string_view name);

  const std::string &name() const { return name_; }
  bool empty() const { return name_.empty(); }
  bool known() const;

  bool operator==(const CrashClass &) const = default;

 private:
  std::string name_;
};

std::span<const std::string_view> KnownCrashClasses();

// Extracts the crash class from a sanitizer report, e.g. "ERROR:
// AddressSanitizer: heap-buffer-overflow on ..." gives heap-buffer-overflow
// and "SEGV on unknown address" gives unknown-address. Empty if no sanitizer
// marker is present.
CrashClass ClassifySanitizerReport(std::string_view report);
bool HasSanitizerMarker(std::string_view output);

struct CrashInfo {
  CrashClass type;
  std::string sanitizer;
  std::string fuzzer;
  std::vector<std::string> run_command;
  std::optional<std::string> report;

  bool operator==(const CrashInfo &) const = default;
};

struct RevisionRef {
  std::string srcmap;  // corpus-relative locator of the SrcMap document
  std::string main_revision;

  bool operator==(const RevisionRef &) const = default;
};

struct PocRef {
  std::string digest;  // "sha256:<64 hex>"
  uint64_t bytes = 0;

  bool operator==(const PocRef &) const = default;
};

struct IssueRecord {
  int64_t local_id = 0;
  std::string project;
  std::set<std::string> labels;
  CrashInfo crash;
  RevisionRef vulnerable;
  RevisionRef verified;
  Timestamp report_time;
  Timestamp verify_time;
  PocRef poc;

  bool operator==(const IssueRecord &) const = default;
};

// Commit time of `revision` in `project`, used when a record lacks
// report_time (vulnerable revision) or verify_time (verified revision).
using CommitTimeLookup = std::function<std::optional<Timestamp>(
    std::string_view project, std::string_view revision)>;

// Throws kParseError naming the offending field, or kMissingPoC.
IssueRecord ParseIssue(const OrderedJson &doc,
                       const CommitTimeLookup &commit_time = nullptr);
IssueRecord ParseIssue(std::string_view json_text,
                       const CommitTimeLookup &commit_time = nullptr);
inline IssueRecord ParseIssue(const std::string &json_text,
                              const CommitTimeLookup &commit_time = nullptr) {
  return ParseIssue(std::string_view(json_text), commit_time);
}
// Canonical form: UTC timestamps with a `Z` suffix, labels sorted, optional
// fields omitted when absent.
OrderedJson SerializeIssue(const IssueRecord &issue);

// Verifies a PoC blob against its reference; throws kDigestMismatch.
void CheckPoc(const PocRef &ref, std::span<const uint8_t> blob);
PocRef MakePocRef(std::span<const uint8_t> blob);

bool IsCandidate(const IssueRecord &issue);
// Keeps issues carrying all three labels whose vulnerable and verified main
// revisions differ. Order preserved.
std::vector<IssueRecord> FilterCandidates(std::span<const IssueRecord> issues);

// Replaces the placeholder in `run_command` with `poc_path`.
std::vector<std::string> SubstitutePoc(std::span<const std::string> run_command,
                                       std::string_view poc_path);

}  // namespace vulnrepro

#endif  // VULNREPRO_INGEST_H_
