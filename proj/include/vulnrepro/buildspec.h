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

// Line-level model of a container build file and the revision-pinning
// instrumentation applied to it.
//
// Pinning only ever inserts directives: for every dependency fetched by a
// git/hg/svn command whose locator matches a source-map pin, one rollback
// directive is added right after the fetching directive. Nothing else in the
// file changes, so StripPinEdits() gives back the original bytes.

#ifndef VULNREPRO_BUILDSPEC_H_
#define VULNREPRO_BUILDSPEC_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnrepro/history.h"
#include "vulnrepro/ingest.h"

namespace vulnrepro {

enum class DirectiveKind { kRun, kCopy, kEnv, kWorkdir, kOther };

struct Directive {
  DirectiveKind kind = DirectiveKind::kOther;
  // Raw source lines joined with '\n', without the final newline.
  std::string text;
  int first_line = 0;  // 1-based, inclusive
  int last_line = 0;

  // The instruction keyword, upper-cased ("RUN", "FROM", ...). Empty for
  // blank and comment lines.
  std::string Keyword() const;
  // Text after the keyword, continuations kept.
  std::string_view Body() const;
};

struct BuildSpec {
  std::vector<Directive> directives;
  std::string origin;
  bool trailing_newline = true;

  // Recomputes line spans after directives were inserted or removed.
  void Renumber();
};

// Every line lands in exactly one directive; blank and comment lines outside
// a continuation become their own kOther directives. Throws kParseError with
// the line number on an unterminated continuation.
BuildSpec ParseBuildSpec(std::string_view text, std::string origin = "");
std::string SerializeBuildSpec(const BuildSpec &spec);

struct FetchPoint {
  size_t directive_index = 0;
  VcsKind vcs = VcsKind::kGit;
  std::string url;       // as written in the directive
  std::string dest_dir;  // relative to the directive's working directory
  size_t pin_index = 0;  // index into the pins passed to LocateFetchPoints
};

struct FetchPointScan {
  std::vector<FetchPoint> points;
  // Pins with no matching fetch command (including packages fetched by
  // apt/pip, which are left alone).
  std::vector<DependencyPin> unmatched;
};

// Directive order, then command order within a directive.
FetchPointScan LocateFetchPoints(const BuildSpec &spec,
                                 std::span<const DependencyPin> pins);

// `git -C <dest> checkout <rev>`, `hg -R <dest> update -r <rev>` or
// `svn update -r <rev> <dest>`, without the RUN keyword.
std::string RollbackCommand(VcsKind vcs, std::string_view dest_dir,
                            std::string_view revision);

struct PinEdit {
  size_t insert_after = 0;   // directive index in the original spec
  size_t inserted_at = 0;    // directive index in the pinned spec
  std::string command_text;  // full directive text, "RUN ..."
  DependencyPin pin;
};

struct PinResult {
  BuildSpec spec;
  std::vector<PinEdit> edits;
  std::vector<DependencyPin> unmatched;
};

// Throws kAmbiguousPin when two pins match the same fetch command.
PinResult PinRevisions(const BuildSpec &spec,
                       std::span<const DependencyPin> pins);

// Inverse of PinRevisions.
BuildSpec StripPinEdits(const BuildSpec &pinned,
                        std::span<const PinEdit> edits);

// Patch-style audit log of the inserted rollbacks.
std::string RenderPinLog(const BuildSpec &original,
                         std::span<const PinEdit> edits);

// The commit with the greatest timestamp <= `query`; among equal timestamps
// the later one in history order. `history` must be sorted ascending by
// time. Throws kNoCommitBefore.
const CommitInfo &ResolveCommitByTimestamp(std::span<const CommitInfo> history,
                                           Timestamp query);

}  // namespace vulnrepro

#endif  // VULNREPRO_BUILDSPEC_H_
