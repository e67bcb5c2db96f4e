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

// Corpora built on disk for tests: a writer for the corpus layout, and
// scenarios backed by real git repositories and C sources that the local
// backend compiles with AddressSanitizer.

#ifndef VULNREPRO_TESTING_FIXTURES_H_
#define VULNREPRO_TESTING_FIXTURES_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "testing/test_util.h"
#include "vulnrepro/ingest.h"
#include "vulnrepro/resources.h"

namespace vulnrepro::testing {

// Issue record fields; ToJson() gives the corpus document.
struct IssueDoc {
  int64_t local_id = 0;
  std::string project;
  std::set<std::string> labels = {"Bug-Security", "Reproducible", "Verified"};
  std::string crash_type = "heap-buffer-overflow";
  std::optional<std::string> report;
  std::string vul_srcmap;
  std::string vul_rev;
  std::string fix_srcmap;
  std::string fix_rev;
  Timestamp report_time;
  Timestamp verify_time;
  PocRef poc;

  OrderedJson ToJson() const;
};

// Writes the corpus layout: issues/, srcmaps/, pocs/, projects/.
class CorpusBuilder {
 public:
  explicit CorpusBuilder(std::filesystem::path root);

  const std::filesystem::path &root() const { return root_; }

  PocRef AddPoc(const std::vector<uint8_t> &blob);
  // Files relative to projects/<name>/.
  void AddProject(const std::string &name,
                  const std::map<std::string, std::string> &files);
  // Returns the corpus-relative locator "srcmaps/<name>.json".
  std::string AddSrcMap(const std::string &name,
                        const std::vector<DependencyPin> &entries);
  void AddIssue(const IssueDoc &doc);
  void AddIssueText(int64_t local_id, const std::string &text);

 private:
  std::filesystem::path root_;
};

// The C sources shared by the git-backed scenarios. parse_record() copies
// data[0] bytes into an 8-byte heap buffer; the vulnerable version does not
// clamp the length.
std::string ParseSource(bool fixed);
std::string FuzzerSource();
std::string FixLine();

// 32 bytes, data[0] = 31: overflows the vulnerable parser.
std::vector<uint8_t> CrashingPoc();
// 4 bytes, data[0] = 3: in bounds for every version.
std::vector<uint8_t> BenignInput();

// Build context for a project whose main repository is cloned as `name`;
// each extra repository in `deps` (name -> url) is cloned into $SRC/<name>
// and its *.c files are compiled in.
std::map<std::string, std::string> ProjectFiles(
    const std::string &name, const std::string &url,
    const std::vector<std::pair<std::string, std::string>> &deps);

struct LocalScenario {
  std::unique_ptr<TempDir> dir;
  std::filesystem::path corpus;
  std::filesystem::path workspace;
  std::filesystem::path git_cache;
  int64_t local_id = 0;
  std::vector<int64_t> ids;
  std::string main_url;
  std::string fix_commit;
  std::string decoy_commit;
  std::string vul_commit;
  std::string verified_commit;
  std::string latest_commit;
  std::vector<std::string> candidates;
  // Dependency path -> pinned revision / breaking head revision.
  std::map<std::string, std::string> dep_pins;
  std::map<std::string, std::string> dep_heads;
  RuleStore rules;
};

// 14 hourly commits after the report; the fix is candidate 9 and the last
// candidate, the verified revision, only edits ChangeLog. One dependency.
LocalScenario MakeFixWindowScenario();

// Three dependencies pinned to their first commit; depb's head changes a
// signature the main project calls.
LocalScenario MakeDependencyScenario();

// The verified revision only edits README and still crashes; the real fix
// lands months later and the head is clean. The crash report names parse.c.
LocalScenario MakeBrokenReportScenario();

// Like MakeBrokenReportScenario but no fix ever lands: the head crashes.
LocalScenario MakeZeroDayScenario();

// Three issues in three projects that clone a dependency from a locator
// that refuses connections; `rules` holds one Replace rule pointing at a
// working mirror.
LocalScenario MakeDeadUrlScenario();

inline constexpr char kDeadUrl[] = "http://127.0.0.1:1/libdelta.git";

}  // namespace vulnrepro::testing

#endif  // VULNREPRO_TESTING_FIXTURES_H_
