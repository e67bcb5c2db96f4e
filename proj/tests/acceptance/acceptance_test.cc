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

// Acceptance suite. Each test is named AC<n>_...; after the run one line per
// criterion reports PASS or FAIL. Tolerances and sizes are pinned below.

#include <gtest/gtest.h>

#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "testing/fixtures.h"
#include "testing/oracles.h"
#include "testing/test_util.h"
#include "vulnrepro/auditor.h"
#include "vulnrepro/buildspec.h"
#include "vulnrepro/dataset.h"
#include "vulnrepro/error.h"
#include "vulnrepro/fixlocator.h"
#include "vulnrepro/local_backend.h"
#include "vulnrepro/reproducer.h"
#include "vulnrepro/sim_backend.h"
#include "vulnrepro/util.h"

namespace vulnrepro {
namespace {

namespace fs = std::filesystem;
using testing::Rng;
using testing::SyntheticCommit;
using testing::T;
using testing::TestDataDir;

constexpr int kAc1Histories = 500;
constexpr size_t kAc1MaxLength = 64;
constexpr double kAc1MaxSeconds = 10.0;
constexpr int kAc2Histories = 500;
constexpr double kAc2BuildFailureRate = 0.30;
constexpr int kAc5MinRescued = 3;
constexpr size_t kAc6Candidates = 14;
constexpr double kAc6MaxSeconds = 120.0;
constexpr int kAc9Queries = 1000;
constexpr double kStatsTolerance = 1e-9;

double SecondsSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::vector<SyntheticCommit> Synthetic(Rng &rng, double fail) {
  std::uniform_real_distribution<double> u(0, 1);
  const size_t n = 1 + rng() % kAc1MaxLength;
  const size_t fix = rng() % n;
  std::vector<SyntheticCommit> h(n);
  for (size_t i = 0; i < n; ++i) {
    h[i].crashes = i < fix;
    h[i].builds = i + 1 == n || u(rng) >= fail;
  }
  return h;
}

CommitRange RangeOf(const std::vector<SyntheticCommit> &h) {
  CommitRange r;
  r.low_anchor = "low";
  for (size_t i = 0; i < h.size(); ++i) {
    r.candidates.push_back({"k" + std::to_string(i),
                            T("2022-01-01T00:00:00Z") + std::chrono::hours(i), {}});
  }
  r.high_anchor = r.candidates.back().id;
  return r;
}

ProbeFn ProbeOf(const std::vector<SyntheticCommit> &h) {
  return [&h](const CommitInfo &c) {
    const SyntheticCommit &s = h[std::stoul(c.id.substr(1))];
    if (!s.builds) return ProbeResult::kBuildFailed;
    return s.crashes ? ProbeResult::kCrash : ProbeResult::kClean;
  };
}

TEST(Acceptance, AC1_BisectionMatchesLinearScan) {
  Rng rng(101);
  const auto start = std::chrono::steady_clock::now();
  int matched = 0;
  for (int i = 0; i < kAc1Histories; ++i) {
    const auto h = Synthetic(rng, 0.0);
    const FixResult r = BisectFix(RangeOf(h), ProbeOf(h));
    matched += r.located() && r.fix_index == *testing::LinearScanFix(h);
  }
  const double elapsed = SecondsSince(start);
  EXPECT_EQ(matched, kAc1Histories);
  EXPECT_LT(elapsed, kAc1MaxSeconds);
}

TEST(Acceptance, AC2_UnbuildableCommitsNeverMisattributed) {
  Rng rng(202);
  int misattributed = 0, policy_mismatch = 0, located = 0, unresolved = 0;
  for (int i = 0; i < kAc2Histories; ++i) {
    const auto h = Synthetic(rng, kAc2BuildFailureRate);
    const FixResult r = BisectFix(RangeOf(h), ProbeOf(h));
    const auto model = testing::PolicyModelFix(h);
    if (r.located() != model.has_value() ||
        (r.located() && r.fix_index != *model)) {
      ++policy_mismatch;
    }
    if (r.located()) {
      ++located;
      misattributed += r.fix_index != *testing::LinearScanFix(h);
    } else {
      ++unresolved;
      EXPECT_TRUE(r.reason.starts_with(kReasonUnbuildable)) << r.reason;
    }
  }
  EXPECT_EQ(policy_mismatch, 0);
  EXPECT_EQ(misattributed, 0);
  EXPECT_GT(located, 0);
  EXPECT_GT(unresolved, 0);
}

TEST(Acceptance, AC3_DependenciesArePinned) {
  const testing::LocalScenario s = testing::MakeDependencyScenario();
  ASSERT_EQ(s.dep_pins.size(), 3u);
  const Corpus corpus = Corpus::Open(s.corpus);
  LocalBackendConfig c;
  c.workspace_root = s.workspace;
  LocalBackend backend(c);
  const IssueRecord issue = corpus.LoadIssue(s.local_id);
  const ReproductionReport pinned = ReproduceIssue(issue, corpus, backend, RuleStore());
  ASSERT_FALSE(pinned.vuln.artifact.empty()) << pinned.vuln.failure.detail;
  for (const auto &[path, rev] : s.dep_pins) {
    EXPECT_EQ(pinned.vuln.checked_out.at(path), rev) << path;
  }
  ReproducerOptions o;
  o.pin_dependencies = false;
  o.workspace_prefix = "unpinned-";
  const ReproductionReport head = ReproduceIssue(issue, corpus, backend, RuleStore(), o);
  EXPECT_EQ(head.vuln.status, StageResult::Status::kFailed);
  EXPECT_EQ(head.vuln.failure.kind, FailureKind::kBuildFailed);
  EXPECT_EQ(head.vuln.checked_out.count("/src/depb") ? head.vuln.checked_out.at("/src/depb")
                                                     : s.dep_heads.at("/src/depb"),
            s.dep_heads.at("/src/depb"));
}

TEST(Acceptance, AC4_PinEditsAreAdjacentAndReversible) {
  const fs::path dir = TestDataDir() / "buildspecs";
  const OrderedJson doc = OrderedJson::parse(ReadFile(dir / "expected.json"));
  ASSERT_EQ(doc.size(), 12u);
  for (const auto &c : doc) {
    const std::string text = ReadFile(dir / c["file"].get<std::string>());
    const std::vector<DependencyPin> pins = PinsFromJson(c["pins"]);
    const BuildSpec spec = ParseBuildSpec(text);
    const PinResult r = PinRevisions(spec, pins);
    EXPECT_EQ(SerializeBuildSpec(StripPinEdits(r.spec, r.edits)), text)
        << c["file"];
    EXPECT_EQ(r.edits.size(), pins.size() - c["unmatched"].size()) << c["file"];
    // Each rollback follows its fetch, shifted by earlier rollbacks, with
    // only rollbacks of the same fetch in between.
    for (const PinEdit &e : r.edits) {
      size_t fetch_at = e.insert_after;
      for (const PinEdit &o : r.edits) fetch_at += o.insert_after < e.insert_after;
      EXPECT_EQ(r.spec.directives[fetch_at].text, spec.directives[e.insert_after].text);
      for (size_t k = fetch_at + 1; k < e.inserted_at; ++k) {
        bool same_fetch = false;
        for (const PinEdit &o : r.edits) {
          same_fetch |= o.inserted_at == k && o.insert_after == e.insert_after;
        }
        EXPECT_TRUE(same_fetch) << c["file"] << " directive " << k;
      }
    }
  }
}

TEST(Acceptance, AC5_DeadUrlRescuedByOneRule) {
  const testing::LocalScenario s = testing::MakeDeadUrlScenario();
  ASSERT_EQ(s.rules.rules().size(), 1u);
  ASSERT_EQ(s.rules.rules()[0].action, RuleAction::kReplace);
  const Corpus corpus = Corpus::Open(s.corpus);
  LocalBackendConfig c;
  c.workspace_root = s.workspace;
  LocalBackend backend(c);
  int rescued = 0;
  for (int64_t id : s.ids) {
    const IssueRecord issue = corpus.LoadIssue(id);
    BuildInputs in = MakeBuildInputs(
        issue, corpus, corpus.LoadSrcMap(issue, issue.vulnerable), "dead-" + std::to_string(id));
    const RecoveredBuild bare = BuildWithRecovery(backend, in, RuleStore());
    EXPECT_EQ(bare.outcome.status, BuildOutcome::Status::kFetchError) << id;
    const ReproductionReport r = ReproduceIssue(issue, corpus, backend, s.rules);
    rescued += r.Reproducible();
  }
  EXPECT_GE(rescued, kAc5MinRescued);
}

TEST(Acceptance, AC6_LocatesInjectedFixNotChangeLog) {
  const testing::LocalScenario s = testing::MakeFixWindowScenario();
  ASSERT_EQ(s.candidates.size(), kAc6Candidates);
  const Corpus corpus = Corpus::Open(s.corpus);
  LocalBackendConfig c;
  c.workspace_root = s.workspace;
  LocalBackend backend(c);
  GitHistory history(s.git_cache);
  const auto start = std::chrono::steady_clock::now();
  const FixResult r = LocateFix(corpus.LoadIssue(s.local_id), corpus, backend,
                                RuleStore(), history);
  const double elapsed = SecondsSince(start);
  ASSERT_TRUE(r.located()) << r.reason;
  EXPECT_EQ(r.fix_commit, s.fix_commit);
  EXPECT_NE(r.fix_commit, s.decoy_commit);
  EXPECT_LT(elapsed, kAc6MaxSeconds);
}

AuditVerdict AuditScenario(const testing::LocalScenario &s) {
  const Corpus corpus = Corpus::Open(s.corpus);
  LocalBackendConfig c;
  c.workspace_root = s.workspace;
  LocalBackend backend(c);
  GitHistory history(s.git_cache);
  const IssueRecord issue = corpus.LoadIssue(s.local_id);
  const DependencyPin main = corpus.LoadSrcMap(issue, issue.vulnerable).main();
  return AuditIssue(issue, history.Tip(main), corpus, backend, RuleStore(), history);
}

TEST(Acceptance, AC7_AuditCategories) {
  const testing::LocalScenario broken = testing::MakeBrokenReportScenario();
  const AuditVerdict b = AuditScenario(broken);
  EXPECT_EQ(b.category, AuditCategory::kBrokenReport) << b.reason;
  EXPECT_EQ(b.located_commit, broken.fix_commit);
  const testing::LocalScenario zero = testing::MakeZeroDayScenario();
  const AuditVerdict z = AuditScenario(zero);
  EXPECT_EQ(z.category, AuditCategory::kPotentialZeroDay) << z.reason;
}

TEST(Acceptance, AC8_PatchStatistics) {
  const Corpus corpus = Corpus::Open(TestDataDir() / "corpus");
  StaticHistory history = StaticHistory::Load(corpus.HistoriesPath());
  SimBackend sim = SimBackend::Load(corpus.SimManifestPath());
  const RuleStore store = RuleStore::Load(corpus.RulesPath());
  std::vector<PatchRecord> records;
  for (const IssueRecord &issue : FilterCandidates(corpus.LoadAll(&history))) {
    const FixResult fix = LocateFix(issue, corpus, sim, store, history);
    if (!fix.located()) continue;
    const DependencyPin main = corpus.LoadSrcMap(issue, issue.vulnerable).main();
    const auto log = history.Log(main);
    const CommitInfo *c = FindCommit(log, fix.fix_commit);
    ASSERT_NE(c, nullptr);
    const std::string diff = history.Diff(main, c->id);
    const PatchRecord r = MakePatchRecord(issue.local_id, issue.project, *c, diff);
    const testing::LineCounts want = testing::CountDiffLines(diff);
    EXPECT_EQ(r.lines_added, want.added) << issue.local_id;
    EXPECT_EQ(r.lines_removed, want.removed) << issue.local_id;
    EXPECT_EQ(r.files_changed, want.files) << issue.local_id;
    if (issue.local_id == 7) {
      EXPECT_EQ(r.lines_added, 1);
      EXPECT_EQ(r.lines_removed, 2);
    }
    records.push_back(r);
  }
  ASSERT_FALSE(records.empty());
  const auto deduped = DedupPatches(records);
  std::set<std::string> groups, merge_groups;
  for (const PatchRecord &r : deduped) {
    groups.insert(r.fix_commit);
    if (r.merge()) merge_groups.insert(r.fix_commit);
  }
  const auto filtered = FilterForStats(deduped);
  EXPECT_EQ(filtered.size(), groups.size() - merge_groups.size());
  EXPECT_FALSE(merge_groups.empty());
  const PatchStats st = ComputePatchStats(filtered);
  std::vector<double> added;
  for (const PatchRecord &r : filtered) added.push_back(r.lines_added);
  const testing::NaiveSummary naive = testing::NaiveSummarize(added);
  EXPECT_NEAR(st.lines_added.mean, naive.mean, kStatsTolerance);
  EXPECT_NEAR(st.lines_added.median, naive.median, kStatsTolerance);
  EXPECT_NEAR(st.lines_added.stddev, naive.stddev, kStatsTolerance);
}

TEST(Acceptance, AC9_TimestampResolution) {
  Rng rng(909);
  int agree = 0;
  for (int q = 0; q < kAc9Queries; ++q) {
    const auto h = testing::RandomHistory(rng, 1 + rng() % kAc1MaxLength,
                                          T("2020-01-01T00:00:00Z"),
                                          static_cast<int>(rng() % 4) * 900);
    const int64_t lo = ToUnixSeconds(h.front().time) - 600;
    const int64_t hi = ToUnixSeconds(h.back().time) + 600;
    const Timestamp t =
        FromUnixSeconds(lo + static_cast<int64_t>(rng() % (hi - lo + 1)));
    const auto want = testing::LinearScanResolve(h, t);
    try {
      const CommitInfo got = ResolveCommitByTimestamp(h, t);
      agree += want.has_value() && got.id == h[*want].id;
    } catch (const Error &e) {
      agree += !want.has_value() && e.code() == ErrorCode::kNoCommitBefore;
    }
  }
  EXPECT_EQ(agree, kAc9Queries);
}

TEST(Acceptance, AC10_BundleReplay) {
  const testing::LocalScenario s = testing::MakeDependencyScenario();
  const Corpus corpus = Corpus::Open(s.corpus);
  LocalBackendConfig c;
  c.workspace_root = s.workspace;
  LocalBackend backend(c);
  const IssueRecord issue = corpus.LoadIssue(s.local_id);
  const ReproductionReport report = ReproduceIssue(issue, corpus, backend, RuleStore());
  ASSERT_TRUE(report.Reproducible());
  const DatasetEntry e = EmitBundle(issue, report, FixResult{}, corpus, RuleStore(),
                                    std::nullopt, s.dir->path() / "bundles");
  const ReplayResult a =
      ReplayBundle(e.bundle_dir, BuildVariant::kVulnerable, backend, "first-");
  const ReplayResult b =
      ReplayBundle(e.bundle_dir, BuildVariant::kVulnerable, backend, "second-");
  ASSERT_TRUE(a.build.ok() && b.build.ok());
  ASSERT_TRUE(a.run && b.run);
  EXPECT_EQ(a.build.checked_out, b.build.checked_out);
  EXPECT_EQ(a.run->status, b.run->status);
  EXPECT_EQ(a.run->observed, b.run->observed);
  EXPECT_EQ(a.run->status, RunOutcome::Status::kCrash);
  const ReplayResult f = ReplayBundle(e.bundle_dir, BuildVariant::kFixed, backend);
  ASSERT_TRUE(f.run);
  EXPECT_EQ(f.run->status, RunOutcome::Status::kClean);
}

// Collects per-criterion results and prints one line for each.
class CriterionReporter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const ::testing::TestInfo &info) override {
    const std::string name = info.name();
    if (!name.starts_with("AC")) return;
    const int n = std::stoi(name.substr(2));
    const bool ok = info.result()->Passed();
    auto [it, inserted] = results_.emplace(n, ok);
    if (!inserted) it->second = it->second && ok;
  }

  void OnTestProgramEnd(const ::testing::UnitTest &) override {
    for (int n = 1; n <= 10; ++n) {
      auto it = results_.find(n);
      const char *verdict =
          it == results_.end() ? "NOT RUN" : (it->second ? "PASS" : "FAIL");
      std::printf("criterion %d: %s\n", n, verdict);
    }
    std::fflush(stdout);
  }

 private:
  std::map<int, bool> results_;
};

}  // namespace
}  // namespace vulnrepro

int main(int argc, char **argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(
      new vulnrepro::CriterionReporter);
  return RUN_ALL_TESTS();
}
