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

#include <gtest/gtest.h>

#include <algorithm>
#include <csignal>
#include <string>
#include <vector>

#include "testing/error_matchers.h"
#include "testing/test_util.h"
#include "vulnrepro/container_backend.h"
#include "vulnrepro/resources.h"
#include "vulnrepro/sim_backend.h"

namespace vulnrepro {
namespace {

using testing::Rng;
using testing::TempDir;
using testing::TestDataDir;

OrderedJson Manifest() {
  return OrderedJson::parse(R"({
    "dead_urls": ["https://ftp.dead.example.org/pcre.git"],
    "builds": [
      {"revision": "6f6caf", "pins": {"/src/zlib": "z0"},
       "outcome": {"status": "success", "artifact": "im-vul"}},
      {"revision": "6f6caf",
       "outcome": {"status": "compile_error", "log": "zlib.h: no such file"}},
      {"revisions": ["aa668b", "bb"], "rules": ["r1"],
       "outcome": {"status": "success", "artifact": "im-fix",
                   "checked_out": {"/src/imagemagick": "aa668b"}}},
      {"revision": "cc", "patch": "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
       "outcome": {"status": "success", "artifact": "patched"}},
      {"revision": "dd", "outcome": {"status": "patch_error", "log": "hunk failed"}},
      {"revision": "ee", "outcome": {"status": "fetch_error", "url": "https://x.org/y"}}
    ],
    "runs": {"im-vul": {"status": "crash", "crash_type": "heap-buffer-overflow"},
             "im-fix": {"status": "clean"},
             "slow": {"status": "timeout"}},
    "prebuilt": {"44851-fix": "im-fix"}
  })");
}

BuildRequest Request(const std::string &rev,
                     std::vector<DependencyPin> pins = {},
                     std::vector<std::string> rules = {}) {
  BuildRequest req;
  req.spec = ParseBuildSpec("FROM x\nRUN git clone https://github.com/imagemagick/imagemagick\n");
  req.main_pin = {"/src/imagemagick", VcsKind::kGit,
                  "https://github.com/imagemagick/imagemagick", rev};
  req.workspace_id = "w";
  req.pins = std::move(pins);
  req.applied_rules = std::move(rules);
  return req;
}

TEST(SimBackendTest, MatchesRevisionPinsRulesAndPatch) {
  SimBackend sim(Manifest());
  const DependencyPin z0{"/src/zlib", VcsKind::kGit, "https://github.com/madler/zlib", "z0"};
  const DependencyPin z1{"/src/zlib", VcsKind::kGit, "https://github.com/madler/zlib", "z1"};
  const BuildOutcome a = sim.Build(Request("6f6caf0123", {z0}));
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(a.artifact_id, "im-vul");
  EXPECT_EQ(a.checked_out.at("/src/zlib"), "z0");
  EXPECT_EQ(a.checked_out.at("/src/imagemagick"), "6f6caf0123");
  const BuildOutcome b = sim.Build(Request("6f6caf", {z1}));
  EXPECT_EQ(b.status, BuildOutcome::Status::kCompileError);
  EXPECT_EQ(b.log, "zlib.h: no such file");
  EXPECT_FALSE(sim.Build(Request("aa668b")).ok());  // rules differ
  const BuildOutcome c = sim.Build(Request("bb", {}, {"r1"}));
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(c.checked_out.size(), 1u);
  BuildRequest patched = Request("cc");
  EXPECT_FALSE(sim.Build(patched).ok());
  patched.patch = "abc";
  EXPECT_EQ(sim.Build(patched).artifact_id, "patched");
  EXPECT_ERROR_CODE(sim.Build(Request("dd")), ErrorCode::kPatchApplyError);
  const BuildOutcome e = sim.Build(Request("ee"));
  EXPECT_EQ(e.status, BuildOutcome::Status::kFetchError);
  EXPECT_EQ(e.failed_url, "https://x.org/y");
  EXPECT_EQ(sim.Build(Request("unknown")).log, "unscripted");
}

TEST(SimBackendTest, DeadUrlFailsBeforeTable) {
  SimBackend sim(Manifest());
  BuildRequest req = Request("6f6caf");
  req.spec = ParseBuildSpec("FROM x\nRUN git clone https://ftp.dead.example.org/pcre.git\n");
  const BuildOutcome out = sim.Build(req);
  EXPECT_EQ(out.status, BuildOutcome::Status::kFetchError);
  EXPECT_EQ(out.failed_url, "https://ftp.dead.example.org/pcre.git");
  EXPECT_EQ(DetectBrokenResources(out.log, req.spec).size(), 1u);
}

TEST(SimBackendTest, RunsAndPrebuilt) {
  SimBackend sim(Manifest());
  const std::vector<uint8_t> poc = {1, 2, 3};
  const RunOutcome crash = sim.RunPoc("im-vul", poc);
  EXPECT_EQ(crash.status, RunOutcome::Status::kCrash);
  EXPECT_EQ(crash.observed.name(), "heap-buffer-overflow");
  EXPECT_EQ(sim.RunPoc("im-fix", poc).status, RunOutcome::Status::kClean);
  EXPECT_EQ(sim.RunPoc("slow", poc).status, RunOutcome::Status::kTimeout);
  EXPECT_ERROR_CODE(sim.RunPoc("nope", poc), ErrorCode::kNotFound);
  IssueRecord issue;
  issue.local_id = 44851;
  EXPECT_EQ(sim.FetchPrebuilt(issue, BuildVariant::kFixed), "im-fix");
  EXPECT_EQ(sim.FetchPrebuilt(issue, BuildVariant::kVulnerable), std::nullopt);
}

TEST(SimBackendTest, MalformedManifest) {
  EXPECT_ERROR_CODE(SimBackend(OrderedJson::array()), ErrorCode::kParseError);
  EXPECT_ERROR_CODE(SimBackend(OrderedJson::parse(R"({"builds": {}})")),
                    ErrorCode::kParseError);
  EXPECT_ERROR_CODE(SimBackend(OrderedJson::parse(R"({"builds": [{"revision": "a"}]})")),
                    ErrorCode::kParseError);
  TempDir dir;
  WriteFile(dir / "m.json", "{oops");
  EXPECT_ERROR_CODE(SimBackend::Load(dir / "m.json"), ErrorCode::kParseError);
}

TEST(SimBackendTest, DeterministicOverThousandRequests) {
  SimBackend sim = SimBackend::Load(TestDataDir() / "corpus/sim_manifest.json");
  const OrderedJson manifest =
      OrderedJson::parse(ReadFile(TestDataDir() / "corpus/sim_manifest.json"));
  std::vector<std::string> revisions;
  for (const auto &b : manifest["builds"]) {
    if (b.contains("revision")) revisions.push_back(b["revision"]);
    if (b.contains("revisions")) {
      for (const auto &r : b["revisions"]) revisions.push_back(r);
    }
  }
  revisions.push_back("0000000");
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const std::string rev = revisions[rng() % revisions.size()];
    std::vector<std::string> rules;
    if (rng() % 2) rules.push_back("pcre-git-mirror");
    const BuildOutcome first = sim.Build(Request(rev, {}, rules));
    const BuildOutcome second = sim.Build(Request(rev, {}, rules));
    ASSERT_EQ(first.status, second.status);
    ASSERT_EQ(first.artifact_id, second.artifact_id);
    ASSERT_EQ(first.log, second.log);
    ASSERT_EQ(first.checked_out, second.checked_out);
    if (first.ok()) {
      const std::vector<uint8_t> poc = {static_cast<uint8_t>(rng())};
      ASSERT_EQ(sim.RunPoc(first.artifact_id, poc).status,
                sim.RunPoc(first.artifact_id, poc).status);
    }
  }
}

TEST(PinsFingerprintTest, OrderIndependent) {
  const DependencyPin a{"/src/a", VcsKind::kGit, "https://x/a", "1"};
  const DependencyPin b{"/src/b", VcsKind::kGit, "https://x/b", "2"};
  const std::vector<DependencyPin> ab = {a, b};
  const std::vector<DependencyPin> ba = {b, a};
  EXPECT_EQ(PinsFingerprint(ab), PinsFingerprint(ba));
  const std::vector<DependencyPin> only_a = {a};
  EXPECT_NE(PinsFingerprint(ab), PinsFingerprint(only_a));
}

TEST(ClassifyExitTest, Outcomes) {
  EXPECT_EQ(ClassifyProcessExit(false, 0, 0, false, "ok").status,
            RunOutcome::Status::kClean);
  EXPECT_EQ(ClassifyProcessExit(false, 0, 1, false, "usage").status,
            RunOutcome::Status::kClean);
  const RunOutcome asan = ClassifyProcessExit(
      false, 0, 1, false, "==9==ERROR: AddressSanitizer: stack-buffer-overflow on");
  EXPECT_EQ(asan.status, RunOutcome::Status::kCrash);
  EXPECT_EQ(asan.observed.name(), "stack-buffer-overflow");
  const RunOutcome segv = ClassifyProcessExit(true, SIGSEGV, 0, false, "");
  EXPECT_EQ(segv.status, RunOutcome::Status::kCrash);
  EXPECT_EQ(segv.observed.name(), "signal-sigsegv");
  EXPECT_EQ(segv.exit_code, -SIGSEGV);
  EXPECT_EQ(ClassifyProcessExit(false, 0, 0, true, "").status,
            RunOutcome::Status::kTimeout);
}

TEST(NamesTest, StatusAndVariantNames) {
  EXPECT_EQ(BuildStatusName(BuildOutcome::Status::kFetchError), "fetch_error");
  EXPECT_EQ(RunStatusName(RunOutcome::Status::kCrash), "crash");
  EXPECT_EQ(VariantTag(BuildVariant::kVulnerable), "vul");
  EXPECT_EQ(VariantTag(BuildVariant::kFixed), "fix");
}

TEST(ContainerBackendTest, CommandAssembly) {
  ContainerBackendConfig c;
  c.workspace_root = "/ws";
  const auto build = DockerBuildCommand(c, "vulnrepro/44851-vul", "/ws/ctx");
  EXPECT_EQ(build.front(), "docker");
  EXPECT_EQ(build[1], "build");
  EXPECT_EQ(build.back(), "/ws/ctx");
  const auto compile = DockerCompileCommand(c, "t", "/ws/out", "/src/im", true,
                                            "/ws/p.diff");
  EXPECT_NE(std::find(compile.begin(), compile.end(), "/ws/out:/out"), compile.end());
  EXPECT_NE(compile.back().find("git apply --check"), std::string::npos);
  EXPECT_NE(compile.back().find("compile"), std::string::npos);
  const auto plain = DockerCompileCommand(c, "t", "/ws/out", "/src/im", false, "");
  EXPECT_EQ(plain.back().find("git apply"), std::string::npos);
  const auto run = DockerRunPocCommand(c, "/ws/out", "/ws/tc",
                                       {"$OUT/fuzzer", "{testcase}"});
  EXPECT_EQ(run.back(), "/testcase");
  EXPECT_NE(std::find(run.begin(), run.end(), c.runner_image), run.end());
}

TEST(ContainerBackendTest, MissingRuntimeIsEnvironmentError) {
  TempDir dir;
  ContainerBackendConfig c;
  c.workspace_root = dir.path();
  c.docker = "/nonexistent/docker";
  ContainerBackend backend(c);
  EXPECT_ERROR_CODE(backend.Build(Request("a")), ErrorCode::kEnvironmentError);
}

}  // namespace
}  // namespace vulnrepro
