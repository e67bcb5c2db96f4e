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

#include "vulnrepro/reproducer.h"

#include <algorithm>
#include <chrono>

#include "vulnrepro/error.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace {

constexpr size_t kExcerptLines = 40;

std::string Excerpt(std::string_view log) {
  const std::vector<std::string> lines = SplitLines(log);
  const size_t from = lines.size() > kExcerptLines ? lines.size() - kExcerptLines : 0;
  std::string out;
  for (size_t i = from; i < lines.size(); ++i) out += lines[i] + "\n";
  return out;
}

void AddUnique(std::vector<std::string> &to, const std::string &s) {
  if (std::find(to.begin(), to.end(), s) == to.end()) to.push_back(s);
}

OrderedJson PinJson(const DependencyPin &p) {
  return {{"path", p.path},
          {"type", VcsKindName(p.vcs)},
          {"url", p.url},
          {"rev", p.revision}};
}

DependencyPin PinFromJson(const OrderedJson &j) {
  DependencyPin p;
  p.path = j.at("path").get<std::string>();
  const auto kind = ParseVcsKind(j.at("type").get<std::string>());
  if (!kind) throw Error(ErrorCode::kUnsupportedVcs, j.at("type").dump());
  p.vcs = *kind;
  p.url = j.at("url").get<std::string>();
  p.revision = j.at("rev").get<std::string>();
  return p;
}

std::string_view StageStatusName(StageResult::Status s) {
  switch (s) {
    case StageResult::Status::kNotRun: return "not_run";
    case StageResult::Status::kPassed: return "passed";
    case StageResult::Status::kFailed: return "failed";
  }
  return "not_run";
}

OrderedJson StageJson(const StageResult &s) {
  OrderedJson j = {{"status", StageStatusName(s.status)}};
  if (s.status == StageResult::Status::kFailed) {
    j["failure"] = {{"kind", FailureKindName(s.failure.kind)},
                    {"detail", s.failure.detail}};
  }
  if (!s.artifact.empty()) j["artifact"] = s.artifact;
  if (s.run) {
    j["run"] = {{"status", RunStatusName(s.run->status)},
                {"crash_type", s.run->observed.name()},
                {"exit_code", s.run->exit_code},
                {"duration", s.run->duration_seconds}};
  }
  j["buildspec"] = s.buildspec;
  j["pins"] = PinsToJson(s.pins);
  j["unmatched_pins"] = PinsToJson(s.unmatched_pins);
  j["rules"] = s.rules;
  j["checked_out"] = s.checked_out;
  j["builds"] = s.builds;
  return j;
}

StageResult StageFromJson(const OrderedJson &j) {
  StageResult s;
  const std::string status = j.at("status").get<std::string>();
  if (status == "passed") {
    s.status = StageResult::Status::kPassed;
  } else if (status == "failed") {
    s.status = StageResult::Status::kFailed;
    const auto kind = ParseFailureKind(j.at("failure").at("kind").get<std::string>());
    if (!kind) throw Error(ErrorCode::kParseError, "failure.kind");
    s.failure = {*kind, j["failure"].value("detail", "")};
  } else if (status != "not_run") {
    throw Error(ErrorCode::kParseError, "stage status " + status);
  }
  s.artifact = j.value("artifact", "");
  if (j.contains("run")) {
    const OrderedJson &r = j["run"];
    RunOutcome run;
    const std::string rs = r.at("status").get<std::string>();
    run.status = rs == "crash"     ? RunOutcome::Status::kCrash
                 : rs == "timeout" ? RunOutcome::Status::kTimeout
                                   : RunOutcome::Status::kClean;
    run.observed = CrashClass(r.value("crash_type", ""));
    run.exit_code = r.value("exit_code", 0);
    run.duration_seconds = r.value("duration", 0.0);
    s.run = run;
  }
  s.buildspec = j.value("buildspec", "");
  if (j.contains("pins")) s.pins = PinsFromJson(j["pins"]);
  if (j.contains("unmatched_pins")) {
    s.unmatched_pins = PinsFromJson(j["unmatched_pins"]);
  }
  s.rules = j.value("rules", std::vector<std::string>{});
  if (j.contains("checked_out")) {
    s.checked_out = j["checked_out"].get<std::map<std::string, std::string>>();
  }
  s.builds = j.value("builds", 0);
  return s;
}

// Dependencies whose recorded revision is unknown to their history are moved
// to the last commit at or before `when`.
void ResolveMissingRevisions(std::vector<DependencyPin> &deps,
                             HistorySource &history, Timestamp when,
                             std::vector<std::string> &warnings) {
  for (DependencyPin &dep : deps) {
    std::vector<CommitInfo> log;
    try {
      log = history.Log(dep);
    } catch (const Error &) {
      continue;
    }
    if (log.empty() || FindCommit(log, dep.revision) != nullptr) continue;
    try {
      const CommitInfo &c = ResolveCommitByTimestamp(log, when);
      warnings.push_back(dep.path + ": revision " + dep.revision +
                         " not in history, using " + c.id + " by timestamp");
      dep.revision = c.id;
    } catch (const Error &e) {
      warnings.push_back(dep.path + ": " + e.what());
    }
  }
}

}  // namespace

OrderedJson PinsToJson(std::span<const DependencyPin> pins) {
  OrderedJson a = OrderedJson::array();
  for (const DependencyPin &p : pins) a.push_back(PinJson(p));
  return a;
}

std::vector<DependencyPin> PinsFromJson(const OrderedJson &a) {
  std::vector<DependencyPin> pins;
  for (const auto &j : a) pins.push_back(PinFromJson(j));
  return pins;
}

RecoveredBuild BuildWithRecovery(ExecutionBackend &backend,
                                 const BuildInputs &inputs,
                                 const RuleStore &store,
                                 const ErrorPatternTable &patterns) {
  RecoveredBuild rb;
  std::vector<DependencyPin> pins = {inputs.main_pin};
  if (inputs.pin_dependencies) {
    pins.insert(pins.end(), inputs.dependencies.begin(),
                inputs.dependencies.end());
  }
  const PinResult pinned = PinRevisions(inputs.base, pins);
  rb.pin_edits = pinned.edits;
  rb.unmatched_pins = pinned.unmatched;

  std::vector<std::string> rule_ids;
  for (const std::string &id : inputs.preapplied_rules) AddUnique(rule_ids, id);

  auto attempt = [&] {
    RuleApplication app = ApplyRules(pinned.spec, store.Subset(rule_ids));
    for (std::string &w : app.warnings) rb.warnings.push_back(std::move(w));
    rb.applied_rules = app.applied;
    rb.request = BuildRequest{std::move(app.spec), inputs.main_pin,
                              inputs.workspace_id, pins, app.applied,
                              inputs.run_command, inputs.context_dir,
                              inputs.patch};
    ++rb.attempts;
    rb.outcome = backend.Build(rb.request);
  };

  attempt();
  if (rb.outcome.status != BuildOutcome::Status::kFetchError) return rb;

  rb.broken = DetectBrokenResources(rb.outcome.log, rb.request.spec, patterns);
  if (rb.broken.empty() && !rb.outcome.failed_url.empty()) {
    // The backend named the url without a recognizable log line.
    const auto &ds = rb.request.spec.directives;
    for (size_t i = 0; i < ds.size(); ++i) {
      if (ds[i].text.find(rb.outcome.failed_url) == std::string::npos) continue;
      rb.broken.push_back({rb.outcome.failed_url, i,
                           "backend reported fetch failure: " +
                               rb.outcome.failed_url});
      break;
    }
  }
  bool added = false;
  for (const BrokenResource &b : rb.broken) {
    const ResourceRule *rule = store.FirstMatch(b.url);
    if (rule == nullptr ||
        std::find(rule_ids.begin(), rule_ids.end(), rule->id) != rule_ids.end()) {
      continue;
    }
    rule_ids.push_back(rule->id);
    added = true;
  }
  if (added) attempt();
  return rb;
}

std::string_view FailureKindName(FailureKind kind) {
  switch (kind) {
    case FailureKind::kBuildFailed: return "BuildFailed";
    case FailureKind::kFetchFailed: return "FetchFailed";
    case FailureKind::kVulnNotReproduced: return "VulnNotReproduced";
    case FailureKind::kFixedStillCrashes: return "FixedStillCrashes";
    case FailureKind::kTimeout: return "Timeout";
  }
  return "BuildFailed";
}

std::optional<FailureKind> ParseFailureKind(std::string_view name) {
  for (FailureKind k :
       {FailureKind::kBuildFailed, FailureKind::kFetchFailed,
        FailureKind::kVulnNotReproduced, FailureKind::kFixedStillCrashes,
        FailureKind::kTimeout}) {
    if (FailureKindName(k) == name) return k;
  }
  return std::nullopt;
}

OrderedJson ReportToJson(const ReproductionReport &r) {
  return {{"local_id", r.local_id},
          {"backend", r.backend},
          {"reproduced", r.Reproduced()},
          {"verified", r.Verified()},
          {"vuln", StageJson(r.vuln)},
          {"fix", StageJson(r.fix)},
          {"applied_rules", r.applied_rules},
          {"warnings", r.warnings},
          {"crash_class_mismatch", r.crash_class_mismatch},
          {"elapsed", r.elapsed_seconds}};
}

ReproductionReport ReportFromJson(const OrderedJson &doc) {
  try {
    ReproductionReport r;
    r.local_id = doc.at("local_id").get<int64_t>();
    r.backend = doc.value("backend", "");
    r.vuln = StageFromJson(doc.at("vuln"));
    r.fix = StageFromJson(doc.at("fix"));
    r.applied_rules = doc.value("applied_rules", std::vector<std::string>{});
    r.warnings = doc.value("warnings", std::vector<std::string>{});
    r.crash_class_mismatch = doc.value("crash_class_mismatch", false);
    r.elapsed_seconds = doc.value("elapsed", 0.0);
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("report: ") + e.what());
  }
}

BuildInputs MakeBuildInputs(const IssueRecord &issue, const Corpus &corpus,
                            const SrcMap &srcmap, std::string workspace_id) {
  BuildInputs in;
  in.base = corpus.LoadBuildSpec(issue.project);
  in.main_pin = srcmap.main();
  in.dependencies = srcmap.Dependencies();
  in.run_command = issue.crash.run_command;
  in.context_dir = corpus.ProjectDir(issue.project);
  in.workspace_id = std::move(workspace_id);
  return in;
}

ReproductionReport ReproduceIssue(const IssueRecord &issue,
                                  const Corpus &corpus,
                                  ExecutionBackend &backend,
                                  const RuleStore &store,
                                  const ReproducerOptions &options) {
  const auto start = std::chrono::steady_clock::now();
  ReproductionReport report;
  report.local_id = issue.local_id;
  report.backend = std::string(backend.name());
  auto done = [&] {
    report.elapsed_seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
    return report;
  };
  auto fail = [](StageResult &st, FailureKind kind, std::string detail) {
    st.status = StageResult::Status::kFailed;
    st.failure = {kind, std::move(detail)};
  };

  // Builds one stage; false when the build did not produce an artifact.
  auto build_stage = [&](StageResult &st, const RevisionRef &ref,
                         Timestamp when, std::string_view tag) {
    try {
      const SrcMap map = corpus.LoadSrcMap(issue, ref);
      BuildInputs in = MakeBuildInputs(
          issue, corpus, map,
          options.workspace_prefix + std::to_string(issue.local_id) + "-" +
              std::string(tag));
      in.preapplied_rules = report.applied_rules;
      in.pin_dependencies = options.pin_dependencies;
      if (options.history != nullptr) {
        ResolveMissingRevisions(in.dependencies, *options.history, when,
                                report.warnings);
      }
      RecoveredBuild rb = BuildWithRecovery(backend, in, store, options.patterns);
      st.buildspec = SerializeBuildSpec(rb.request.spec);
      st.pins = rb.request.pins;
      st.unmatched_pins = rb.unmatched_pins;
      st.rules = rb.request.applied_rules;
      st.checked_out = rb.outcome.checked_out;
      st.builds = rb.attempts;
      for (const std::string &id : rb.applied_rules) {
        AddUnique(report.applied_rules, id);
      }
      for (std::string &w : rb.warnings) report.warnings.push_back(std::move(w));
      if (rb.outcome.ok()) {
        st.artifact = rb.outcome.artifact_id;
        return true;
      }
      if (rb.outcome.status == BuildOutcome::Status::kFetchError) {
        fail(st, FailureKind::kFetchFailed,
             rb.outcome.failed_url + "\n" + Excerpt(rb.outcome.log));
      } else {
        fail(st, FailureKind::kBuildFailed, Excerpt(rb.outcome.log));
      }
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kEnvironmentError) throw;
      fail(st, FailureKind::kBuildFailed, e.what());
    }
    return false;
  };

  auto run_stage = [&](StageResult &st) -> std::optional<RunOutcome> {
    try {
      const std::vector<uint8_t> poc = corpus.LoadPoc(issue.poc);
      st.run = backend.RunPoc(st.artifact, poc);
      return st.run;
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kEnvironmentError) throw;
      fail(st, st.failure.kind, e.what());
      return std::nullopt;
    }
  };

  // Vulnerable revision: the PoC must crash.
  if (!build_stage(report.vuln, issue.vulnerable, issue.report_time, "vul")) {
    return done();
  }
  report.vuln.failure.kind = FailureKind::kVulnNotReproduced;
  const std::optional<RunOutcome> vrun = run_stage(report.vuln);
  if (!vrun) return done();
  switch (vrun->status) {
    case RunOutcome::Status::kCrash:
      report.vuln.status = StageResult::Status::kPassed;
      report.vuln.failure = {};
      if (!issue.crash.type.empty() && !vrun->observed.empty() &&
          vrun->observed != issue.crash.type) {
        report.crash_class_mismatch = true;
        report.warnings.push_back("crash class " + vrun->observed.name() +
                                  " differs from recorded " +
                                  issue.crash.type.name());
      }
      break;
    case RunOutcome::Status::kClean:
      fail(report.vuln, FailureKind::kVulnNotReproduced,
           "PoC ran clean (exit " + std::to_string(vrun->exit_code) + ")");
      return done();
    case RunOutcome::Status::kTimeout:
      fail(report.vuln, FailureKind::kVulnNotReproduced, "PoC run timed out");
      return done();
  }

  // Verified revision: the PoC must not crash.
  if (!build_stage(report.fix, issue.verified, issue.verify_time, "fix")) {
    return done();
  }
  report.fix.failure.kind = FailureKind::kFixedStillCrashes;
  const std::optional<RunOutcome> frun = run_stage(report.fix);
  if (!frun) return done();
  switch (frun->status) {
    case RunOutcome::Status::kClean:
      report.fix.status = StageResult::Status::kPassed;
      report.fix.failure = {};
      break;
    case RunOutcome::Status::kCrash:
      fail(report.fix, FailureKind::kFixedStillCrashes,
           "PoC still crashes: " + frun->observed.name());
      break;
    case RunOutcome::Status::kTimeout:
      fail(report.fix, FailureKind::kTimeout, "PoC run timed out");
      break;
  }
  return done();
}

std::string_view PatchVerdictName(PatchVerdict v) {
  switch (v) {
    case PatchVerdict::kNoCrash: return "NoCrash";
    case PatchVerdict::kCrash: return "Crash";
    case PatchVerdict::kCompileFailed: return "CompileFailed";
  }
  return "CompileFailed";
}

PatchVerdict VerifyCandidatePatch(const IssueRecord &issue,
                                  const Corpus &corpus, std::string_view patch,
                                  ExecutionBackend &backend,
                                  const RuleStore &store,
                                  const ReproducerOptions &options) {
  const SrcMap map = corpus.LoadSrcMap(issue, issue.vulnerable);
  BuildInputs in = MakeBuildInputs(
      issue, corpus, map,
      options.workspace_prefix + std::to_string(issue.local_id) + "-patch-" +
          Sha256Hex(patch).substr(0, 12));
  in.patch = std::string(patch);
  in.pin_dependencies = options.pin_dependencies;
  const RecoveredBuild rb =
      BuildWithRecovery(backend, in, store, options.patterns);
  if (!rb.outcome.ok()) return PatchVerdict::kCompileFailed;
  const RunOutcome run =
      backend.RunPoc(rb.outcome.artifact_id, corpus.LoadPoc(issue.poc));
  // A hang is not evidence of a fix.
  return run.status == RunOutcome::Status::kClean ? PatchVerdict::kNoCrash
                                                  : PatchVerdict::kCrash;
}

}  // namespace vulnrepro
