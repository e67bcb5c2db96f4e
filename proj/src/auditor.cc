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

#include "vulnrepro/auditor.h"

#include <array>
#include <cstdio>
#include <sstream>

#include "vulnrepro/diffstat.h"
#include "vulnrepro/error.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace {

constexpr std::array kCategories = {
    AuditCategory::kConfirmedFixed, AuditCategory::kPotentialZeroDay,
    AuditCategory::kBrokenReport, AuditCategory::kNeedsManualReview};

ProbeResult FromRun(const RunOutcome &run) {
  switch (run.status) {
    case RunOutcome::Status::kCrash: return ProbeResult::kCrash;
    case RunOutcome::Status::kClean: return ProbeResult::kClean;
    case RunOutcome::Status::kTimeout: return ProbeResult::kBuildFailed;
  }
  return ProbeResult::kBuildFailed;
}

}  // namespace

std::string_view AuditCategoryName(AuditCategory c) {
  switch (c) {
    case AuditCategory::kConfirmedFixed: return "ConfirmedFixed";
    case AuditCategory::kPotentialZeroDay: return "PotentialZeroDay";
    case AuditCategory::kBrokenReport: return "BrokenReport";
    case AuditCategory::kNeedsManualReview: return "NeedsManualReview";
  }
  return "NeedsManualReview";
}

std::optional<AuditCategory> ParseAuditCategory(std::string_view name) {
  for (AuditCategory c : kCategories) {
    if (AuditCategoryName(c) == name) return c;
  }
  return std::nullopt;
}

FixResult SearchTrueFix(const CommitRange &range, const ProbeFn &probe) {
  return BisectFix(range, probe);
}

CommitRange TrueFixRange(std::span<const CommitInfo> log,
                         const IssueRecord &issue, const CommitInfo &latest) {
  CommitRange range;
  range.low_anchor = issue.verified.main_revision;
  range.high_anchor = latest.id;
  const CommitInfo *verified = FindCommit(log, issue.verified.main_revision);
  bool after = false;
  for (const CommitInfo &c : log) {
    if (verified != nullptr) {
      if (!after) {
        after = c.id == verified->id;
        continue;
      }
    } else if (c.time <= issue.verify_time) {
      continue;
    }
    range.candidates.push_back(c);
    if (c.id == latest.id) break;
  }
  if (range.candidates.empty() || range.candidates.back().id != latest.id) {
    range.candidates.push_back(latest);
  }
  return range;
}

bool TouchesReportedFile(const IssueRecord &issue,
                         std::span<const std::string> touched_files) {
  if (!issue.crash.report || issue.crash.report->empty()) return true;
  const std::string &report = *issue.crash.report;
  for (const std::string &path : touched_files) {
    const size_t slash = path.rfind('/');
    const std::string name =
        slash == std::string::npos ? path : path.substr(slash + 1);
    if (!name.empty() && report.find(name) != std::string::npos) return true;
  }
  return false;
}

AuditVerdict AuditIssue(const IssueRecord &issue, const CommitInfo &latest,
                        const Corpus &corpus, ExecutionBackend &backend,
                        const RuleStore &store, HistorySource &history,
                        const AuditOptions &options) {
  AuditVerdict v;
  v.local_id = issue.local_id;
  v.latest_commit = latest.id;
  v.latest_time = latest.time;
  auto finish = [&](AuditCategory c, std::string reason) {
    v.category = c;
    v.reason = std::move(reason);
    return v;
  };

  RevisionProber prober(issue, corpus, backend, store, history, options.locate);
  auto probe = [&](std::string label, const CommitInfo &c) {
    const ProbeResult r = prober.Probe(c);
    const ProbeNote *note = prober.Note(c.id);
    v.probes.push_back({std::move(label), c.id, r, note ? note->detail : ""});
    return r;
  };

  // The recorded fix: the upstream binary when available, else a rebuild.
  std::optional<ProbeResult> recorded;
  if (options.use_prebuilt) {
    if (const auto artifact = backend.FetchPrebuilt(issue, BuildVariant::kFixed)) {
      const RunOutcome run = backend.RunPoc(*artifact, corpus.LoadPoc(issue.poc));
      recorded = FromRun(run);
      v.probes.push_back({"prebuilt-fix", issue.verified.main_revision,
                          *recorded, run.observed.name()});
    }
  }
  if (!recorded) {
    const CommitInfo *c =
        FindCommit(prober.main_log(), issue.verified.main_revision);
    CommitInfo fallback{issue.verified.main_revision, issue.verify_time, {}};
    recorded = probe("recorded-fix", c != nullptr ? *c : fallback);
  }
  if (*recorded == ProbeResult::kClean) {
    return finish(AuditCategory::kConfirmedFixed, "recorded fix runs clean");
  }
  if (*recorded == ProbeResult::kBuildFailed) {
    return finish(AuditCategory::kNeedsManualReview,
                  "recorded fix could not be probed");
  }

  switch (probe("latest", latest)) {
    case ProbeResult::kCrash:
      return finish(AuditCategory::kPotentialZeroDay,
                    "PoC crashes latest " + latest.id);
    case ProbeResult::kBuildFailed:
      return finish(AuditCategory::kNeedsManualReview,
                    "latest " + latest.id + " did not build");
    case ProbeResult::kClean:
      break;
  }

  const CommitRange range = TrueFixRange(prober.main_log(), issue, latest);
  FixResult search = SearchTrueFix(range, prober.AsProbeFn());
  prober.Annotate(search);
  v.search = search;
  if (!search.located()) {
    return finish(AuditCategory::kNeedsManualReview,
                  "true fix not found: " + search.reason);
  }
  v.located_commit = search.fix_commit;
  try {
    const DiffStat stat =
        ParseUnifiedDiff(history.Diff(prober.srcmap().main(), search.fix_commit));
    v.manual_review = !TouchesReportedFile(issue, stat.touched_files());
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kEnvironmentError) throw;
    v.manual_review = true;
  }
  return finish(AuditCategory::kBrokenReport,
                v.manual_review
                    ? "located commit touches no file in the crash report"
                    : "true fix located");
}

OrderedJson AuditVerdictToJson(const AuditVerdict &v) {
  OrderedJson probes = OrderedJson::array();
  for (const AuditProbe &p : v.probes) {
    probes.push_back({{"label", p.label},
                      {"commit", p.commit},
                      {"result", ProbeResultName(p.result)},
                      {"detail", p.detail}});
  }
  OrderedJson j = {{"local_id", v.local_id},
                   {"category", AuditCategoryName(v.category)}};
  if (v.category == AuditCategory::kBrokenReport) {
    j["located_commit"] = v.located_commit;
    j["manual_review"] = v.manual_review;
  }
  j["reason"] = v.reason;
  j["latest"] = {{"commit", v.latest_commit},
                 {"time", FormatIso8601(v.latest_time)}};
  j["probes"] = std::move(probes);
  if (v.search) j["search"] = FixResultToJson(*v.search);
  return j;
}

AuditVerdict AuditVerdictFromJson(const OrderedJson &doc) {
  try {
    AuditVerdict v;
    v.local_id = doc.at("local_id").get<int64_t>();
    const auto c = ParseAuditCategory(doc.at("category").get<std::string>());
    if (!c) throw Error(ErrorCode::kParseError, "audit category");
    v.category = *c;
    v.located_commit = doc.value("located_commit", "");
    v.manual_review = doc.value("manual_review", false);
    v.reason = doc.value("reason", "");
    v.latest_commit = doc.at("latest").at("commit").get<std::string>();
    v.latest_time = ParseIso8601(doc["latest"].at("time").get<std::string>());
    for (const auto &p : doc.value("probes", OrderedJson::array())) {
      const auto r = ParseProbeResult(p.at("result").get<std::string>());
      if (!r) throw Error(ErrorCode::kParseError, "probe result");
      v.probes.push_back({p.at("label").get<std::string>(),
                          p.at("commit").get<std::string>(), *r,
                          p.value("detail", "")});
    }
    if (doc.contains("search")) v.search = FixResultFromJson(doc["search"]);
    return v;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("audit verdict: ") + e.what());
  }
}

std::optional<std::string> DisclosureText(const IssueRecord &issue,
                                          const AuditVerdict &verdict) {
  if (verdict.category != AuditCategory::kPotentialZeroDay) return std::nullopt;
  std::ostringstream out;
  out << "Subject: " << issue.project << ": issue " << issue.local_id
      << " still reproduces at " << verdict.latest_commit << "\n\n"
      << "Issue " << issue.local_id << " was marked fixed at revision "
      << issue.verified.main_revision << ", but its PoC still crashes the "
      << "project at the current default-branch tip.\n\n"
      << "  project:       " << issue.project << "\n"
      << "  crash type:    " << issue.crash.type.name() << "\n"
      << "  fuzz target:   " << issue.crash.fuzzer << "\n"
      << "  sanitizer:     " << issue.crash.sanitizer << "\n"
      << "  tested commit: " << verdict.latest_commit << " ("
      << FormatIso8601(verdict.latest_time) << ")\n"
      << "  PoC digest:    " << issue.poc.digest << "\n\n"
      << "Probes:\n";
  for (const AuditProbe &p : verdict.probes) {
    out << "  " << p.label << " " << p.commit << ": "
        << ProbeResultName(p.result);
    if (!p.detail.empty()) out << " (" << p.detail << ")";
    out << "\n";
  }
  return out.str();
}

std::string RenderAuditSummary(std::span<const AuditVerdict> verdicts) {
  std::map<AuditCategory, size_t> counts;
  size_t flagged = 0;
  for (const AuditVerdict &v : verdicts) {
    ++counts[v.category];
    if (v.category == AuditCategory::kBrokenReport && v.manual_review) ++flagged;
  }
  std::ostringstream out;
  char buf[128];
  for (AuditCategory c : kCategories) {
    std::snprintf(buf, sizeof buf, "%-20s %6zu\n",
                  std::string(AuditCategoryName(c)).c_str(), counts[c]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-20s %6zu\n", "  flagged for review",
                flagged);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-20s %6zu\n", "total", verdicts.size());
  out << buf;
  return out.str();
}

}  // namespace vulnrepro
