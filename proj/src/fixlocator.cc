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

#include "vulnrepro/fixlocator.h"

#include <algorithm>

#include "vulnrepro/buildspec.h"
#include "vulnrepro/error.h"
#include "vulnrepro/reproducer.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

CommitRange EnumerateCandidates(std::span<const CommitInfo> history,
                                const IssueRecord &issue) {
  CommitRange range;
  range.low_anchor = issue.vulnerable.main_revision;
  range.high_anchor = issue.verified.main_revision;
  for (const CommitInfo &c : history) {
    if (c.time <= issue.report_time || c.time > issue.verify_time) continue;
    if (SameRevision(c.id, range.low_anchor)) continue;
    range.candidates.push_back(c);
    if (SameRevision(c.id, range.high_anchor)) break;
  }
  const bool has_high =
      !range.candidates.empty() &&
      SameRevision(range.candidates.back().id, range.high_anchor);
  if (!has_high) {
    if (const CommitInfo *high = FindCommit(history, range.high_anchor)) {
      range.candidates.push_back(*high);
    }
  }
  if (range.candidates.empty()) {
    throw Error(ErrorCode::kNoCandidates,
                "(" + FormatIso8601(issue.report_time) + ", " +
                    FormatIso8601(issue.verify_time) + "]");
  }
  return range;
}

std::vector<DependencyPin> AlignDependencies(
    const CommitInfo &candidate, std::span<const DependencyPin> dependencies,
    const std::map<std::string, std::vector<CommitInfo>> &histories) {
  std::vector<DependencyPin> pins;
  for (DependencyPin dep : dependencies) {
    auto it = histories.find(dep.path);
    if (it != histories.end() && !it->second.empty()) {
      try {
        dep.revision = ResolveCommitByTimestamp(it->second, candidate.time).id;
      } catch (const Error &e) {
        throw Error(e.code(), dep.path + ": " + e.detail());
      }
    }
    pins.push_back(std::move(dep));
  }
  return pins;
}

std::string_view ProbeResultName(ProbeResult r) {
  switch (r) {
    case ProbeResult::kCrash: return "crash";
    case ProbeResult::kClean: return "clean";
    case ProbeResult::kBuildFailed: return "build_failed";
  }
  return "build_failed";
}

std::optional<ProbeResult> ParseProbeResult(std::string_view name) {
  for (ProbeResult r :
       {ProbeResult::kCrash, ProbeResult::kClean, ProbeResult::kBuildFailed}) {
    if (ProbeResultName(r) == name) return r;
  }
  return std::nullopt;
}

FixResult BisectFix(const CommitRange &range, const ProbeFn &probe) {
  FixResult result;
  const auto &c = range.candidates;
  if (c.empty()) {
    result.reason = std::string(kReasonNoCandidates);
    return result;
  }
  BisectionState state;
  state.known_clean = static_cast<long>(c.size()) - 1;

  auto run = [&](size_t i) {
    auto it = state.probed.find(i);
    if (it != state.probed.end()) return it->second;
    const ProbeResult r = probe(c[i]);
    state.probed.emplace(i, r);
    ++state.steps_used;
    ++result.probes;
    if (r == ProbeResult::kBuildFailed) ++result.build_failures;
    result.transcript.push_back({i, c[i].id, r, {}, ""});
    return r;
  };
  auto unresolved = [&](std::string reason) {
    result.status = FixResult::Status::kUnresolved;
    result.reason = std::move(reason);
    return result;
  };

  const size_t high = c.size() - 1;
  switch (run(high)) {
    case ProbeResult::kCrash:
      result.non_monotone = true;
      return unresolved(std::string(kReasonNonMonotone) + ": " + c[high].id +
                        " crashes");
    case ProbeResult::kBuildFailed:
      result.warnings.push_back(c[high].id +
                                " did not build here; relying on its "
                                "verified clean build");
      break;
    case ProbeResult::kClean:
      break;
  }

  long &lo = state.known_crashing;
  long &hi = state.known_clean;
  while (hi - lo > 1) {
    long pick = lo + (hi - lo) / 2;
    ProbeResult r = run(static_cast<size_t>(pick));
    if (r == ProbeResult::kBuildFailed) {
      const long mid = pick;
      std::optional<long> found;
      int steps = 0;
      for (long k = 1; steps < kMaxLinearSteps && !found; ++k) {
        const long up = mid + k, down = mid - k;
        const bool up_ok = up < hi, down_ok = down > lo;
        if (!up_ok && !down_ok) break;
        for (long j : {up, down}) {
          if (j >= hi || j <= lo || steps >= kMaxLinearSteps) continue;
          const bool fresh = !state.probed.contains(static_cast<size_t>(j));
          const ProbeResult rj = run(static_cast<size_t>(j));
          if (fresh) ++steps;
          if (rj != ProbeResult::kBuildFailed) {
            found = j;
            break;
          }
        }
      }
      if (!found) {
        return unresolved(std::string(kReasonUnbuildable) + " around " +
                          c[static_cast<size_t>(mid)].id);
      }
      pick = *found;
      r = state.probed.at(static_cast<size_t>(pick));
    }
    if (r == ProbeResult::kCrash) {
      lo = pick;
    } else {
      hi = pick;
    }
  }
  result.status = FixResult::Status::kLocated;
  result.fix_index = static_cast<size_t>(hi);
  result.fix_commit = c[result.fix_index].id;
  return result;
}

OrderedJson FixResultToJson(const FixResult &r) {
  OrderedJson transcript = OrderedJson::array();
  for (const ProbeRecord &p : r.transcript) {
    OrderedJson e = {{"index", p.index},
                     {"commit", p.commit},
                     {"result", ProbeResultName(p.result)}};
    if (!p.pins.empty()) e["pins"] = PinsToJson(p.pins);
    if (!p.detail.empty()) e["detail"] = p.detail;
    transcript.push_back(std::move(e));
  }
  OrderedJson j = {{"status", r.located() ? "located" : "unresolved"}};
  if (r.located()) {
    j["fix_commit"] = r.fix_commit;
    j["fix_index"] = r.fix_index;
  } else {
    j["reason"] = r.reason;
  }
  j["non_monotone"] = r.non_monotone;
  j["probes"] = r.probes;
  j["build_failures"] = r.build_failures;
  j["warnings"] = r.warnings;
  j["transcript"] = std::move(transcript);
  return j;
}

FixResult FixResultFromJson(const OrderedJson &doc) {
  try {
    FixResult r;
    const std::string status = doc.at("status").get<std::string>();
    if (status == "located") {
      r.status = FixResult::Status::kLocated;
      r.fix_commit = doc.at("fix_commit").get<std::string>();
      r.fix_index = doc.value("fix_index", size_t{0});
    } else if (status == "unresolved") {
      r.reason = doc.value("reason", "");
    } else {
      throw Error(ErrorCode::kParseError, "fix status " + status);
    }
    r.non_monotone = doc.value("non_monotone", false);
    r.probes = doc.value("probes", 0);
    r.build_failures = doc.value("build_failures", 0);
    r.warnings = doc.value("warnings", std::vector<std::string>{});
    for (const auto &e : doc.value("transcript", OrderedJson::array())) {
      ProbeRecord p;
      p.index = e.at("index").get<size_t>();
      p.commit = e.at("commit").get<std::string>();
      const auto res = ParseProbeResult(e.at("result").get<std::string>());
      if (!res) throw Error(ErrorCode::kParseError, "transcript result");
      p.result = *res;
      if (e.contains("pins")) p.pins = PinsFromJson(e["pins"]);
      p.detail = e.value("detail", "");
      r.transcript.push_back(std::move(p));
    }
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("fix result: ") + e.what());
  }
}

RevisionProber::RevisionProber(const IssueRecord &issue, const Corpus &corpus,
                               ExecutionBackend &backend,
                               const RuleStore &store, HistorySource &history,
                               const LocateOptions &options)
    : issue_(issue),
      corpus_(corpus),
      backend_(backend),
      store_(store),
      options_(options),
      map_(corpus.LoadSrcMap(issue, issue.vulnerable)),
      log_(history.Log(map_.main())),
      deps_(map_.Dependencies()) {
  for (const DependencyPin &dep : deps_) {
    try {
      dep_histories_[dep.path] = history.Log(dep);
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kEnvironmentError) throw;
      warnings_.push_back(dep.path + ": no history, keeping " + dep.revision);
    }
  }
}

ProbeResult RevisionProber::Probe(const CommitInfo &candidate) {
  ProbeNote &note = notes_[candidate.id];
  BuildInputs in = MakeBuildInputs(
      issue_, corpus_, map_,
      options_.workspace_prefix + std::to_string(issue_.local_id) + "-probe-" +
          candidate.id.substr(0, 12));
  in.main_pin.revision = candidate.id;
  in.preapplied_rules = options_.preapplied_rules;
  in.pin_dependencies = options_.pin_dependencies;
  try {
    in.dependencies = AlignDependencies(candidate, deps_, dep_histories_);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kNoCommitBefore) throw;
    note.detail = e.what();
    return ProbeResult::kBuildFailed;
  }
  note.pins = in.dependencies;
  note.pins.insert(note.pins.begin(), in.main_pin);
  RecoveredBuild rb;
  try {
    rb = BuildWithRecovery(backend_, in, store_, options_.patterns);
  } catch (const Error &e) {
    if (e.code() == ErrorCode::kEnvironmentError) throw;
    note.detail = e.what();
    return ProbeResult::kBuildFailed;
  }
  if (!rb.outcome.ok()) {
    note.detail = std::string(BuildStatusName(rb.outcome.status));
    return ProbeResult::kBuildFailed;
  }
  const RunOutcome run =
      backend_.RunPoc(rb.outcome.artifact_id, corpus_.LoadPoc(issue_.poc));
  switch (run.status) {
    case RunOutcome::Status::kCrash:
      note.detail = run.observed.name();
      return ProbeResult::kCrash;
    case RunOutcome::Status::kClean:
      note.detail.clear();
      return ProbeResult::kClean;
    case RunOutcome::Status::kTimeout:
      // Neither crash nor clean; unusable like a failed build.
      note.detail = "run timed out";
      return ProbeResult::kBuildFailed;
  }
  return ProbeResult::kBuildFailed;
}

const ProbeNote *RevisionProber::Note(std::string_view commit) const {
  auto it = notes_.find(commit);
  return it == notes_.end() ? nullptr : &it->second;
}

void RevisionProber::Annotate(FixResult &result) const {
  for (ProbeRecord &p : result.transcript) {
    if (const ProbeNote *n = Note(p.commit)) {
      p.pins = n->pins;
      p.detail = n->detail;
    }
  }
}

FixResult LocateFix(const IssueRecord &issue, const Corpus &corpus,
                    ExecutionBackend &backend, const RuleStore &store,
                    HistorySource &history, const LocateOptions &options) {
  RevisionProber prober(issue, corpus, backend, store, history, options);
  CommitRange range;
  try {
    range = EnumerateCandidates(prober.main_log(), issue);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kNoCandidates) throw;
    FixResult unresolved;
    unresolved.reason = std::string(kReasonNoCandidates);
    return unresolved;
  }

  FixResult result = BisectFix(range, prober.AsProbeFn());
  prober.Annotate(result);
  result.warnings.insert(result.warnings.begin(), prober.warnings().begin(),
                         prober.warnings().end());
  if (result.located() &&
      !IsAncestor(prober.main_log(), result.fix_commit, range.high_anchor)) {
    result.warnings.push_back(result.fix_commit + " is not an ancestor of " +
                              range.high_anchor + " (other branch)");
  }
  return result;
}

}  // namespace vulnrepro
