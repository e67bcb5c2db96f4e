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

#include "vulnrepro/dataset.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <system_error>

#include "vulnrepro/buildspec.h"
#include "vulnrepro/diffstat.h"
#include "vulnrepro/error.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void Incomplete(int64_t id, const std::string &what) {
  throw Error(ErrorCode::kBundleIncomplete,
              "issue " + std::to_string(id) + ": " + what);
}

std::string StageFile(BuildVariant v) {
  return std::string(VariantTag(v)) + ".Dockerfile";
}

OrderedJson VariantJson(const StageResult &st, const SrcMap &map,
                        BuildVariant v) {
  return {{"buildspec", StageFile(v)},
          {"srcmap", "srcmap-" + std::string(VariantTag(v)) + ".json"},
          {"main", PinsToJson(std::vector<DependencyPin>{map.main()})[0]},
          {"pins", PinsToJson(st.pins)},
          {"rules", st.rules}};
}

}  // namespace

std::string ImageTag(int64_t local_id, BuildVariant variant) {
  return std::to_string(local_id) + "-" + std::string(VariantTag(variant));
}

DatasetEntry EmitBundle(const IssueRecord &issue,
                        const ReproductionReport &report, const FixResult &fix,
                        const Corpus &corpus, const RuleStore &store,
                        const std::optional<std::string> &fix_diff,
                        const fs::path &out_root, int64_t dup_group) {
  const int64_t id = issue.local_id;
  if (!report.Reproducible()) Incomplete(id, "not reproduced and verified");
  if (report.vuln.buildspec.empty()) Incomplete(id, "no vul build file");
  if (report.fix.buildspec.empty()) Incomplete(id, "no fix build file");
  if (fix.located() && !fix_diff) Incomplete(id, "located fix without diff");

  std::vector<uint8_t> poc;
  SrcMap vul_map, fix_map;
  try {
    poc = corpus.LoadPoc(issue.poc);
    vul_map = corpus.LoadSrcMap(issue, issue.vulnerable);
    fix_map = corpus.LoadSrcMap(issue, issue.verified);
  } catch (const Error &e) {
    Incomplete(id, e.what());
  }
  const fs::path context = corpus.ProjectDir(issue.project);
  if (!fs::is_directory(context)) Incomplete(id, "no project directory");

  DatasetEntry entry;
  entry.local_id = id;
  entry.project = issue.project;
  entry.vuln_srcmap = vul_map;
  if (fix.located()) entry.fix_commit = fix.fix_commit;
  entry.poc = issue.poc;
  entry.tags = {ImageTag(id, BuildVariant::kVulnerable),
                ImageTag(id, BuildVariant::kFixed)};
  entry.dup_group = dup_group == 0 ? id : dup_group;
  entry.bundle_dir = out_root / std::to_string(id);

  // Assemble next to the destination, then swap it in.
  const fs::path tmp = out_root / (".tmp-" + std::to_string(id) + "-" +
                                   std::to_string(::getpid()));
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);
  try {
    WriteFile(tmp / StageFile(BuildVariant::kVulnerable), report.vuln.buildspec);
    WriteFile(tmp / StageFile(BuildVariant::kFixed), report.fix.buildspec);
    fs::copy(context, tmp / "context", fs::copy_options::recursive);
    std::vector<std::string> used = report.vuln.rules;
    for (const std::string &r : report.fix.rules) {
      if (std::find(used.begin(), used.end(), r) == used.end()) used.push_back(r);
    }
    for (const std::string &r : used) {
      if (store.Find(r) == nullptr) Incomplete(id, "rule " + r + " not in store");
    }
    store.Subset(used).Save(tmp / "rules.txt");
    WriteBinaryFile(tmp / "poc", poc);
    WriteFile(tmp / "srcmap-vul.json", SerializeSrcMap(vul_map).dump(2) + "\n");
    WriteFile(tmp / "srcmap-fix.json", SerializeSrcMap(fix_map).dump(2) + "\n");
    if (fix.located()) WriteFile(tmp / "fix.diff", *fix_diff);

    OrderedJson m = {{"local_id", id}, {"project", issue.project}};
    if (fix.located()) {
      m["fix_commit"] = fix.fix_commit;
      m["diff"] = "fix.diff";
    } else {
      m["fix_unresolved"] = fix.reason.empty() ? "unresolved" : fix.reason;
    }
    m["dup_group"] = entry.dup_group;
    m["tags"] = entry.tags;
    m["poc"] = {{"path", "poc"},
                {"digest", issue.poc.digest},
                {"bytes", issue.poc.bytes}};
    m["buildspec"] = {{"vul", StageFile(BuildVariant::kVulnerable)},
                      {"fix", StageFile(BuildVariant::kFixed)}};
    m["rules"] = "rules.txt";
    m["context"] = "context";
    m["run_command"] = issue.crash.run_command;
    m["crash_type"] = issue.crash.type.name();
    m["variants"] = {
        {"vul", VariantJson(report.vuln, vul_map, BuildVariant::kVulnerable)},
        {"fix", VariantJson(report.fix, fix_map, BuildVariant::kFixed)}};
    WriteFile(tmp / "manifest.json", m.dump(2) + "\n");

    fs::remove_all(entry.bundle_dir);
    fs::rename(tmp, entry.bundle_dir);
  } catch (...) {
    fs::remove_all(tmp, ec);
    throw;
  }
  return entry;
}

ReplayResult ReplayBundle(const fs::path &bundle_dir, BuildVariant variant,
                          ExecutionBackend &backend,
                          const std::string &workspace_prefix) {
  OrderedJson m;
  try {
    m = OrderedJson::parse(ReadFile(bundle_dir / "manifest.json"));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("manifest: ") + e.what());
  }
  const std::string tag(VariantTag(variant));
  ReplayResult out;
  try {
    const OrderedJson &v = m.at("variants").at(tag);
    BuildRequest req;
    req.spec = ParseBuildSpec(ReadFile(bundle_dir / v.at("buildspec").get<std::string>()),
                              (bundle_dir / v.at("buildspec").get<std::string>()).string());
    req.main_pin = PinsFromJson(OrderedJson::array({v.at("main")})).at(0);
    req.workspace_id = workspace_prefix + ImageTag(m.at("local_id").get<int64_t>(), variant);
    req.pins = PinsFromJson(v.at("pins"));
    req.applied_rules = v.value("rules", std::vector<std::string>{});
    req.run_command = m.at("run_command").get<std::vector<std::string>>();
    req.context_dir = bundle_dir / m.value("context", "context");
    out.build = backend.Build(req);
    if (!out.build.ok()) return out;

    const std::vector<uint8_t> poc = ReadBinaryFile(bundle_dir / m.at("poc").value("path", "poc"));
    CheckPoc({m["poc"].at("digest").get<std::string>(),
              m["poc"].at("bytes").get<uint64_t>()},
             poc);
    out.run = backend.RunPoc(out.build.artifact_id, poc);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("manifest: ") + e.what());
  }
  return out;
}

PatchRecord MakePatchRecord(int64_t local_id, std::string project,
                            const CommitInfo &fix, std::string_view diff) {
  const DiffStat stat = ParseUnifiedDiff(diff);
  PatchRecord r;
  r.local_id = local_id;
  r.project = std::move(project);
  r.fix_commit = fix.id;
  r.parent_count = std::max<int>(1, static_cast<int>(fix.parents.size()));
  r.files_changed = stat.files_changed();
  r.lines_added = stat.added;
  r.lines_removed = stat.removed;
  r.touched_files = stat.touched_files();
  r.dup_group = local_id;
  return r;
}

OrderedJson PatchRecordToJson(const PatchRecord &r) {
  return {{"local_id", r.local_id},
          {"project", r.project},
          {"fix_commit", r.fix_commit},
          {"parent_count", r.parent_count},
          {"files_changed", r.files_changed},
          {"lines_added", r.lines_added},
          {"lines_removed", r.lines_removed},
          {"touched_files", r.touched_files},
          {"dup_group", r.dup_group},
          {"duplicate", r.duplicate}};
}

PatchRecord PatchRecordFromJson(const OrderedJson &doc) {
  try {
    PatchRecord r;
    r.local_id = doc.at("local_id").get<int64_t>();
    r.project = doc.value("project", "");
    r.fix_commit = doc.at("fix_commit").get<std::string>();
    r.parent_count = doc.value("parent_count", 1);
    r.files_changed = doc.value("files_changed", 0);
    r.lines_added = doc.value("lines_added", 0);
    r.lines_removed = doc.value("lines_removed", 0);
    r.touched_files = doc.value("touched_files", std::vector<std::string>{});
    r.dup_group = doc.value("dup_group", r.local_id);
    r.duplicate = doc.value("duplicate", false);
    if (r.parent_count < 1 || r.lines_added < 0 || r.lines_removed < 0 ||
        r.files_changed < 0) {
      throw Error(ErrorCode::kParseError,
                  "patch record " + std::to_string(r.local_id) + ": negative count");
    }
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParseError, std::string("patch record: ") + e.what());
  }
}

std::vector<PatchRecord> DedupPatches(std::vector<PatchRecord> records) {
  std::map<std::string, int64_t> lowest;
  for (const PatchRecord &r : records) {
    auto [it, inserted] = lowest.emplace(r.fix_commit, r.local_id);
    if (!inserted) it->second = std::min(it->second, r.local_id);
  }
  for (PatchRecord &r : records) {
    r.dup_group = lowest.at(r.fix_commit);
    r.duplicate = r.dup_group != r.local_id;
  }
  return records;
}

std::vector<PatchRecord> FilterForStats(std::span<const PatchRecord> records) {
  std::vector<PatchRecord> out;
  for (const PatchRecord &r : records) {
    if (!r.duplicate && !r.merge()) out.push_back(r);
  }
  return out;
}

namespace {

Summary Summarize(std::vector<double> v) {
  Summary s;
  double sum = 0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double sq = 0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(v.size()));
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  s.median = n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
  return s;
}

OrderedJson SummaryJson(const Summary &s) {
  return {{"mean", s.mean}, {"median", s.median}, {"std", s.stddev}};
}

}  // namespace

PatchStats ComputePatchStats(std::span<const PatchRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyStats, "no patch records");
  std::vector<double> files, added, removed;
  size_t single = 0, small = 0;
  for (const PatchRecord &r : records) {
    files.push_back(r.files_changed);
    added.push_back(r.lines_added);
    removed.push_back(r.lines_removed);
    if (r.files_changed == 1) ++single;
    if (r.lines_added + r.lines_removed < 60) ++small;
  }
  PatchStats st;
  st.count = records.size();
  st.files_changed = Summarize(std::move(files));
  st.lines_added = Summarize(std::move(added));
  st.lines_removed = Summarize(std::move(removed));
  st.single_file_fraction = static_cast<double>(single) / st.count;
  st.under_60_lines_fraction = static_cast<double>(small) / st.count;
  return st;
}

OrderedJson PatchStatsToJson(const PatchStats &s) {
  return {{"count", s.count},
          {"files_changed", SummaryJson(s.files_changed)},
          {"lines_added", SummaryJson(s.lines_added)},
          {"lines_removed", SummaryJson(s.lines_removed)},
          {"single_file_fraction", s.single_file_fraction},
          {"under_60_lines_fraction", s.under_60_lines_fraction}};
}

std::string RenderPatchStats(const PatchStats &s) {
  char buf[512];
  std::ostringstream out;
  std::snprintf(buf, sizeof buf, "%-24s %10s %10s %10s\n", "metric", "mean",
                "median", "std");
  out << buf;
  auto row = [&](const char *name, const Summary &x, bool with_std) {
    if (with_std) {
      std::snprintf(buf, sizeof buf, "%-24s %10.2f %10.2f %10.2f\n", name,
                    x.mean, x.median, x.stddev);
    } else {
      std::snprintf(buf, sizeof buf, "%-24s %10.2f %10.2f %10s\n", name,
                    x.mean, x.median, "-");
    }
    out << buf;
  };
  row("files changed", s.files_changed, true);
  row("lines added", s.lines_added, false);
  row("lines removed", s.lines_removed, false);
  std::snprintf(buf, sizeof buf, "%-24s %10zu\n", "patches", s.count);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-24s %9.1f%%\n", "single file",
                100 * s.single_file_fraction);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-24s %9.1f%%\n", "under 60 lines",
                100 * s.under_60_lines_fraction);
  out << buf;
  return out.str();
}

std::string_view BucketName(ComparisonVerdict::Bucket b) {
  switch (b) {
    case ComparisonVerdict::Bucket::kAgree: return "agree";
    case ComparisonVerdict::Bucket::kDisagree: return "disagree";
    case ComparisonVerdict::Bucket::kTheirsMissing: return "theirs_missing";
    case ComparisonVerdict::Bucket::kMergeParentRelation:
      return "merge_parent_relation";
  }
  return "disagree";
}

std::vector<ComparisonVerdict> CompareWithExternal(
    const std::map<int64_t, std::string> &ours,
    const std::map<int64_t, std::string> &theirs,
    const HistoryLookup &histories) {
  using Bucket = ComparisonVerdict::Bucket;
  std::vector<ComparisonVerdict> out;
  for (const auto &[id, commit] : ours) {
    ComparisonVerdict v;
    v.local_id = id;
    v.ours = commit;
    auto it = theirs.find(id);
    if (it == theirs.end() || it->second.empty()) {
      v.bucket = Bucket::kTheirsMissing;
      out.push_back(std::move(v));
      continue;
    }
    v.theirs = it->second;

    // Abbreviated ids are expanded through the history when possible.
    const std::vector<CommitInfo> *log = histories ? histories(id) : nullptr;
    const CommitInfo *a = log ? FindCommit(*log, commit) : nullptr;
    const CommitInfo *b = log ? FindCommit(*log, it->second) : nullptr;
    const std::string full_a = a ? a->id : commit;
    const std::string full_b = b ? b->id : it->second;
    auto merge_of = [](const CommitInfo *merge, const std::string &parent) {
      if (merge == nullptr || merge->parents.size() < 2) return false;
      return std::find(merge->parents.begin(), merge->parents.end(), parent) !=
             merge->parents.end();
    };
    if (full_a == full_b) {
      v.bucket = Bucket::kAgree;
    } else if (merge_of(b, full_a)) {
      v.bucket = Bucket::kMergeParentRelation;
      v.preferred = full_a;
    } else if (merge_of(a, full_b)) {
      v.bucket = Bucket::kMergeParentRelation;
      v.preferred = full_b;
    } else {
      v.bucket = Bucket::kDisagree;
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace vulnrepro
