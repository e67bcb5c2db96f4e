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

#include "vulnrepro/cli.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "vulnrepro/auditor.h"
#include "vulnrepro/container_backend.h"
#include "vulnrepro/corpus.h"
#include "vulnrepro/dataset.h"
#include "vulnrepro/error.h"
#include "vulnrepro/fixlocator.h"
#include "vulnrepro/local_backend.h"
#include "vulnrepro/reproducer.h"
#include "vulnrepro/sim_backend.h"
#include "vulnrepro/subprocess.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 8> kKeys = {
    "corpus", "workspace", "backend", "jobs",
    "timeout", "rules", "out", "external"};

std::string EnvName(std::string_view key) {
  std::string name(kEnvPrefix);
  for (char c : key) name += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return name;
}

int ParsePositive(const std::string &key, const std::string &text) {
  int v = 0;
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size() || v < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                key + " must be a positive integer, got '" + text + "'");
  }
  return v;
}

// Config file values as strings, keyed as in kKeys.
std::map<std::string, std::string> LoadConfigFile(const fs::path &path) {
  OrderedJson doc;
  try {
    doc = OrderedJson::parse(ReadFile(path));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kInvalidArgument,
                "config " + path.string() + ": " + e.what());
  } catch (const Error &e) {
    throw Error(ErrorCode::kInvalidArgument, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kInvalidArgument,
                "config " + path.string() + ": not an object");
  }
  std::map<std::string, std::string> values;
  for (const auto &[key, value] : doc.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw Error(ErrorCode::kInvalidArgument, "config: unknown key " + key);
    }
    values[key] = value.is_string() ? value.get<std::string>() : value.dump();
  }
  return values;
}

}  // namespace

std::span<const std::string_view> ConfigKeys() { return kKeys; }

RunConfig ResolveRunConfig(const std::map<std::string, std::string> &flags,
                           const Environment &env) {
  for (const auto &[key, _] : flags) {
    if (key != "config" &&
        std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unknown setting " + key);
    }
  }
  std::map<std::string, std::string> file;
  std::optional<std::string> config_path;
  if (auto it = flags.find("config"); it != flags.end()) {
    config_path = it->second;
  } else if (auto e = env.find(EnvName("config")); e != env.end()) {
    config_path = e->second;
  }
  if (config_path) file = LoadConfigFile(*config_path);

  auto get = [&](std::string_view key) -> std::optional<std::string> {
    const std::string k(key);
    if (auto it = flags.find(k); it != flags.end()) return it->second;
    if (auto it = env.find(EnvName(k)); it != env.end()) return it->second;
    if (auto it = file.find(k); it != file.end()) return it->second;
    return std::nullopt;
  };

  RunConfig cfg;
  const auto corpus = get("corpus");
  if (!corpus || corpus->empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no corpus given (--corpus)");
  }
  cfg.corpus = *corpus;
  if (auto v = get("out")) cfg.out = *v;
  cfg.workspace = get("workspace").value_or((cfg.out / "workspace").string());
  cfg.rules = get("rules").value_or((cfg.corpus / "rules.txt").string());
  if (auto v = get("backend")) cfg.backend = *v;
  if (cfg.backend != "sim" && cfg.backend != "local" &&
      cfg.backend != "container") {
    throw Error(ErrorCode::kInvalidArgument, "unknown backend " + cfg.backend);
  }
  if (auto v = get("jobs")) cfg.jobs = ParsePositive("jobs", *v);
  if (auto v = get("timeout")) cfg.timeout_seconds = ParsePositive("timeout", *v);
  if (auto v = get("external")) cfg.external = *v;
  return cfg;
}

std::optional<OutputLock> OutputLock::TryAcquire(const fs::path &root) {
  fs::create_directories(root);
  const fs::path path = root / ".lock";
  const int fd = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    return std::nullopt;
  }
  return OutputLock(fd);
}

OutputLock::OutputLock(OutputLock &&other) noexcept : fd_(other.fd_) {
  other.fd_ = -1;
}

OutputLock &OutputLock::operator=(OutputLock &&other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

OutputLock::~OutputLock() {
  if (fd_ >= 0) ::close(fd_);  // releases the flock
}

namespace {

struct JobOutcome {
  int64_t local_id = 0;
  bool ok = false;
  bool skipped = false;
  std::string message;
};

// A job's result: the document to store, whether it counts as success, and a
// one-line description.
struct JobResult {
  OrderedJson doc;
  bool ok = false;
  std::string message;
};

class Session {
 public:
  Session(RunConfig cfg, bool force, bool porcelain, std::ostream &out,
          std::ostream &err)
      : cfg_(std::move(cfg)),
        force_(force),
        porcelain_(porcelain),
        out_(out),
        err_(err),
        corpus_(Corpus::Open(cfg_.corpus)) {}

  const RunConfig &cfg() const { return cfg_; }
  const Corpus &corpus() const { return corpus_; }
  std::ostream &out() { return out_; }
  bool porcelain() const { return porcelain_; }

  const RuleStore &store() {
    if (!store_) {
      store_ = fs::exists(cfg_.rules) ? RuleStore::Load(cfg_.rules) : RuleStore();
    }
    return *store_;
  }

  HistorySource &history() {
    if (!history_) {
      if (fs::exists(corpus_.HistoriesPath())) {
        history_ = std::make_unique<StaticHistory>(
            StaticHistory::Load(corpus_.HistoriesPath()));
      } else {
        history_ = std::make_unique<GitHistory>(cfg_.workspace / "git-cache");
      }
    }
    return *history_;
  }

  ExecutionBackend &backend() {
    if (!backend_) {
      const std::chrono::seconds timeout(cfg_.timeout_seconds);
      if (cfg_.backend == "sim") {
        backend_ = std::make_unique<SimBackend>(
            SimBackend::Load(corpus_.SimManifestPath()));
      } else if (cfg_.backend == "local") {
        LocalBackendConfig c;
        c.workspace_root = cfg_.workspace;
        c.run_timeout = timeout;
        backend_ = std::make_unique<LocalBackend>(c);
      } else {
        ContainerBackendConfig c;
        c.workspace_root = cfg_.workspace;
        c.run_timeout = timeout;
        backend_ = std::make_unique<ContainerBackend>(c);
      }
    }
    return *backend_;
  }

  fs::path ResultPath(std::string_view sub, int64_t id) const {
    return cfg_.out / std::string(sub) / (std::to_string(id) + ".json");
  }

  std::optional<OrderedJson> LoadResult(std::string_view sub, int64_t id) const {
    const fs::path p = ResultPath(sub, id);
    if (!fs::exists(p)) return std::nullopt;
    try {
      return OrderedJson::parse(ReadFile(p));
    } catch (const nlohmann::json::exception &e) {
      throw Error(ErrorCode::kParseError, p.string() + ": " + e.what());
    }
  }

  // Runs `job` over `ids` on the worker pool. Issues with a stored result
  // are skipped unless --force; `stored_ok` judges a stored result.
  // Returns false when an environment error stopped the run.
  bool RunJobs(std::string_view sub, std::span<const int64_t> ids,
               const std::function<JobResult(int64_t)> &job,
               const std::function<bool(const OrderedJson &)> &stored_ok,
               std::vector<JobOutcome> &outcomes) {
    outcomes.assign(ids.size(), {});
    std::atomic<size_t> next{0};
    std::atomic<bool> abort{false};
    std::mutex mu;
    std::string env_error;
    auto work = [&] {
      for (size_t i = next++; i < ids.size() && !abort; i = next++) {
        JobOutcome &o = outcomes[i];
        o.local_id = ids[i];
        try {
          if (!force_) {
            if (auto stored = LoadResult(sub, ids[i])) {
              o.skipped = true;
              o.ok = stored_ok(*stored);
              o.message = "already done";
              continue;
            }
          }
          JobResult r = job(ids[i]);
          WriteFile(ResultPath(sub, ids[i]), r.doc.dump(2) + "\n");
          o.ok = r.ok;
          o.message = std::move(r.message);
        } catch (const Error &e) {
          if (e.code() == ErrorCode::kEnvironmentError) {
            std::lock_guard<std::mutex> lock(mu);
            env_error = e.what();
            abort = true;
          }
          o.ok = false;
          o.message = e.what();
        } catch (const std::exception &e) {
          o.ok = false;
          o.message = e.what();
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      const size_t n = std::min<size_t>(static_cast<size_t>(cfg_.jobs),
                                        std::max<size_t>(ids.size(), 1));
      for (size_t k = 0; k < n; ++k) pool.emplace_back(work);
    }
    if (abort) {
      err_ << "error: " << env_error << "\n";
      return false;
    }
    return true;
  }

  int Report(std::string_view sub, std::span<const JobOutcome> outcomes,
             OrderedJson extra = OrderedJson::object()) {
    size_t ok = 0, failed = 0, skipped = 0;
    OrderedJson results = OrderedJson::array();
    for (const JobOutcome &o : outcomes) {
      if (o.skipped) ++skipped;
      (o.ok ? ok : failed)++;
      results.push_back({{"local_id", o.local_id},
                         {"ok", o.ok},
                         {"skipped", o.skipped},
                         {"message", o.message}});
      if (!porcelain_) {
        out_ << o.local_id << " " << sub << ": " << (o.ok ? "ok" : "FAILED")
             << (o.skipped ? " (skipped)" : "") << " " << o.message << "\n";
      }
    }
    const int code = failed > 0 ? kExitPartial : kExitOk;
    if (porcelain_) {
      OrderedJson j = {{"command", sub},
                       {"exit_code", code},
                       {"ok", ok},
                       {"failed", failed},
                       {"skipped", skipped},
                       {"results", std::move(results)}};
      for (auto &[k, v] : extra.items()) j[k] = v;
      out_ << j.dump() << "\n";
    } else {
      out_ << sub << ": " << ok << " ok, " << failed << " failed, " << skipped
           << " skipped\n";
      if (failed > 0) {
        out_ << "failed:";
        for (const JobOutcome &o : outcomes) {
          if (!o.ok) out_ << " " << o.local_id;
        }
        out_ << "\n";
      }
    }
    return code;
  }

  // Located fixes recorded by locate-fix, by local_id.
  std::map<int64_t, std::string> LocatedFixes() const {
    std::map<int64_t, std::string> fixes;
    const fs::path dir = cfg_.out / "locate-fix";
    if (!fs::is_directory(dir)) return fixes;
    for (const auto &e : fs::directory_iterator(dir)) {
      if (e.path().extension() != ".json") continue;
      int64_t id = 0;
      const std::string stem = e.path().stem().string();
      const auto [p, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), id);
      if (ec != std::errc() || p != stem.data() + stem.size()) continue;
      const FixResult r = FixResultFromJson(OrderedJson::parse(ReadFile(e.path())));
      if (r.located()) fixes[id] = r.fix_commit;
    }
    return fixes;
  }

 private:
  RunConfig cfg_;
  bool force_;
  bool porcelain_;
  std::ostream &out_;
  std::ostream &err_;
  Corpus corpus_;
  std::optional<RuleStore> store_;
  std::unique_ptr<HistorySource> history_;
  std::unique_ptr<ExecutionBackend> backend_;
};

bool StoredStageOk(const OrderedJson &doc) {
  return ReportFromJson(doc).Reproducible();
}

int CmdIngest(Session &s, std::span<const int64_t> ids) {
  std::vector<JobOutcome> outcomes;
  auto job = [&](int64_t id) {
    const IssueRecord issue = s.corpus().LoadIssue(id, &s.history());
    JobResult r;
    r.ok = true;
    r.doc = {{"local_id", id}, {"candidate", IsCandidate(issue)},
             {"issue", SerializeIssue(issue)}};
    r.message = IsCandidate(issue) ? "candidate" : "not a candidate";
    return r;
  };
  auto stored = [](const OrderedJson &) { return true; };
  if (!s.RunJobs("ingest", ids, job, stored, outcomes)) return kExitConfig;
  size_t candidates = 0;
  for (const JobOutcome &o : outcomes) {
    if (o.ok && o.message == "candidate") ++candidates;
  }
  return s.Report("ingest", outcomes, {{"candidates", candidates}});
}

int CmdReproduce(Session &s, std::span<const int64_t> ids) {
  std::vector<JobOutcome> outcomes;
  auto job = [&](int64_t id) {
    const IssueRecord issue = s.corpus().LoadIssue(id, &s.history());
    ReproducerOptions opts;
    opts.history = &s.history();
    const ReproductionReport rep =
        ReproduceIssue(issue, s.corpus(), s.backend(), s.store(), opts);
    JobResult r;
    r.doc = ReportToJson(rep);
    r.ok = rep.Reproducible();
    if (r.ok) {
      r.message = "reproduced and verified";
    } else {
      const StageResult &st = rep.Reproduced() ? rep.fix : rep.vuln;
      r.message = std::string(FailureKindName(st.failure.kind));
    }
    return r;
  };
  if (!s.RunJobs("reproduce", ids, job, StoredStageOk, outcomes)) {
    return kExitConfig;
  }
  return s.Report("reproduce", outcomes);
}

int CmdLocateFix(Session &s, std::span<const int64_t> ids) {
  std::vector<JobOutcome> outcomes;
  auto job = [&](int64_t id) {
    const IssueRecord issue = s.corpus().LoadIssue(id, &s.history());
    LocateOptions opts;
    if (auto rep = s.LoadResult("reproduce", id)) {
      opts.preapplied_rules = ReportFromJson(*rep).applied_rules;
    }
    const FixResult fix =
        LocateFix(issue, s.corpus(), s.backend(), s.store(), s.history(), opts);
    JobResult r;
    r.doc = FixResultToJson(fix);
    r.ok = fix.located();
    r.message = fix.located() ? "located " + fix.fix_commit
                              : "unresolved: " + fix.reason;
    return r;
  };
  auto stored = [](const OrderedJson &doc) {
    return FixResultFromJson(doc).located();
  };
  if (!s.RunJobs("locate-fix", ids, job, stored, outcomes)) return kExitConfig;
  return s.Report("locate-fix", outcomes);
}

int CmdAudit(Session &s, std::span<const int64_t> ids) {
  std::vector<JobOutcome> outcomes;
  std::mutex mu;
  std::vector<AuditVerdict> verdicts;
  auto job = [&](int64_t id) {
    const IssueRecord issue = s.corpus().LoadIssue(id, &s.history());
    const SrcMap map = s.corpus().LoadSrcMap(issue, issue.vulnerable);
    const CommitInfo latest = s.history().Tip(map.main());
    AuditOptions opts;
    if (auto rep = s.LoadResult("reproduce", id)) {
      opts.locate.preapplied_rules = ReportFromJson(*rep).applied_rules;
    }
    const AuditVerdict v = AuditIssue(issue, latest, s.corpus(), s.backend(),
                                      s.store(), s.history(), opts);
    if (auto text = DisclosureText(issue, v)) {
      WriteFile(s.cfg().out / "audit" / (std::to_string(id) + ".disclosure.txt"),
                *text);
    }
    {
      std::lock_guard<std::mutex> lock(mu);
      verdicts.push_back(v);
    }
    JobResult r;
    r.doc = AuditVerdictToJson(v);
    r.ok = true;
    r.message = std::string(AuditCategoryName(v.category));
    if (v.category == AuditCategory::kBrokenReport) {
      r.message += " " + v.located_commit;
      if (v.manual_review) r.message += " (manual review)";
    }
    return r;
  };
  auto stored = [&](const OrderedJson &doc) {
    std::lock_guard<std::mutex> lock(mu);
    verdicts.push_back(AuditVerdictFromJson(doc));
    return true;
  };
  if (!s.RunJobs("audit", ids, job, stored, outcomes)) return kExitConfig;
  std::sort(verdicts.begin(), verdicts.end(),
            [](const AuditVerdict &a, const AuditVerdict &b) {
              return a.local_id < b.local_id;
            });
  if (!s.porcelain()) s.out() << RenderAuditSummary(verdicts);
  OrderedJson counts = OrderedJson::object();
  for (const AuditVerdict &v : verdicts) {
    const std::string name(AuditCategoryName(v.category));
    counts[name] = counts.value(name, 0) + 1;
  }
  return s.Report("audit", outcomes, {{"categories", counts}});
}

int CmdEmit(Session &s, std::span<const int64_t> ids) {
  std::vector<JobOutcome> outcomes;
  // Duplicate groups over every located fix, not only the selected ids.
  std::map<std::string, int64_t> group_of;
  for (const auto &[id, commit] : s.LocatedFixes()) {
    auto [it, inserted] = group_of.emplace(commit, id);
    if (!inserted) it->second = std::min(it->second, id);
  }
  auto job = [&](int64_t id) {
    const IssueRecord issue = s.corpus().LoadIssue(id, &s.history());
    const auto rep_doc = s.LoadResult("reproduce", id);
    if (!rep_doc) {
      throw Error(ErrorCode::kBundleIncomplete,
                  "issue " + std::to_string(id) + ": no reproduce result");
    }
    const ReproductionReport rep = ReportFromJson(*rep_doc);
    FixResult fix;
    fix.reason = "not located";
    if (auto f = s.LoadResult("locate-fix", id)) fix = FixResultFromJson(*f);
    std::optional<std::string> diff;
    int64_t group = id;
    if (fix.located()) {
      const SrcMap map = s.corpus().LoadSrcMap(issue, issue.vulnerable);
      diff = s.history().Diff(map.main(), fix.fix_commit);
      group = group_of.at(fix.fix_commit);
    }
    const DatasetEntry e = EmitBundle(issue, rep, fix, s.corpus(), s.store(),
                                      diff, s.cfg().out / "bundles", group);
    JobResult r;
    r.ok = true;
    r.doc = {{"local_id", id},
             {"bundle", e.bundle_dir.string()},
             {"tags", e.tags},
             {"dup_group", e.dup_group}};
    if (e.fix_commit) r.doc["fix_commit"] = *e.fix_commit;
    r.message = e.bundle_dir.string();
    return r;
  };
  auto stored = [](const OrderedJson &) { return true; };
  if (!s.RunJobs("emit", ids, job, stored, outcomes)) return kExitConfig;
  return s.Report("emit", outcomes);
}

int CmdStats(Session &s) {
  std::vector<PatchRecord> records;
  std::vector<JobOutcome> outcomes;
  for (const auto &[id, commit] : s.LocatedFixes()) {
    JobOutcome o;
    o.local_id = id;
    try {
      const IssueRecord issue = s.corpus().LoadIssue(id, &s.history());
      const SrcMap map = s.corpus().LoadSrcMap(issue, issue.vulnerable);
      const std::vector<CommitInfo> log = s.history().Log(map.main());
      const CommitInfo *c = FindCommit(log, commit);
      if (c == nullptr) throw Error(ErrorCode::kNotFound, "commit " + commit);
      records.push_back(MakePatchRecord(id, issue.project, *c,
                                        s.history().Diff(map.main(), c->id)));
      o.ok = true;
      o.message = "+" + std::to_string(records.back().lines_added) + "/-" +
                  std::to_string(records.back().lines_removed);
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kEnvironmentError) throw;
      o.message = e.what();
    }
    outcomes.push_back(std::move(o));
  }
  records = DedupPatches(std::move(records));
  const std::vector<PatchRecord> filtered = FilterForStats(records);
  OrderedJson rec_json = OrderedJson::array();
  for (const PatchRecord &r : records) rec_json.push_back(PatchRecordToJson(r));
  WriteFile(s.cfg().out / "stats" / "records.json", rec_json.dump(2) + "\n");

  OrderedJson extra = {{"records", records.size()},
                       {"filtered", filtered.size()}};
  int code = kExitOk;
  try {
    const PatchStats st = ComputePatchStats(filtered);
    const OrderedJson stats = PatchStatsToJson(st);
    WriteFile(s.cfg().out / "stats" / "stats.json", stats.dump(2) + "\n");
    extra["stats"] = stats;
    if (!s.porcelain()) s.out() << RenderPatchStats(st);
  } catch (const Error &e) {
    if (e.code() != ErrorCode::kEmptyStats) throw;
    extra["stats"] = nullptr;
    if (!s.porcelain()) s.out() << "no patches: " << e.what() << "\n";
    code = kExitPartial;
  }
  return std::max(code, s.Report("stats", outcomes, std::move(extra)));
}

int CmdCompare(Session &s) {
  if (s.cfg().external.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "compare needs --external");
  }
  OrderedJson doc;
  try {
    doc = OrderedJson::parse(ReadFile(s.cfg().external));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kInvalidArgument,
                "external " + s.cfg().external.string() + ": " + e.what());
  }
  std::map<int64_t, std::string> theirs;
  for (const auto &[k, v] : doc.items()) {
    int64_t id = 0;
    const auto [p, ec] = std::from_chars(k.data(), k.data() + k.size(), id);
    if (ec != std::errc() || p != k.data() + k.size() || !v.is_string()) {
      throw Error(ErrorCode::kInvalidArgument, "external: bad entry " + k);
    }
    theirs[id] = v.get<std::string>();
  }
  const std::map<int64_t, std::string> ours = s.LocatedFixes();
  std::map<int64_t, std::vector<CommitInfo>> logs;
  for (const auto &[id, _] : ours) {
    try {
      const IssueRecord issue = s.corpus().LoadIssue(id, &s.history());
      logs[id] = s.history().Log(
          s.corpus().LoadSrcMap(issue, issue.vulnerable).main());
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kEnvironmentError) throw;
    }
  }
  const auto verdicts = CompareWithExternal(
      ours, theirs, [&](int64_t id) -> const std::vector<CommitInfo> * {
        auto it = logs.find(id);
        return it == logs.end() ? nullptr : &it->second;
      });
  OrderedJson arr = OrderedJson::array();
  OrderedJson counts = OrderedJson::object();
  std::vector<JobOutcome> outcomes;
  for (const ComparisonVerdict &v : verdicts) {
    OrderedJson j = {{"local_id", v.local_id},
                     {"ours", v.ours},
                     {"bucket", BucketName(v.bucket)}};
    if (v.theirs) j["theirs"] = *v.theirs;
    if (!v.preferred.empty()) j["preferred"] = v.preferred;
    arr.push_back(std::move(j));
    const std::string name(BucketName(v.bucket));
    counts[name] = counts.value(name, 0) + 1;
    outcomes.push_back({v.local_id, true, false, name});
  }
  WriteFile(s.cfg().out / "compare" / "verdicts.json", arr.dump(2) + "\n");
  return s.Report("compare", outcomes, {{"buckets", counts}});
}

}  // namespace

int RunCommand(std::span<const std::string> args, std::ostream &out,
               std::ostream &err, const Environment &env) {
  CLI::App app{"Reproduce, fix-locate and audit fuzzer-found vulnerabilities",
               "vulnrepro"};
  app.fallthrough();
  app.require_subcommand(1);
  std::map<std::string, std::string> settings;
  std::string config;
  std::vector<int64_t> ids;
  bool all = false, force = false, porcelain = false;
  std::map<std::string, std::string> flag_values;
  const std::map<std::string_view, std::string> help = {
      {"corpus", "Corpus root"},
      {"workspace", "Build workspace (default <out>/workspace)"},
      {"backend", "sim, local or container"},
      {"jobs", "Parallel issues"},
      {"timeout", "PoC run timeout in seconds"},
      {"rules", "Resource rule file (default <corpus>/rules.txt)"},
      {"out", "Output directory"},
      {"external", "External fix list for compare"}};
  for (std::string_view key : kKeys) {
    app.add_option("--" + std::string(key), flag_values[std::string(key)],
                   help.at(key));
  }
  app.add_option("--config", config, "JSON config file");
  app.add_option("--id", ids, "Issue ids")->delimiter(',');
  app.add_flag("--all", all, "Every issue in the corpus");
  app.add_flag("--force", force, "Redo issues that already have results");
  app.add_flag("--porcelain", porcelain, "Machine-readable summary");
  const std::array<std::pair<const char *, const char *>, 7> subs = {{
      {"ingest", "Parse issues and select reproduction candidates"},
      {"reproduce", "Build and run the vulnerable and fixed revisions"},
      {"locate-fix", "Bisect for the commit that stops the crash"},
      {"audit", "Check fixed issues whose PoC still crashes"},
      {"stats", "Patch statistics over located fixes"},
      {"emit", "Write self-contained reproduction bundles"},
      {"compare", "Compare located fixes with an external source"},
  }};
  for (const auto &[name, help] : subs) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitConfig;
  }
  for (std::string_view key : kKeys) {
    if (app.count("--" + std::string(key)) > 0) {
      settings[std::string(key)] = flag_values[std::string(key)];
    }
  }
  if (app.count("--config") > 0) settings["config"] = config;
  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    const RunConfig cfg = ResolveRunConfig(settings, env);
    std::optional<OutputLock> lock = OutputLock::TryAcquire(cfg.out);
    if (!lock) {
      err << "error: " << cfg.out.string() << " is locked by another run\n";
      return kExitConfig;
    }
    Session s(cfg, force, porcelain, out, err);

    std::vector<int64_t> selected = ids;
    const bool per_issue = sub != "stats" && sub != "compare";
    if (per_issue && selected.empty()) {
      if (!all && sub != "ingest") {
        err << "error: " << sub << " needs --id or --all\n";
        return kExitConfig;
      }
      selected = s.corpus().IssueIds();
      if (sub == "audit") {
        // Without explicit ids, audit the issues whose fix still crashed.
        std::erase_if(selected, [&](int64_t id) {
          const auto rep = s.LoadResult("reproduce", id);
          if (!rep) return true;
          const ReproductionReport r = ReportFromJson(*rep);
          return !(r.fix.status == StageResult::Status::kFailed &&
                   r.fix.failure.kind == FailureKind::kFixedStillCrashes);
        });
      }
    }
    std::sort(selected.begin(), selected.end());
    selected.erase(std::unique(selected.begin(), selected.end()), selected.end());

    if (sub == "ingest") return CmdIngest(s, selected);
    if (sub == "reproduce") return CmdReproduce(s, selected);
    if (sub == "locate-fix") return CmdLocateFix(s, selected);
    if (sub == "audit") return CmdAudit(s, selected);
    if (sub == "emit") return CmdEmit(s, selected);
    if (sub == "stats") return CmdStats(s);
    return CmdCompare(s);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int RunCommand(std::span<const std::string> args, std::ostream &out,
               std::ostream &err) {
  return RunCommand(args, out, err, CurrentEnvironment());
}

}  // namespace vulnrepro
