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

#include "testing/fixtures.h"

#include <chrono>
#include <cstdio>

#include "vulnrepro/util.h"

namespace vulnrepro::testing {

namespace fs = std::filesystem;
using std::chrono::hours;

OrderedJson IssueDoc::ToJson() const {
  OrderedJson crash = {{"type", crash_type},
                       {"sanitizer", "address"},
                       {"fuzzer", "fuzzer"},
                       {"command", {"$OUT/fuzzer", "{testcase}"}}};
  if (report) crash["report"] = *report;
  OrderedJson l = OrderedJson::array();
  for (const std::string &s : labels) l.push_back(s);
  return {{"local_id", local_id},
          {"project", project},
          {"labels", l},
          {"crash", crash},
          {"vulnerable", {{"srcmap", vul_srcmap}, {"rev", vul_rev}}},
          {"verified", {{"srcmap", fix_srcmap}, {"rev", fix_rev}}},
          {"report_time", FormatIso8601(report_time)},
          {"verify_time", FormatIso8601(verify_time)},
          {"poc", {{"digest", poc.digest}, {"bytes", poc.bytes}}}};
}

CorpusBuilder::CorpusBuilder(fs::path root) : root_(std::move(root)) {
  for (const char *sub : {"issues", "srcmaps", "pocs", "projects"}) {
    fs::create_directories(root_ / sub);
  }
}

PocRef CorpusBuilder::AddPoc(const std::vector<uint8_t> &blob) {
  const PocRef ref = MakePocRef(blob);
  WriteBinaryFile(root_ / "pocs" / ref.digest.substr(7), blob);
  return ref;
}

void CorpusBuilder::AddProject(const std::string &name,
                               const std::map<std::string, std::string> &files) {
  for (const auto &[rel, contents] : files) {
    WriteFile(root_ / "projects" / name / rel, contents);
  }
}

std::string CorpusBuilder::AddSrcMap(const std::string &name,
                                     const std::vector<DependencyPin> &entries) {
  OrderedJson doc = OrderedJson::object();
  for (const DependencyPin &p : entries) {
    doc[p.path] = {{"type", VcsKindName(p.vcs)}, {"url", p.url},
                   {"rev", p.revision}};
  }
  const std::string rel = "srcmaps/" + name + ".json";
  WriteFile(root_ / rel, doc.dump(2) + "\n");
  return rel;
}

void CorpusBuilder::AddIssue(const IssueDoc &doc) {
  AddIssueText(doc.local_id, doc.ToJson().dump(2) + "\n");
}

void CorpusBuilder::AddIssueText(int64_t local_id, const std::string &text) {
  WriteFile(root_ / "issues" / (std::to_string(local_id) + ".json"), text);
}

std::string FixLine() { return "  if (n > 8) n = 8;\n"; }

std::string ParseSource(bool fixed) {
  return std::string(
             "#include <stddef.h>\n"
             "#include <stdlib.h>\n"
             "#include <string.h>\n"
             "\n"
             "int parse_record(const unsigned char *data, size_t size) {\n"
             "  if (size < 1) return 0;\n"
             "  size_t n = data[0];\n"
             "  if (n > size - 1) n = size - 1;\n"
             "  unsigned char *buf = calloc(8, 1);\n") +
         (fixed ? FixLine() : "") +
         "  memcpy(buf, data + 1, n);\n"
         "  int r = buf[0];\n"
         "  free(buf);\n"
         "  return r;\n"
         "}\n";
}

std::string FuzzerSource() {
  return "#include <stddef.h>\n"
         "#include <stdio.h>\n"
         "\n"
         "int parse_record(const unsigned char *data, size_t size);\n"
         "\n"
         "int main(int argc, char **argv) {\n"
         "  if (argc < 2) return 2;\n"
         "  FILE *f = fopen(argv[1], \"rb\");\n"
         "  if (!f) return 2;\n"
         "  unsigned char buf[4096];\n"
         "  size_t n = fread(buf, 1, sizeof buf, f);\n"
         "  fclose(f);\n"
         "  parse_record(buf, n);\n"
         "  return 0;\n"
         "}\n";
}

std::vector<uint8_t> CrashingPoc() {
  std::vector<uint8_t> poc(32, 'A');
  poc[0] = 31;
  return poc;
}

std::vector<uint8_t> BenignInput() { return {3, 'a', 'b', 'c'}; }

std::map<std::string, std::string> ProjectFiles(
    const std::string &name, const std::string &url,
    const std::vector<std::pair<std::string, std::string>> &deps) {
  std::string docker =
      "FROM gcr.io/oss-fuzz-base/base-builder\n"
      "RUN git clone " + url + " " + name + "\n";
  std::string flags;
  std::string sources = "$SRC/" + name + "/*.c";
  for (const auto &[dep, dep_url] : deps) {
    docker += "RUN git clone " + dep_url + " " + dep + "\n";
    flags += " -I$SRC/" + dep;
    sources += " $SRC/" + dep + "/*.c";
  }
  docker += "WORKDIR $SRC/" + name + "\nCOPY build.sh $SRC/\n";
  const std::string build =
      "#!/bin/bash\nset -e\n$CC -fsanitize=address -g -O0" + flags + " " +
      sources + " -o $OUT/fuzzer\n";
  return {{"Dockerfile", docker}, {"build.sh", build}};
}

namespace {

std::unique_ptr<LocalScenario> NewScenario() {
  auto s = std::make_unique<LocalScenario>();
  s->dir = std::make_unique<TempDir>();
  s->corpus = s->dir->path() / "corpus";
  s->workspace = s->dir->path() / "ws";
  s->git_cache = s->dir->path() / "git-cache";
  return s;
}

DependencyPin Pin(const std::string &name, const std::string &url,
                  const std::string &rev) {
  return DependencyPin{"/src/" + name, VcsKind::kGit, url, rev};
}

std::string CrashReport() {
  return "==1==ERROR: AddressSanitizer: heap-buffer-overflow on address "
         "0x602000000018\n"
         "WRITE of size 31 at 0x602000000018 thread T0\n"
         "    #0 0x4c2f in __asan_memcpy\n"
         "    #1 0x4d10 in parse_record parse.c:10:3\n"
         "    #2 0x4d88 in main fuzzer.c:13:3\n";
}

// Main repository with the parser at its vulnerable state.
std::string InitialCommit(GitRepo &repo, Timestamp when) {
  return repo.Commit({{"fuzzer.c", FuzzerSource()},
                      {"parse.c", ParseSource(false)},
                      {"NEWS", "0\n"}},
                     "initial import", when);
}

std::string Filler(GitRepo &repo, int n, Timestamp when) {
  return repo.Commit({{"NEWS", std::to_string(n) + "\n"}},
                     "update NEWS " + std::to_string(n), when);
}

// Issue whose history runs v0 (crash), README-only verified commit,
// monthly fillers, optionally the real fix, and a few more fillers.
LocalScenario MakeLongTail(bool with_fix) {
  auto s = NewScenario();
  const std::string name = "libheif";
  GitRepo repo(s->dir->path() / "repos" / name);
  s->main_url = repo.url();
  s->local_id = with_fix ? 25267 : 31999;
  s->ids = {s->local_id};

  s->vul_commit = InitialCommit(repo, T("2021-01-01T00:00:00Z"));
  const Timestamp verify_time = T("2021-01-05T00:00:00Z");
  s->verified_commit = repo.Commit({{"README", "Build with ./configure\n"}},
                                   "fix README", verify_time);
  int n = 1;
  for (int m = 2; m <= 18; ++m, ++n) {
    const int year = m <= 12 ? 2021 : 2022;
    const int month = m <= 12 ? m : m - 12;
    char iso[32];
    std::snprintf(iso, sizeof iso, "%04d-%02d-01T00:00:00Z", year, month);
    Filler(repo, n, T(iso));
  }
  if (with_fix) {
    s->fix_commit = repo.Commit({{"parse.c", ParseSource(true)}},
                                "fix wrong memcpy size",
                                T("2022-07-15T00:00:00Z"));
  }
  for (const char *iso : {"2022-08-01T00:00:00Z", "2022-09-01T00:00:00Z",
                          "2022-10-01T00:00:00Z"}) {
    s->latest_commit = Filler(repo, n++, T(iso));
  }

  CorpusBuilder cb(s->corpus);
  cb.AddProject(name, ProjectFiles(name, s->main_url, {}));
  IssueDoc doc;
  doc.local_id = s->local_id;
  doc.project = name;
  doc.report = CrashReport();
  doc.vul_srcmap = cb.AddSrcMap(std::to_string(s->local_id) + "-vul",
                                {Pin(name, s->main_url, s->vul_commit)});
  doc.vul_rev = s->vul_commit;
  doc.fix_srcmap = cb.AddSrcMap(std::to_string(s->local_id) + "-fix",
                                {Pin(name, s->main_url, s->verified_commit)});
  doc.fix_rev = s->verified_commit;
  doc.report_time = T("2021-01-02T00:00:00Z");
  doc.verify_time = verify_time;
  doc.poc = cb.AddPoc(CrashingPoc());
  cb.AddIssue(doc);
  return std::move(*s);
}

}  // namespace

LocalScenario MakeFixWindowScenario() {
  auto s = NewScenario();
  const std::string name = "imagemagick";
  GitRepo repo(s->dir->path() / "repos" / name);
  GitRepo libz(s->dir->path() / "repos" / "libz");
  s->main_url = repo.url();
  s->local_id = 44851;
  s->ids = {s->local_id};

  const std::string z0 = libz.Commit(
      {{"libz.c", "int libz_version(void) { return 1; }\n"}}, "libz 1",
      T("2022-02-01T00:00:00Z"));
  libz.Commit({{"libz.c", "int libz_version(void) { return 2; }\n"}}, "libz 2",
              T("2022-02-10T15:00:00Z"));
  const std::string z2 = libz.Commit(
      {{"libz.c", "int libz_version(void) { return 3; }\n"}}, "libz 3",
      T("2022-02-11T00:30:00Z"));

  const Timestamp t0 = T("2022-02-10T00:00:00Z");
  s->vul_commit = InitialCommit(repo, t0);
  for (int i = 0; i < 14; ++i) {
    const Timestamp when = t0 + hours(12 + i);
    std::string id;
    if (i == 9) {
      id = repo.Commit({{"parse.c", ParseSource(true)}},
                       "clamp record length", when);
      s->fix_commit = id;
    } else if (i == 13) {
      id = repo.Commit({{"ChangeLog", "2022-02-11 release notes\n"}},
                       "update ChangeLog", when);
      s->decoy_commit = id;
    } else {
      id = Filler(repo, i + 1, when);
    }
    s->candidates.push_back(id);
  }
  s->verified_commit = s->decoy_commit;
  s->latest_commit = s->decoy_commit;

  CorpusBuilder cb(s->corpus);
  cb.AddProject(name, ProjectFiles(name, s->main_url, {{"libz", libz.url()}}));
  IssueDoc doc;
  doc.local_id = s->local_id;
  doc.project = name;
  doc.report = CrashReport();
  doc.vul_srcmap = cb.AddSrcMap(
      "44851-vul",
      {Pin(name, s->main_url, s->vul_commit), Pin("libz", libz.url(), z0)});
  doc.vul_rev = s->vul_commit;
  doc.fix_srcmap = cb.AddSrcMap(
      "44851-fix",
      {Pin(name, s->main_url, s->decoy_commit), Pin("libz", libz.url(), z2)});
  doc.fix_rev = s->decoy_commit;
  doc.report_time = t0 + hours(6);
  doc.verify_time = t0 + hours(12 + 13);
  doc.poc = cb.AddPoc(CrashingPoc());
  cb.AddIssue(doc);
  s->dep_pins = {{"/src/libz", z0}};
  return std::move(*s);
}

LocalScenario MakeDependencyScenario() {
  auto s = NewScenario();
  const std::string name = "depuser";
  GitRepo repo(s->dir->path() / "repos" / name);
  s->main_url = repo.url();
  s->local_id = 7001;
  s->ids = {s->local_id};
  const Timestamp t0 = T("2022-03-01T00:00:00Z");

  std::vector<std::pair<std::string, std::string>> dep_urls;
  std::vector<DependencyPin> pins_vul;
  std::vector<DependencyPin> pins_fix;
  for (const std::string dep : {"depa", "depb", "depc"}) {
    GitRepo d(s->dir->path() / "repos" / dep);
    const std::string fn = dep + "_value";
    const std::string pinned = d.Commit(
        {{dep + ".h", "int " + fn + "(void);\n"},
         {dep + ".c", "#include \"" + dep + ".h\"\nint " + fn +
                          "(void) { return 1; }\n"}},
        dep + " 1", t0);
    std::string head;
    if (dep == "depb") {
      head = d.Commit({{dep + ".h", "int " + fn + "(int scale);\n"},
                       {dep + ".c", "#include \"" + dep + ".h\"\nint " + fn +
                                        "(int scale) { return scale; }\n"}},
                      "depb: take a scale argument", t0 + hours(48));
    } else {
      head = d.Commit({{dep + ".c", "#include \"" + dep + ".h\"\nint " + fn +
                                        "(void) { return 2; }\n"}},
                      dep + " 2", t0 + hours(48));
    }
    s->dep_pins["/src/" + dep] = pinned;
    s->dep_heads["/src/" + dep] = head;
    dep_urls.emplace_back(dep, d.url());
    pins_vul.push_back(Pin(dep, d.url(), pinned));
    pins_fix.push_back(Pin(dep, d.url(), pinned));
  }

  const std::string link =
      "#include \"depa.h\"\n#include \"depb.h\"\n#include \"depc.h\"\n"
      "int deps_sum(void) { return depa_value() + depb_value() + "
      "depc_value(); }\n";
  s->vul_commit = repo.Commit({{"fuzzer.c", FuzzerSource()},
                               {"parse.c", ParseSource(false)},
                               {"link.c", link}},
                              "initial import", t0);
  s->verified_commit = repo.Commit({{"parse.c", ParseSource(true)}},
                                   "clamp record length", t0 + hours(24));
  s->fix_commit = s->verified_commit;
  s->latest_commit = s->verified_commit;

  CorpusBuilder cb(s->corpus);
  cb.AddProject(name, ProjectFiles(name, s->main_url, dep_urls));
  pins_vul.insert(pins_vul.begin(), Pin(name, s->main_url, s->vul_commit));
  pins_fix.insert(pins_fix.begin(), Pin(name, s->main_url, s->verified_commit));
  IssueDoc doc;
  doc.local_id = s->local_id;
  doc.project = name;
  doc.report = CrashReport();
  doc.vul_srcmap = cb.AddSrcMap("7001-vul", pins_vul);
  doc.vul_rev = s->vul_commit;
  doc.fix_srcmap = cb.AddSrcMap("7001-fix", pins_fix);
  doc.fix_rev = s->verified_commit;
  doc.report_time = t0 + hours(1);
  doc.verify_time = t0 + hours(24);
  doc.poc = cb.AddPoc(CrashingPoc());
  cb.AddIssue(doc);
  return std::move(*s);
}

LocalScenario MakeBrokenReportScenario() { return MakeLongTail(true); }

LocalScenario MakeZeroDayScenario() { return MakeLongTail(false); }

LocalScenario MakeDeadUrlScenario() {
  auto s = NewScenario();
  GitRepo mirror(s->dir->path() / "mirrors" / "libdelta");
  const Timestamp t0 = T("2022-05-01T00:00:00Z");
  const std::string d0 = mirror.Commit(
      {{"libdelta.c", "int libdelta_value(void) { return 7; }\n"}},
      "libdelta 1", t0);
  s->dep_pins["/src/libdelta"] = d0;

  CorpusBuilder cb(s->corpus);
  const PocRef poc = cb.AddPoc(CrashingPoc());
  int64_t id = 501;
  for (const std::string name : {"alpha", "beta", "gamma"}) {
    GitRepo repo(s->dir->path() / "repos" / name);
    const std::string v0 = InitialCommit(repo, t0);
    const std::string v1 = repo.Commit({{"parse.c", ParseSource(true)}},
                                       "clamp record length", t0 + hours(24));
    cb.AddProject(name, ProjectFiles(name, repo.url(), {{"libdelta", kDeadUrl}}));
    IssueDoc doc;
    doc.local_id = id;
    doc.project = name;
    doc.report = CrashReport();
    doc.vul_srcmap = cb.AddSrcMap(
        std::to_string(id) + "-vul",
        {Pin(name, repo.url(), v0), Pin("libdelta", kDeadUrl, d0)});
    doc.vul_rev = v0;
    doc.fix_srcmap = cb.AddSrcMap(
        std::to_string(id) + "-fix",
        {Pin(name, repo.url(), v1), Pin("libdelta", kDeadUrl, d0)});
    doc.fix_rev = v1;
    doc.report_time = t0 + hours(1);
    doc.verify_time = t0 + hours(24);
    doc.poc = poc;
    cb.AddIssue(doc);
    s->ids.push_back(id++);
  }
  s->local_id = s->ids.front();
  s->rules.Add(ResourceRule{"libdelta-mirror", "http://127.0.0.1:1/libdelta*",
                            ResourceClass::kCore, RuleAction::kReplace,
                            mirror.url(), "upstream host retired"});
  return std::move(*s);
}

}  // namespace vulnrepro::testing
