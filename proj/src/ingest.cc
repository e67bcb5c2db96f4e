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

#include "vulnrepro/ingest.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <filesystem>
#include <string>
#include <utility>

#include "vulnrepro/error.h"

namespace vulnrepro {

namespace {

[[noreturn]] void FieldError(std::string_view field) {
  throw Error(ErrorCode::kParseError, std::string(field));
}

const OrderedJson &Member(const OrderedJson &obj, std::string_view key,
                          std::string_view field_path) {
  if (!obj.is_object()) FieldError(field_path);
  auto it = obj.find(key);
  if (it == obj.end()) FieldError(field_path);
  return *it;
}

std::string StringMember(const OrderedJson &obj, std::string_view key,
                         std::string_view field_path) {
  const OrderedJson &v = Member(obj, key, field_path);
  if (!v.is_string()) FieldError(field_path);
  return v.get<std::string>();
}

std::string LowerAscii(std::string_view s) {
  std::string out(s);
  for (char &c : out) c = static_cast<char>(std::tolower(c));
  return out;
}

constexpr std::array<std::string_view, 20> kKnownCrashClasses = {
    "heap-buffer-overflow",
    "stack-buffer-overflow",
    "global-buffer-overflow",
    "stack-buffer-underflow",
    "heap-use-after-free",
    "stack-use-after-return",
    "stack-use-after-scope",
    "double-free",
    "bad-free",
    "alloc-dealloc-mismatch",
    "use-after-poison",
    "container-overflow",
    "dynamic-stack-buffer-overflow",
    "negative-size-param",
    "memcpy-param-overlap",
    "unknown-address",
    "memory-leak",
    "use-of-uninitialized-value",
    "undefined-behavior",
    "stack-overflow",
};

}  // namespace

std::string_view VcsKindName(VcsKind kind) {
  switch (kind) {
    case VcsKind::kGit: return "git";
    case VcsKind::kMercurial: return "hg";
    case VcsKind::kSvn: return "svn";
  }
  return "git";
}

std::optional<VcsKind> ParseVcsKind(std::string_view name) {
  if (name == "git") return VcsKind::kGit;
  if (name == "hg" || name == "mercurial") return VcsKind::kMercurial;
  if (name == "svn" || name == "subversion") return VcsKind::kSvn;
  return std::nullopt;
}

bool IsValidRepositoryUrl(VcsKind kind, std::string_view url) {
  url = Trim(url);
  if (url.empty()) return false;
  if (url.find_first_of(" \t\n") != std::string_view::npos) return false;
  const size_t sep = url.find("://");
  if (sep != std::string_view::npos) {
    if (sep == 0 || sep + 3 >= url.size()) return false;
    const std::string scheme = LowerAscii(url.substr(0, sep));
    static constexpr std::string_view kGit[] = {"http", "https", "git", "ssh",
                                                "file", "ftp"};
    static constexpr std::string_view kHg[] = {"http", "https", "ssh", "file"};
    static constexpr std::string_view kSvn[] = {"http",     "https", "svn",
                                                "svn+ssh", "file"};
    const auto in = [&](std::span<const std::string_view> set) {
      return std::find(set.begin(), set.end(), scheme) != set.end();
    };
    switch (kind) {
      case VcsKind::kGit: return in(kGit);
      case VcsKind::kMercurial: return in(kHg);
      case VcsKind::kSvn: return in(kSvn);
    }
  }
  if (url.front() == '/') return kind != VcsKind::kSvn;
  if (kind == VcsKind::kGit) {
    const size_t at = url.find('@');
    const size_t colon = url.find(':');
    return at != std::string_view::npos && colon != std::string_view::npos &&
           at > 0 && at < colon && colon + 1 < url.size();
  }
  return false;
}

SrcMap::SrcMap(std::vector<DependencyPin> entries, size_t main_index)
    : entries_(std::move(entries)), main_index_(main_index) {
  if (main_index_ >= entries_.size()) {
    throw Error(ErrorCode::kMainProjectMissing, "main index out of range");
  }
  for (size_t i = 0; i < entries_.size(); ++i) {
    for (size_t j = i + 1; j < entries_.size(); ++j) {
      if (entries_[i].path == entries_[j].path) {
        throw Error(ErrorCode::kParseError,
                    "duplicate srcmap path " + entries_[i].path);
      }
    }
  }
}

const DependencyPin *SrcMap::Find(std::string_view path) const {
  for (const DependencyPin &pin : entries_) {
    if (pin.path == path) return &pin;
  }
  return nullptr;
}

std::vector<DependencyPin> SrcMap::Dependencies() const {
  std::vector<DependencyPin> deps;
  for (size_t i = 0; i < entries_.size(); ++i) {
    if (i != main_index_) deps.push_back(entries_[i]);
  }
  return deps;
}

SrcMap ParseSrcMap(const OrderedJson &doc, std::string_view main_project) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kParseError, "srcmap must be an object");
  }
  std::vector<DependencyPin> entries;
  for (const auto &[path, value] : doc.items()) {
    const std::string field = "srcmap[" + path + "]";
    if (path.empty()) FieldError(field);
    const std::string type = StringMember(value, "type", field + ".type");
    const std::optional<VcsKind> kind = ParseVcsKind(type);
    if (!kind) throw Error(ErrorCode::kUnsupportedVcs, type);
    DependencyPin pin{path, *kind, StringMember(value, "url", field + ".url"),
                      StringMember(value, "rev", field + ".rev")};
    if (pin.revision.empty()) FieldError(field + ".rev");
    if (!IsValidRepositoryUrl(pin.vcs, pin.url)) FieldError(field + ".url");
    for (const DependencyPin &seen : entries) {
      if (seen.path == pin.path) FieldError(field);
    }
    entries.push_back(std::move(pin));
  }
  const auto basename = [](const std::string &path) {
    std::string p = path;
    while (p.size() > 1 && p.back() == '/') p.pop_back();
    return std::filesystem::path(p).filename().string();
  };
  std::optional<size_t> main_index;
  for (size_t i = 0; i < entries.size() && !main_index; ++i) {
    if (basename(entries[i].path) == main_project) main_index = i;
  }
  for (size_t i = 0; i < entries.size() && !main_index; ++i) {
    if (LowerAscii(basename(entries[i].path)) == LowerAscii(main_project)) {
      main_index = i;
    }
  }
  if (!main_index) {
    throw Error(ErrorCode::kMainProjectMissing, std::string(main_project));
  }
  return SrcMap(std::move(entries), *main_index);
}

SrcMap ParseSrcMap(std::string_view json_text, std::string_view main_project) {
  OrderedJson doc;
  try {
    doc = OrderedJson::parse(json_text);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::kParseError, std::string("srcmap: ") + e.what());
  }
  return ParseSrcMap(doc, main_project);
}

OrderedJson SerializeSrcMap(const SrcMap &map) {
  OrderedJson doc = OrderedJson::object();
  for (const DependencyPin &pin : map.entries()) {
    doc[pin.path] = {{"type", VcsKindName(pin.vcs)},
                     {"url", pin.url},
                     {"rev", pin.revision}};
  }
  return doc;
}

CrashClass::CrashClass(std::string_view name) : name_(LowerAscii(Trim(name))) {}

bool CrashClass::known() const {
  return std::find(kKnownCrashClasses.begin(), kKnownCrashClasses.end(),
                   name_) != kKnownCrashClasses.end();
}

std::span<const std::string_view> KnownCrashClasses() {
  return kKnownCrashClasses;
}

bool HasSanitizerMarker(std::string_view output) {
  static constexpr std::string_view kMarkers[] = {
      "ERROR: AddressSanitizer",   "ERROR: MemorySanitizer",
      "ERROR: LeakSanitizer",      "ERROR: ThreadSanitizer",
      "ERROR: HWAddressSanitizer", "WARNING: MemorySanitizer",
      "SUMMARY: UndefinedBehaviorSanitizer", "runtime error:"};
  for (std::string_view m : kMarkers) {
    if (output.find(m) != std::string_view::npos) return true;
  }
  return false;
}

CrashClass ClassifySanitizerReport(std::string_view report) {
  static constexpr std::string_view kSanitizers[] = {
      "AddressSanitizer", "HWAddressSanitizer", "MemorySanitizer",
      "LeakSanitizer", "ThreadSanitizer"};
  for (std::string_view line_sv : SplitLines(report)) {
    std::string line(line_sv);
    for (std::string_view san : kSanitizers) {
      const std::string marker = "ERROR: " + std::string(san) + ":";
      const size_t pos = line.find(marker);
      if (pos == std::string::npos) continue;
      std::string_view rest = Trim(std::string_view(line).substr(
          pos + marker.size()));
      if (rest.starts_with("SEGV on unknown address") ||
          rest.starts_with("unknown-crash")) {
        return CrashClass("unknown-address");
      }
      if (rest.starts_with("detected memory leaks")) {
        return CrashClass("memory-leak");
      }
      if (rest.starts_with("attempting double-free")) {
        return CrashClass("double-free");
      }
      if (rest.starts_with("attempting free on address")) {
        return CrashClass("bad-free");
      }
      if (rest.starts_with("stack-overflow")) return CrashClass("stack-overflow");
      const size_t end = rest.find_first_of(" \t(");
      return CrashClass(rest.substr(0, end));
    }
    if (line.find("WARNING: MemorySanitizer: use-of-uninitialized-value") !=
        std::string::npos) {
      return CrashClass("use-of-uninitialized-value");
    }
  }
  if (report.find("runtime error:") != std::string_view::npos ||
      report.find("SUMMARY: UndefinedBehaviorSanitizer") !=
          std::string_view::npos) {
    return CrashClass("undefined-behavior");
  }
  return CrashClass();
}

IssueRecord ParseIssue(const OrderedJson &doc,
                       const CommitTimeLookup &commit_time) {
  if (!doc.is_object()) FieldError("record");
  IssueRecord issue;

  const OrderedJson &id = Member(doc, "local_id", "local_id");
  if (!id.is_number_integer() || id.get<int64_t>() <= 0) {
    FieldError("local_id");
  }
  issue.local_id = id.get<int64_t>();
  issue.project = StringMember(doc, "project", "project");
  if (issue.project.empty()) FieldError("project");

  const OrderedJson &labels = Member(doc, "labels", "labels");
  if (!labels.is_array()) FieldError("labels");
  for (const OrderedJson &label : labels) {
    if (!label.is_string()) FieldError("labels");
    issue.labels.insert(label.get<std::string>());
  }

  const OrderedJson &crash = Member(doc, "crash", "crash");
  issue.crash.type = CrashClass(StringMember(crash, "type", "crash.type"));
  issue.crash.sanitizer = StringMember(crash, "sanitizer", "crash.sanitizer");
  issue.crash.fuzzer = StringMember(crash, "fuzzer", "crash.fuzzer");
  const OrderedJson &command = Member(crash, "command", "crash.command");
  if (!command.is_array() || command.empty()) FieldError("crash.command");
  size_t placeholders = 0;
  for (const OrderedJson &arg : command) {
    if (!arg.is_string()) FieldError("crash.command");
    const std::string s = arg.get<std::string>();
    for (size_t pos = s.find(kPocPlaceholder); pos != std::string::npos;
         pos = s.find(kPocPlaceholder, pos + 1)) {
      ++placeholders;
    }
    issue.crash.run_command.push_back(s);
  }
  if (placeholders != 1) FieldError("crash.command");
  if (auto it = crash.find("report"); it != crash.end() && !it->is_null()) {
    if (!it->is_string()) FieldError("crash.report");
    issue.crash.report = it->get<std::string>();
  }

  const auto parse_ref = [&](std::string_view key) {
    const std::string k(key);
    const OrderedJson &ref = Member(doc, k, k);
    RevisionRef r{StringMember(ref, "srcmap", k + ".srcmap"),
                  StringMember(ref, "rev", k + ".rev")};
    if (r.srcmap.empty()) FieldError(k + ".srcmap");
    if (r.main_revision.empty()) FieldError(k + ".rev");
    return r;
  };
  issue.vulnerable = parse_ref("vulnerable");
  issue.verified = parse_ref("verified");

  const auto parse_time = [&](std::string_view key,
                              const std::string &revision) -> Timestamp {
    const std::string k(key);
    auto it = doc.find(k);
    if (it == doc.end() || it->is_null()) {
      if (commit_time) {
        if (auto t = commit_time(issue.project, revision)) return *t;
      }
      FieldError(k);
    }
    if (!it->is_string()) FieldError(k);
    try {
      return ParseIso8601(it->get<std::string>());
    } catch (const Error &) {
      FieldError(k);
    }
  };
  issue.report_time = parse_time("report_time", issue.vulnerable.main_revision);
  issue.verify_time = parse_time("verify_time", issue.verified.main_revision);
  if (issue.report_time > issue.verify_time) FieldError("verify_time");

  auto poc = doc.find("poc");
  if (poc == doc.end() || poc->is_null()) {
    throw Error(ErrorCode::kMissingPoC, std::to_string(issue.local_id));
  }
  issue.poc.digest = StringMember(*poc, "digest", "poc.digest");
  if (!issue.poc.digest.starts_with("sha256:") ||
      issue.poc.digest.size() != 7 + 64 ||
      !std::all_of(issue.poc.digest.begin() + 7, issue.poc.digest.end(),
                   [](char c) {
                     return std::isdigit(static_cast<unsigned char>(c)) ||
                            (c >= 'a' && c <= 'f');
                   })) {
    FieldError("poc.digest");
  }
  const OrderedJson &bytes = Member(*poc, "bytes", "poc.bytes");
  if (!bytes.is_number_integer() || bytes.get<int64_t>() < 0) {
    FieldError("poc.bytes");
  }
  issue.poc.bytes = bytes.get<uint64_t>();
  return issue;
}

IssueRecord ParseIssue(std::string_view json_text,
                       const CommitTimeLookup &commit_time) {
  OrderedJson doc;
  try {
    doc = OrderedJson::parse(json_text);
  } catch (const nlohmann::json::parse_error &e) {
    throw Error(ErrorCode::kParseError, std::string("record: ") + e.what());
  }
  return ParseIssue(doc, commit_time);
}

OrderedJson SerializeIssue(const IssueRecord &issue) {
  OrderedJson crash = {{"type", issue.crash.type.name()},
                       {"sanitizer", issue.crash.sanitizer},
                       {"fuzzer", issue.crash.fuzzer},
                       {"command", issue.crash.run_command}};
  if (issue.crash.report) crash["report"] = *issue.crash.report;
  OrderedJson labels = OrderedJson::array();
  for (const std::string &l : issue.labels) labels.push_back(l);
  return OrderedJson{
      {"local_id", issue.local_id},
      {"project", issue.project},
      {"labels", std::move(labels)},
      {"crash", std::move(crash)},
      {"vulnerable",
       {{"srcmap", issue.vulnerable.srcmap},
        {"rev", issue.vulnerable.main_revision}}},
      {"verified",
       {{"srcmap", issue.verified.srcmap},
        {"rev", issue.verified.main_revision}}},
      {"report_time", FormatIso8601(issue.report_time)},
      {"verify_time", FormatIso8601(issue.verify_time)},
      {"poc", {{"digest", issue.poc.digest}, {"bytes", issue.poc.bytes}}},
  };
}

void CheckPoc(const PocRef &ref, std::span<const uint8_t> blob) {
  if (blob.size() != ref.bytes || "sha256:" + Sha256Hex(blob) != ref.digest) {
    throw Error(ErrorCode::kDigestMismatch, ref.digest);
  }
}

PocRef MakePocRef(std::span<const uint8_t> blob) {
  return PocRef{"sha256:" + Sha256Hex(blob), blob.size()};
}

bool IsCandidate(const IssueRecord &issue) {
  const auto has = [&](std::string_view label) {
    return issue.labels.contains(std::string(label));
  };
  return has(kLabelSecurity) && has(kLabelReproducible) &&
         has(kLabelVerified) &&
         issue.vulnerable.main_revision != issue.verified.main_revision;
}

std::vector<IssueRecord> FilterCandidates(std::span<const IssueRecord> issues) {
  std::vector<IssueRecord> out;
  std::copy_if(issues.begin(), issues.end(), std::back_inserter(out),
               IsCandidate);
  return out;
}

std::vector<std::string> SubstitutePoc(std::span<const std::string> run_command,
                                       std::string_view poc_path) {
  std::vector<std::string> argv;
  argv.reserve(run_command.size());
  for (const std::string &arg : run_command) {
    std::string a = arg;
    if (const size_t pos = a.find(kPocPlaceholder); pos != std::string::npos) {
      a.replace(pos, kPocPlaceholder.size(), poc_path);
    }
    argv.push_back(std::move(a));
  }
  return argv;
}

}  // namespace vulnrepro
