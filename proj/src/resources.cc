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

#include "vulnrepro/resources.h"

#include <algorithm>
#include <set>
#include <sstream>
#include <utility>

#include "vulnrepro/error.h"
#include "vulnrepro/executor.h"
#include "vulnrepro/shell_words.h"

namespace vulnrepro {

namespace {

const std::regex &UrlRegex() {
  static const std::regex re(
      R"((?:https?|ftp|git|svn|svn\+ssh|ssh|hg|file)://[^\s'"\\;|&()<>`]+)",
      std::regex::icase);
  return re;
}

std::vector<std::string> SplitFields(std::string_view line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t bar = line.find('|', start);
    fields.emplace_back(Trim(line.substr(start, bar - start)));
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  return fields;
}

void Validate(const ResourceRule &rule) {
  if (rule.id.empty() || rule.id.find_first_of(" \t|") != std::string::npos) {
    throw Error(ErrorCode::kParseError, "rule id '" + rule.id + "'");
  }
  if (rule.match.empty()) {
    throw Error(ErrorCode::kParseError, "rule " + rule.id + ": empty match");
  }
  if (rule.classification == ResourceClass::kCore &&
      rule.action != RuleAction::kReplace) {
    throw Error(ErrorCode::kParseError,
                "rule " + rule.id + ": core resources must be replaced");
  }
  if (rule.action == RuleAction::kReplace && rule.replacement.empty()) {
    throw Error(ErrorCode::kParseError,
                "rule " + rule.id + ": replace needs a locator");
  }
}

std::string HostOf(std::string_view url) {
  const size_t sep = url.find("://");
  if (sep == std::string_view::npos) return "";
  std::string_view rest = url.substr(sep + 3);
  rest = rest.substr(0, rest.find_first_of("/:"));
  if (const size_t at = rest.rfind('@'); at != std::string_view::npos) {
    rest.remove_prefix(at + 1);
  }
  std::string host(rest);
  for (char &c : host) c = static_cast<char>(std::tolower(c));
  return host;
}

bool SameLocator(std::string_view reported, std::string_view written) {
  const std::string a = NormalizeUrl(reported);
  const std::string b = NormalizeUrl(written);
  if (a.empty() || b.empty()) return false;
  // git reports file:// clones by bare path.
  return a == b || (a.front() == '/' && b.ends_with(a)) ||
         (b.front() == '/' && a.ends_with(b));
}

void ReplaceAll(std::string &text, std::string_view from, std::string_view to) {
  if (from.empty()) return;
  for (size_t pos = text.find(from); pos != std::string::npos;
       pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

}  // namespace

bool ResourceRule::Matches(std::string_view url) const {
  return GlobMatch(match, url);
}

RuleStore RuleStore::Parse(std::string_view text) {
  RuleStore store;
  int line_no = 0;
  for (const std::string &raw : SplitLines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fail = [&](std::string_view what) -> Error {
      return Error(ErrorCode::kParseError,
                   "rules line " + std::to_string(line_no) + ": " +
                       std::string(what));
    };
    std::vector<std::string> f = SplitFields(line);
    if (f.size() < 4) throw fail("expected at least 4 fields");
    ResourceRule rule;
    rule.id = f[0];
    if (f[1] == "core") {
      rule.classification = ResourceClass::kCore;
    } else if (f[1] == "non_core") {
      rule.classification = ResourceClass::kNonCore;
    } else {
      throw fail("classification must be core or non_core");
    }
    rule.match = f[2];
    if (f[3] == "remove") {
      rule.action = RuleAction::kRemove;
    } else if (f[3].starts_with("replace ")) {
      rule.action = RuleAction::kReplace;
      rule.replacement = std::string(Trim(std::string_view(f[3]).substr(8)));
    } else {
      throw fail("action must be 'replace <url>' or 'remove'");
    }
    if (f.size() > 4) {
      // The note may itself contain '|'.
      std::string note;
      for (size_t i = 4; i < f.size(); ++i) {
        if (i > 4) note += " | ";
        note += f[i];
      }
      std::string_view n = Trim(note);
      if (!n.empty() && n.front() == '#') n.remove_prefix(1);
      rule.note = std::string(Trim(n));
    }
    try {
      store.Add(std::move(rule));
    } catch (const Error &e) {
      throw fail(e.detail());
    }
  }
  return store;
}

RuleStore RuleStore::Load(const std::filesystem::path &path) {
  return Parse(ReadFile(path));
}

std::string RuleStore::Serialize() const {
  std::ostringstream out;
  out << "# rules-format: 1\n";
  for (const ResourceRule &r : rules_) {
    out << r.id << " | "
        << (r.classification == ResourceClass::kCore ? "core" : "non_core")
        << " | " << r.match << " | "
        << (r.action == RuleAction::kReplace ? "replace " + r.replacement
                                             : std::string("remove"));
    if (!r.note.empty()) out << " | # " << r.note;
    out << "\n";
  }
  return out.str();
}

void RuleStore::Save(const std::filesystem::path &path) const {
  WriteFile(path, Serialize());
}

void RuleStore::Add(ResourceRule rule) {
  Validate(rule);
  if (Find(rule.id) != nullptr) {
    throw Error(ErrorCode::kParseError, "duplicate rule id " + rule.id);
  }
  rules_.push_back(std::move(rule));
}

const ResourceRule *RuleStore::FirstMatch(std::string_view url) const {
  for (const ResourceRule &r : rules_) {
    if (r.Matches(url)) return &r;
  }
  return nullptr;
}

const ResourceRule *RuleStore::Find(std::string_view id) const {
  for (const ResourceRule &r : rules_) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

RuleStore RuleStore::Subset(std::span<const std::string> ids) const {
  RuleStore out;
  for (const ResourceRule &r : rules_) {
    if (std::find(ids.begin(), ids.end(), r.id) != ids.end()) {
      out.rules_.push_back(r);
    }
  }
  return out;
}

ErrorPatternTable ErrorPatternTable::Defaults() {
  using C = ErrorPattern::Capture;
  ErrorPatternTable t;
  const auto add = [&](std::string name, const char *re, C capture) {
    t.patterns_.push_back({std::move(name), std::regex(re), capture});
  };
  add("git-unable-to-access", R"(fatal: unable to access '([^']+)')", C::kUrl);
  add("git-repo-missing",
      R"(fatal: repository '([^']+)' (?:not found|does not exist))", C::kUrl);
  add("git-not-a-repo", R"(fatal: '([^']+)' does not appear to be a git repository)",
      C::kUrl);
  add("hg-repo-missing", R"(abort: repository (\S+) not found)", C::kUrl);
  add("hg-http-error", R"(abort: HTTP Error (?:404|410))", C::kContext);
  add("svn-unreachable",
      R"(svn: E\d+: Unable to connect to a repository at URL '([^']+)')",
      C::kUrl);
  add("svn-missing-url", R"(svn: E\d+: URL '([^']+)' doesn't exist)", C::kUrl);
  add("http-gone", R"(ERROR (?:404|410)\b)", C::kContext);
  add("curl-http-error",
      R"(curl: \(22\) The requested URL returned error: (?:404|410))",
      C::kContext);
  add("curl-dns", R"(curl: \(6\) Could not resolve host: ([^\s;]+))", C::kHost);
  add("wget-dns",
      R"(unable to resolve host address [^A-Za-z0-9]*([A-Za-z0-9.-]+))",
      C::kHost);
  add("ssh-dns", R"(Could not resolve hostname ([^:\s]+))", C::kHost);
  add("archive-not-gzip", R"(gzip: stdin: not in gzip format)", C::kContext);
  add("archive-unzip", R"(End-of-central-directory signature not found)",
      C::kContext);
  return t;
}

void ErrorPatternTable::LoadExtensions(std::string_view text) {
  int line_no = 0;
  for (const std::string &raw : SplitLines(text)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const size_t s1 = line.find(' ');
    const size_t s2 = s1 == std::string_view::npos ? s1 : line.find(' ', s1 + 1);
    if (s2 == std::string_view::npos) {
      throw Error(ErrorCode::kParseError,
                  "patterns line " + std::to_string(line_no));
    }
    const std::string_view kind = line.substr(0, s1);
    ErrorPattern p;
    if (kind == "url") {
      p.capture = ErrorPattern::Capture::kUrl;
    } else if (kind == "host") {
      p.capture = ErrorPattern::Capture::kHost;
    } else if (kind == "context") {
      p.capture = ErrorPattern::Capture::kContext;
    } else {
      throw Error(ErrorCode::kParseError,
                  "patterns line " + std::to_string(line_no) + ": kind");
    }
    p.name = std::string(line.substr(s1 + 1, s2 - s1 - 1));
    try {
      p.regex = std::regex(std::string(Trim(line.substr(s2 + 1))));
    } catch (const std::regex_error &) {
      throw Error(ErrorCode::kParseError,
                  "patterns line " + std::to_string(line_no) + ": regex");
    }
    patterns_.push_back(std::move(p));
  }
}

std::vector<std::string> ExtractUrls(std::string_view text) {
  std::vector<std::string> urls;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), UrlRegex());
       it != std::sregex_iterator(); ++it) {
    std::string url = it->str();
    while (!url.empty() && (url.back() == '.' || url.back() == ',')) {
      url.pop_back();
    }
    urls.push_back(std::move(url));
  }
  return urls;
}

std::vector<BrokenResource> DetectBrokenResources(
    std::string_view build_log, const BuildSpec &spec,
    const ErrorPatternTable &patterns) {
  std::vector<std::vector<std::string>> directive_urls;
  directive_urls.reserve(spec.directives.size());
  for (const Directive &d : spec.directives) {
    directive_urls.push_back(ExtractUrls(d.text));
  }

  std::vector<BrokenResource> found;
  std::set<std::string> seen;
  const auto record = [&](auto &&predicate, const std::string &line) {
    for (size_t d = 0; d < directive_urls.size(); ++d) {
      for (const std::string &url : directive_urls[d]) {
        if (!predicate(url)) continue;
        if (seen.insert(NormalizeUrl(url)).second) {
          found.push_back({url, d, line});
        }
        return;
      }
    }
  };

  std::string last_url;
  for (const std::string &line : SplitLines(build_log)) {
    if (auto urls = ExtractUrls(line); !urls.empty()) last_url = urls.back();
    for (const ErrorPattern &p : patterns.patterns()) {
      std::smatch m;
      if (!std::regex_search(line, m, p.regex)) continue;
      switch (p.capture) {
        case ErrorPattern::Capture::kUrl: {
          if (m.size() < 2) break;
          const std::string reported = m[1].str();
          record([&](const std::string &u) { return SameLocator(reported, u); },
                 line);
          break;
        }
        case ErrorPattern::Capture::kHost: {
          if (m.size() < 2) break;
          std::string host = m[1].str();
          for (char &c : host) c = static_cast<char>(std::tolower(c));
          record([&](const std::string &u) { return HostOf(u) == host; }, line);
          break;
        }
        case ErrorPattern::Capture::kContext:
          if (last_url.empty()) break;
          record([&](const std::string &u) { return SameLocator(last_url, u); },
                 line);
          break;
      }
      break;  // one pattern per line
    }
  }
  return found;
}

RuleApplication ApplyRules(const BuildSpec &spec, const RuleStore &store) {
  RuleApplication result;
  result.spec.origin = spec.origin;
  result.spec.trailing_newline = spec.trailing_newline;
  const auto note_applied = [&](const std::string &id) {
    if (std::find(result.applied.begin(), result.applied.end(), id) ==
        result.applied.end()) {
      result.applied.push_back(id);
    }
  };

  for (size_t index = 0; index < spec.directives.size(); ++index) {
    Directive d = spec.directives[index];
    bool dropped = false;
    std::set<std::string> handled;
    while (!dropped) {
      const ResourceRule *rule = nullptr;
      std::string url;
      for (const std::string &u : ExtractUrls(d.text)) {
        if (handled.contains(u)) continue;
        if (const ResourceRule *r = store.FirstMatch(u)) {
          rule = r;
          url = u;
          break;
        }
      }
      if (rule == nullptr) break;
      handled.insert(url);
      const std::string where = rule->id + "@" + std::to_string(index);

      if (rule->action == RuleAction::kReplace) {
        ReplaceAll(d.text, url, rule->replacement);
        handled.insert(rule->replacement);
        note_applied(rule->id);
        continue;
      }

      if (d.kind != DirectiveKind::kRun) {
        dropped = true;
        note_applied(rule->id);
        break;
      }
      const std::string_view body = d.Body();
      const size_t body_offset = static_cast<size_t>(body.data() - d.text.data());
      AndChain chain;
      try {
        chain = SplitAndChain(body);
      } catch (const Error &) {
        throw Error(ErrorCode::kRuleApplicationError, where);
      }
      const size_t at = body.find(url);
      std::optional<size_t> seg;
      for (size_t i = 0; i < chain.segments.size(); ++i) {
        if (chain.segments[i].begin <= at && at < chain.segments[i].end) {
          seg = i;
        }
      }
      if (!seg) throw Error(ErrorCode::kRuleApplicationError, where);
      if (chain.segments.size() == 1) {
        dropped = true;
      } else {
        Span cut = *seg == 0
                       ? Span{chain.segments[0].begin, chain.separators[0].end}
                       : Span{chain.separators[*seg - 1].begin,
                              chain.segments[*seg].end};
        if (d.text.find('\n') != std::string::npos) {
          result.warnings.push_back(
              "rule " + rule->id + " cut a command out of multi-line directive " +
              std::to_string(index) + " (line " + std::to_string(d.first_line) +
              "); review the rule boundary");
        }
        d.text.erase(body_offset + cut.begin, cut.end - cut.begin);
      }
      note_applied(rule->id);
    }
    if (!dropped) result.spec.directives.push_back(std::move(d));
  }
  result.spec.Renumber();
  return result;
}

ResourceClass ClassifyResource(const BrokenResource &,
                               const BuildOutcome &retry_without_resource) {
  return retry_without_resource.ok() ? ResourceClass::kNonCore
                                     : ResourceClass::kCore;
}

}  // namespace vulnrepro
