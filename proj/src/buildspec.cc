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

#include "vulnrepro/buildspec.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

#include "vulnrepro/error.h"
#include "vulnrepro/shell_words.h"

namespace vulnrepro {

namespace {

bool EndsWithContinuation(std::string_view line) {
  while (!line.empty() &&
         (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) {
    line.remove_suffix(1);
  }
  return !line.empty() && line.back() == '\\';
}

bool IsBlankOrComment(std::string_view line) {
  std::string_view t = Trim(line);
  return t.empty() || t.front() == '#';
}

DirectiveKind KindOf(std::string_view keyword) {
  if (keyword == "RUN") return DirectiveKind::kRun;
  if (keyword == "COPY" || keyword == "ADD") return DirectiveKind::kCopy;
  if (keyword == "ENV") return DirectiveKind::kEnv;
  if (keyword == "WORKDIR") return DirectiveKind::kWorkdir;
  return DirectiveKind::kOther;
}

// Lexical join; "." and ".." components are folded while they do not climb
// above the start of a relative path.
std::string JoinPath(std::string_view base, std::string_view rel) {
  if (rel.empty()) return std::string(base);
  std::string joined;
  if (base.empty() || rel.front() == '/' || rel.front() == '$') {
    joined = std::string(rel);
  } else {
    joined = std::string(base);
    if (joined.back() != '/') joined.push_back('/');
    joined.append(rel);
  }
  std::vector<std::string> parts;
  const bool absolute = joined.front() == '/';
  std::stringstream in(joined);
  std::string part;
  while (std::getline(in, part, '/')) {
    if (part.empty() || part == ".") continue;
    if (part == ".." && !parts.empty() && parts.back() != "..") {
      parts.pop_back();
      continue;
    }
    parts.push_back(part);
  }
  std::string out = absolute ? "/" : "";
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out.push_back('/');
    out += parts[i];
  }
  return out;
}

struct FetchCommand {
  VcsKind vcs;
  std::string url;
  std::string dest;
  size_t command_index;
};

// Positional arguments of a VCS subcommand, skipping options and the values
// of options that take one.
std::vector<std::string> Positionals(std::span<const ShellWord> words,
                                     size_t start,
                                     std::span<const std::string_view> valued) {
  std::vector<std::string> out;
  for (size_t i = start; i < words.size(); ++i) {
    const std::string &w = words[i].text;
    if (w == "--") {
      for (++i; i < words.size(); ++i) out.push_back(words[i].text);
      break;
    }
    if (w.size() > 1 && w.front() == '-') {
      if (w.find('=') == std::string::npos &&
          std::find(valued.begin(), valued.end(), w) != valued.end()) {
        ++i;
      }
      continue;
    }
    out.push_back(w);
  }
  return out;
}

std::optional<FetchCommand> RecognizeFetch(const ShellCommand &cmd,
                                           size_t index,
                                           std::string_view cwd) {
  const auto &w = cmd.words;
  if (w.empty()) return std::nullopt;
  const std::string &tool = w[0].text;
  std::string dir(cwd);
  size_t i = 1;
  if (tool == "git") {
    static constexpr std::string_view kValued[] = {
        "--depth",     "-b",          "--branch",       "-o",
        "--origin",    "-c",          "--config",       "--reference",
        "--reference-if-able",        "-j",             "--jobs",
        "--filter",    "--separate-git-dir",            "--template",
        "--shallow-since",            "--shallow-exclude", "-u",
        "--upload-pack",              "--server-option", "--bundle-uri"};
    while (i < w.size() && w[i].text.starts_with("-")) {
      if (w[i].text == "-C" && i + 1 < w.size()) {
        dir = JoinPath(dir, w[i + 1].text);
        i += 2;
      } else if (w[i].text == "-c" && i + 1 < w.size()) {
        i += 2;
      } else {
        ++i;
      }
    }
    if (i >= w.size() || w[i].text != "clone") return std::nullopt;
    auto pos = Positionals(w, i + 1, kValued);
    if (pos.empty()) return std::nullopt;
    std::string dest = pos.size() > 1 ? pos[1] : UrlBasename(pos[0]);
    return FetchCommand{VcsKind::kGit, pos[0], JoinPath(dir, dest), index};
  }
  if (tool == "hg") {
    static constexpr std::string_view kValued[] = {
        "-r", "--rev", "-b", "--branch", "-u", "--updaterev", "-e",
        "--ssh", "--remotecmd", "--config", "--cwd", "-R", "--repository"};
    while (i < w.size() && w[i].text.starts_with("-")) {
      const bool valued = std::find(std::begin(kValued), std::end(kValued),
                                    w[i].text) != std::end(kValued);
      i += valued ? 2 : 1;
    }
    if (i >= w.size() || w[i].text != "clone") return std::nullopt;
    auto pos = Positionals(w, i + 1, kValued);
    if (pos.empty()) return std::nullopt;
    std::string dest = pos.size() > 1 ? pos[1] : UrlBasename(pos[0]);
    return FetchCommand{VcsKind::kMercurial, pos[0], JoinPath(dir, dest),
                        index};
  }
  if (tool == "svn") {
    static constexpr std::string_view kValued[] = {
        "-r", "--revision", "--depth", "--username", "--password",
        "--config-dir", "--config-option", "--set-depth"};
    while (i < w.size() && w[i].text.starts_with("-")) {
      const bool valued = std::find(std::begin(kValued), std::end(kValued),
                                    w[i].text) != std::end(kValued);
      i += valued ? 2 : 1;
    }
    if (i >= w.size() || (w[i].text != "checkout" && w[i].text != "co")) {
      return std::nullopt;
    }
    auto pos = Positionals(w, i + 1, kValued);
    if (pos.empty()) return std::nullopt;
    std::string url = pos[0];
    std::string dest = pos.size() > 1 ? pos[1] : UrlBasename(url);
    if (const size_t at = url.rfind('@');
        at != std::string::npos && at > url.rfind('/')) {
      url.resize(at);
    }
    return FetchCommand{VcsKind::kSvn, url, JoinPath(dir, dest), index};
  }
  return std::nullopt;
}

std::vector<FetchCommand> FetchCommandsIn(const Directive &d) {
  std::vector<FetchCommand> out;
  if (d.kind != DirectiveKind::kRun) return out;
  std::vector<ShellCommand> commands;
  try {
    commands = SplitShellCommands(d.Body());
  } catch (const Error &) {
    return out;
  }
  std::string cwd;
  for (size_t i = 0; i < commands.size(); ++i) {
    const auto &w = commands[i].words;
    if (w[0].text == "cd") {
      cwd = w.size() > 1 ? JoinPath(cwd, w[1].text) : "";
      continue;
    }
    if (auto fetch = RecognizeFetch(commands[i], i, cwd)) {
      out.push_back(std::move(*fetch));
    }
  }
  return out;
}

struct LocatedPoint {
  FetchPoint point;
  size_t command_index;
};

std::vector<LocatedPoint> Locate(const BuildSpec &spec,
                                 std::span<const DependencyPin> pins,
                                 std::vector<bool> &matched) {
  std::vector<LocatedPoint> out;
  matched.assign(pins.size(), false);
  for (size_t d = 0; d < spec.directives.size(); ++d) {
    for (const FetchCommand &fetch : FetchCommandsIn(spec.directives[d])) {
      for (size_t p = 0; p < pins.size(); ++p) {
        if (!SameRepository(pins[p].url, fetch.url)) continue;
        matched[p] = true;
        out.push_back({FetchPoint{d, fetch.vcs, fetch.url, fetch.dest, p},
                       fetch.command_index});
      }
    }
  }
  return out;
}

}  // namespace

std::string Directive::Keyword() const {
  std::string_view t = text;
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) {
    t.remove_prefix(1);
  }
  if (t.empty() || t.front() == '#' || t.front() == '\r' || t.front() == '\n') {
    return "";
  }
  size_t end = 0;
  while (end < t.size() && !std::isspace(static_cast<unsigned char>(t[end]))) {
    ++end;
  }
  std::string kw(t.substr(0, end));
  for (char &c : kw) c = static_cast<char>(std::toupper(c));
  return kw;
}

std::string_view Directive::Body() const {
  std::string_view t = text;
  size_t i = 0;
  while (i < t.size() && (t[i] == ' ' || t[i] == '\t')) ++i;
  while (i < t.size() && !std::isspace(static_cast<unsigned char>(t[i]))) ++i;
  while (i < t.size() && (t[i] == ' ' || t[i] == '\t')) ++i;
  return t.substr(i);
}

void BuildSpec::Renumber() {
  int line = 1;
  for (Directive &d : directives) {
    d.first_line = line;
    line += static_cast<int>(std::count(d.text.begin(), d.text.end(), '\n'));
    d.last_line = line;
    ++line;
  }
}

BuildSpec ParseBuildSpec(std::string_view text, std::string origin) {
  BuildSpec spec;
  spec.origin = std::move(origin);
  spec.trailing_newline = !text.empty() && text.back() == '\n';
  if (text.empty()) return spec;
  std::string_view body = text;
  if (spec.trailing_newline) body.remove_suffix(1);
  const std::vector<std::string> lines = SplitLines(body);
  // SplitLines drops a final empty segment; "a\n\n" must keep its blank line.
  std::vector<std::string> all = lines;
  if (!body.empty() && body.back() == '\n') all.emplace_back();
  if (body.empty()) all.emplace_back();

  size_t i = 0;
  while (i < all.size()) {
    Directive d;
    d.first_line = static_cast<int>(i) + 1;
    d.text = all[i];
    if (IsBlankOrComment(all[i])) {
      d.kind = DirectiveKind::kOther;
      d.last_line = d.first_line;
      spec.directives.push_back(std::move(d));
      ++i;
      continue;
    }
    bool continued = EndsWithContinuation(all[i]);
    ++i;
    while (continued) {
      if (i >= all.size()) {
        throw Error(ErrorCode::kParseError,
                    "line " + std::to_string(d.first_line) +
                        ": unterminated line continuation");
      }
      d.text += '\n';
      d.text += all[i];
      if (!IsBlankOrComment(all[i])) continued = EndsWithContinuation(all[i]);
      ++i;
    }
    d.last_line = static_cast<int>(i);
    d.kind = KindOf(d.Keyword());
    spec.directives.push_back(std::move(d));
  }
  return spec;
}

std::string SerializeBuildSpec(const BuildSpec &spec) {
  std::string out;
  for (size_t i = 0; i < spec.directives.size(); ++i) {
    if (i > 0) out += '\n';
    out += spec.directives[i].text;
  }
  if (spec.trailing_newline && !spec.directives.empty()) out += '\n';
  return out;
}

FetchPointScan LocateFetchPoints(const BuildSpec &spec,
                                 std::span<const DependencyPin> pins) {
  std::vector<bool> matched;
  FetchPointScan scan;
  for (LocatedPoint &lp : Locate(spec, pins, matched)) {
    scan.points.push_back(std::move(lp.point));
  }
  for (size_t p = 0; p < pins.size(); ++p) {
    if (!matched[p]) scan.unmatched.push_back(pins[p]);
  }
  return scan;
}

std::string RollbackCommand(VcsKind vcs, std::string_view dest_dir,
                            std::string_view revision) {
  const std::string dest = ShellQuote(dest_dir);
  const std::string rev = ShellQuote(revision);
  switch (vcs) {
    case VcsKind::kGit: return "git -C " + dest + " checkout " + rev;
    case VcsKind::kMercurial: return "hg -R " + dest + " update -r " + rev;
    case VcsKind::kSvn: return "svn update -r " + rev + " " + dest;
  }
  return "";
}

PinResult PinRevisions(const BuildSpec &spec,
                       std::span<const DependencyPin> pins) {
  std::vector<bool> matched;
  std::vector<LocatedPoint> located = Locate(spec, pins, matched);
  std::set<std::pair<size_t, size_t>> seen;
  for (const LocatedPoint &lp : located) {
    if (!seen.emplace(lp.point.directive_index, lp.command_index).second) {
      throw Error(ErrorCode::kAmbiguousPin,
                  "directive " + std::to_string(lp.point.directive_index) +
                      " (" + lp.point.url + ")");
    }
  }

  PinResult result;
  result.spec.origin = spec.origin;
  result.spec.trailing_newline = spec.trailing_newline;
  size_t next = 0;
  for (size_t d = 0; d < spec.directives.size(); ++d) {
    result.spec.directives.push_back(spec.directives[d]);
    for (; next < located.size() && located[next].point.directive_index == d;
         ++next) {
      const FetchPoint &fp = located[next].point;
      const DependencyPin &pin = pins[fp.pin_index];
      Directive rollback;
      rollback.kind = DirectiveKind::kRun;
      rollback.text =
          "RUN " + RollbackCommand(fp.vcs, fp.dest_dir, pin.revision);
      result.edits.push_back(PinEdit{d, result.spec.directives.size(),
                                     rollback.text, pin});
      result.spec.directives.push_back(std::move(rollback));
    }
  }
  result.spec.Renumber();
  for (size_t p = 0; p < pins.size(); ++p) {
    if (!matched[p]) result.unmatched.push_back(pins[p]);
  }
  return result;
}

BuildSpec StripPinEdits(const BuildSpec &pinned,
                        std::span<const PinEdit> edits) {
  std::set<size_t> inserted;
  for (const PinEdit &e : edits) inserted.insert(e.inserted_at);
  BuildSpec out;
  out.origin = pinned.origin;
  out.trailing_newline = pinned.trailing_newline;
  for (size_t i = 0; i < pinned.directives.size(); ++i) {
    if (!inserted.contains(i)) out.directives.push_back(pinned.directives[i]);
  }
  out.Renumber();
  return out;
}

std::string RenderPinLog(const BuildSpec &original,
                         std::span<const PinEdit> edits) {
  const std::string name = original.origin.empty() ? "Dockerfile"
                                                   : original.origin;
  std::ostringstream out;
  out << "--- a/" << name << "\n+++ b/" << name << "\n";
  // Inserted directives are single lines, so the new line number is the
  // anchor's last line plus the number of rollbacks placed before it.
  size_t shift = 0;
  for (const PinEdit &e : edits) {
    const int anchor = original.directives.at(e.insert_after).last_line;
    ++shift;
    out << "@@ -" << anchor << ",0 +" << anchor + static_cast<int>(shift)
        << " @@ " << e.pin.path << " " << VcsKindName(e.pin.vcs) << " "
        << e.pin.revision << "\n+" << e.command_text << "\n";
  }
  return out.str();
}

const CommitInfo &ResolveCommitByTimestamp(std::span<const CommitInfo> history,
                                           Timestamp query) {
  auto it = std::upper_bound(
      history.begin(), history.end(), query,
      [](Timestamp q, const CommitInfo &c) { return q < c.time; });
  if (it == history.begin()) {
    throw Error(ErrorCode::kNoCommitBefore, FormatIso8601(query));
  }
  return *(it - 1);
}

}  // namespace vulnrepro
