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

#include "vulnrepro/local_backend.h"

#include <fnmatch.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <string>
#include <vector>

#include "vulnrepro/error.h"
#include "vulnrepro/resources.h"
#include "vulnrepro/shell_words.h"
#include "vulnrepro/subprocess.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace fs = std::filesystem;

namespace {

using Env = std::map<std::string, std::string>;

constexpr std::string_view kMappedRoots[] = {"src", "out", "work"};

bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// $NAME and ${NAME}; unknown names expand to nothing, as in the shell.
std::string ExpandVars(std::string_view s, const Env &env) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '$' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    size_t begin = i + 1, end;
    if (s[begin] == '{') {
      end = s.find('}', begin);
      if (end == std::string_view::npos) {
        out += s.substr(i);
        break;
      }
      const auto it = env.find(std::string(s.substr(begin + 1, end - begin - 1)));
      if (it != env.end()) out += it->second;
      i = end;
      continue;
    }
    end = begin;
    while (end < s.size() && IsNameChar(s[end])) ++end;
    if (end == begin) {
      out += '$';
      continue;
    }
    const auto it = env.find(std::string(s.substr(begin, end - begin)));
    if (it != env.end()) out += it->second;
    i = end - 1;
  }
  return out;
}

std::vector<std::string> Words(std::string_view body) {
  std::vector<std::string> words;
  for (const ShellCommand &cmd : SplitShellCommands(body)) {
    for (const ShellWord &w : cmd.words) words.push_back(w.text);
  }
  return words;
}

void CheckWorkspaceId(std::string_view id) {
  if (id.empty() || id == "." || id == ".." ||
      id.find('/') != std::string_view::npos) {
    throw Error(ErrorCode::kInvalidArgument,
                "workspace id: " + std::string(id));
  }
}

void CopyInto(const fs::path &from, const fs::path &to) {
  if (fs::is_directory(from)) {
    fs::create_directories(to);
    fs::copy(from, to,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  } else {
    if (to.has_parent_path()) fs::create_directories(to.parent_path());
    fs::copy_file(from, to, fs::copy_options::overwrite_existing);
  }
}

// COPY/ADD sources, relative to the build context; '*' globs in the last
// path component are expanded.
std::vector<fs::path> ExpandSources(const fs::path &context,
                                    std::string_view source) {
  const fs::path rel(source);
  const fs::path base = context / rel.parent_path();
  const std::string leaf = rel.filename().string();
  if (leaf.find_first_of("*?[") == std::string::npos) {
    return {context / rel};
  }
  std::vector<fs::path> out;
  if (!fs::is_directory(base)) return out;
  for (const auto &e : fs::directory_iterator(base)) {
    if (::fnmatch(leaf.c_str(), e.path().filename().c_str(), 0) == 0) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Tail(const std::string &s, size_t n) {
  return s.size() > n ? s.substr(s.size() - n) : s;
}

}  // namespace

fs::path MapWorkspacePath(const fs::path &workspace, const fs::path &cwd,
                          std::string_view path) {
  for (std::string_view root : kMappedRoots) {
    std::string upper(root);
    for (char &c : upper) c = static_cast<char>(std::toupper(c));
    for (const std::string &prefix :
         {"/" + std::string(root), "$" + upper, "${" + upper + "}"}) {
      if (!path.starts_with(prefix)) continue;
      std::string_view rest = path.substr(prefix.size());
      if (!rest.empty() && rest.front() != '/') continue;
      while (!rest.empty() && rest.front() == '/') rest.remove_prefix(1);
      fs::path mapped = workspace / root;
      if (!rest.empty()) mapped /= rest;
      return mapped;
    }
  }
  if (!path.empty() && path.front() == '/') return fs::path(path);
  return cwd / path;
}

LocalBackend::LocalBackend(LocalBackendConfig config)
    : config_(std::move(config)) {
  if (config_.workspace_root.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "local backend: workspace root");
  }
  config_.workspace_root = fs::absolute(config_.workspace_root);
}

fs::path LocalBackend::WorkspaceDir(std::string_view workspace_id) const {
  CheckWorkspaceId(workspace_id);
  return config_.workspace_root / workspace_id;
}

BuildOutcome LocalBackend::Build(const BuildRequest &req) {
  for (const std::string &tool : {std::string("bash"), std::string("git"),
                                  config_.cc, config_.cxx}) {
    if (!FindProgram(tool)) {
      throw Error(ErrorCode::kEnvironmentError, "toolchain missing: " + tool);
    }
  }
  const fs::path ws = WorkspaceDir(req.workspace_id);
  std::error_code ec;
  fs::remove_all(ws, ec);
  for (std::string_view root : kMappedRoots) fs::create_directories(ws / root);

  const auto start = std::chrono::steady_clock::now();
  BuildOutcome out;
  auto finish = [&](BuildOutcome::Status status) {
    out.status = status;
    out.duration_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    return out;
  };

  Env env = CurrentEnvironment();
  env["SRC"] = (ws / "src").string();
  env["OUT"] = (ws / "out").string();
  env["WORK"] = (ws / "work").string();
  env["CC"] = config_.cc;
  env["CXX"] = config_.cxx;
  env["GIT_TERMINAL_PROMPT"] = "0";
  fs::path cwd = ws / "src";

  ProcessOptions opts;
  opts.timeout = config_.build_timeout;

  const size_t n = req.spec.directives.size();
  for (size_t i = 0; i < n; ++i) {
    const Directive &d = req.spec.directives[i];
    switch (d.kind) {
      case DirectiveKind::kOther:
        continue;
      case DirectiveKind::kEnv: {
        const std::vector<std::string> words = Words(d.Body());
        if (words.empty()) continue;
        if (words[0].find('=') == std::string::npos) {
          // ENV KEY value with spaces
          std::string_view body = Trim(d.Body());
          const size_t sp = body.find_first_of(" \t");
          if (sp != std::string_view::npos) {
            env[words[0]] = ExpandVars(Trim(body.substr(sp)), env);
          }
          continue;
        }
        for (const std::string &w : words) {
          const size_t eq = w.find('=');
          if (eq == std::string::npos) continue;
          env[w.substr(0, eq)] = ExpandVars(w.substr(eq + 1), env);
        }
        continue;
      }
      case DirectiveKind::kWorkdir: {
        const std::vector<std::string> words = Words(d.Body());
        if (words.empty()) continue;
        cwd = MapWorkspacePath(ws, cwd, ExpandVars(words[0], env));
        fs::create_directories(cwd);
        continue;
      }
      case DirectiveKind::kCopy: {
        std::vector<std::string> words;
        for (std::string &w : Words(d.Body())) {
          if (!w.starts_with("--")) words.push_back(std::move(w));
        }
        if (words.size() < 2) continue;
        const std::string dest_text = ExpandVars(words.back(), env);
        const fs::path dest = MapWorkspacePath(ws, cwd, dest_text);
        std::vector<fs::path> sources;
        for (size_t w = 0; w + 1 < words.size(); ++w) {
          for (fs::path &p : ExpandSources(req.context_dir, words[w])) {
            sources.push_back(std::move(p));
          }
        }
        const bool into_dir = dest_text.ends_with('/') || sources.size() > 1 ||
                              fs::is_directory(dest);
        out.log += "Step " + std::to_string(i) + ": " + d.text + "\n";
        try {
          for (const fs::path &src : sources) {
            if (!fs::exists(src)) {
              out.log += "COPY failed: " + src.string() + " not found\n";
              return finish(BuildOutcome::Status::kCompileError);
            }
            if (into_dir && !fs::is_directory(src)) {
              CopyInto(src, dest / src.filename());
            } else {
              CopyInto(src, dest);
            }
          }
        } catch (const fs::filesystem_error &e) {
          out.log += std::string("COPY failed: ") + e.what() + "\n";
          return finish(BuildOutcome::Status::kCompileError);
        }
        continue;
      }
      case DirectiveKind::kRun: {
        std::string_view body = Trim(d.Body());
        std::vector<std::string> argv;
        if (body.starts_with('[')) {
          try {
            argv = OrderedJson::parse(body).get<std::vector<std::string>>();
          } catch (const nlohmann::json::exception &) {
            argv = {"/bin/bash", "-c", std::string(body)};
          }
        } else {
          argv = {"/bin/bash", "-c", std::string(body)};
        }
        out.log += "Step " + std::to_string(i) + ": " + d.text + "\n";
        opts.cwd = cwd;
        opts.env = env;
        const ProcessResult r = RunProcess(argv, opts);
        const std::string step_log = r.combined();
        out.log += step_log;
        if (r.ok()) continue;
        if (r.timed_out) out.log += "step timed out\n";
        const std::vector<BrokenResource> broken =
            DetectBrokenResources(step_log, req.spec);
        if (!broken.empty()) {
          out.failed_url = broken.front().url;
          return finish(BuildOutcome::Status::kFetchError);
        }
        return finish(BuildOutcome::Status::kCompileError);
      }
    }
  }

  if (!req.patch.empty()) {
    const fs::path main_dir =
        MapWorkspacePath(ws, ws / "src", req.main_pin.path);
    if (!fs::is_directory(main_dir)) {
      throw Error(ErrorCode::kPatchApplyError,
                  "main checkout missing: " + main_dir.string());
    }
    const fs::path patch_file = ws / "work" / "candidate.patch";
    WriteFile(patch_file, req.patch);
    ProcessOptions git_opts;
    git_opts.cwd = main_dir;
    git_opts.timeout = std::chrono::seconds(60);
    ProcessResult check =
        RunProcess({"git", "apply", "--check", patch_file.string()}, git_opts);
    if (!check.ok()) throw Error(ErrorCode::kPatchApplyError, check.err);
    ProcessResult apply =
        RunProcess({"git", "apply", patch_file.string()}, git_opts);
    if (!apply.ok()) throw Error(ErrorCode::kPatchApplyError, apply.err);
    out.log += "applied patch (" + std::to_string(req.patch.size()) +
               " bytes) to " + req.main_pin.path + "\n";
  }

  const fs::path build_sh = ws / "src" / "build.sh";
  if (!fs::exists(build_sh)) {
    out.log += "build.sh not found in $SRC\n";
    return finish(BuildOutcome::Status::kCompileError);
  }
  out.log += "Step compile: bash $SRC/build.sh\n";
  opts.cwd = cwd;
  opts.env = env;
  const ProcessResult compile = RunProcess({"bash", build_sh.string()}, opts);
  out.log += compile.combined();
  if (!compile.ok()) {
    if (compile.timed_out) out.log += "compile timed out\n";
    return finish(BuildOutcome::Status::kCompileError);
  }

  // HEAD of every checkout under $SRC.
  ProcessOptions git_opts;
  git_opts.timeout = std::chrono::seconds(30);
  for (auto it = fs::recursive_directory_iterator(ws / "src");
       it != fs::recursive_directory_iterator(); ++it) {
    if (it.depth() > 3) {
      it.disable_recursion_pending();
      continue;
    }
    if (!it->is_directory()) continue;
    if (it->path().filename() == ".git") {
      it.disable_recursion_pending();
      continue;
    }
    if (!fs::exists(it->path() / ".git")) continue;
    git_opts.cwd = it->path();
    const ProcessResult head = RunProcess({"git", "rev-parse", "HEAD"}, git_opts);
    if (!head.ok()) continue;
    const std::string rel = fs::relative(it->path(), ws / "src").generic_string();
    out.checked_out["/src/" + rel] = std::string(Trim(head.out));
  }

  OrderedJson manifest;
  manifest["run_command"] = req.run_command;
  WriteFile(ws / "artifact.json", manifest.dump(2) + "\n");
  {
    std::lock_guard<std::mutex> lock(mu_);
    artifacts_[req.workspace_id] = Artifact{ws, req.run_command};
  }
  out.artifact_id = req.workspace_id;
  out.log = Tail(out.log, 1 << 20);
  return finish(BuildOutcome::Status::kSuccess);
}

std::optional<LocalBackend::Artifact> LocalBackend::FindArtifact(
    std::string_view artifact_id) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = artifacts_.find(artifact_id);
    if (it != artifacts_.end()) return it->second;
  }
  const fs::path ws = WorkspaceDir(artifact_id);
  if (!fs::exists(ws / "artifact.json")) return std::nullopt;
  Artifact a{ws, {}};
  try {
    a.run_command = OrderedJson::parse(ReadFile(ws / "artifact.json"))
                        .at("run_command")
                        .get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception &) {
    throw Error(ErrorCode::kParseError, (ws / "artifact.json").string());
  }
  std::lock_guard<std::mutex> lock(mu_);
  artifacts_.emplace(std::string(artifact_id), a);
  return a;
}

RunOutcome LocalBackend::RunPoc(std::string_view artifact_id,
                                std::span<const uint8_t> poc) {
  const std::optional<Artifact> art = FindArtifact(artifact_id);
  if (!art) throw Error(ErrorCode::kNotFound, "artifact " + std::string(artifact_id));
  if (art->run_command.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "artifact has no run command");
  }
  const fs::path testcase =
      art->workspace / "work" / ("testcase-" + Sha256Hex(poc).substr(0, 16));
  WriteBinaryFile(testcase, poc);

  // Map container paths first; the testcase path itself is host-absolute.
  std::vector<std::string> mapped;
  for (const std::string &word : art->run_command) {
    if (word.find(kPocPlaceholder) != std::string::npos) {
      mapped.push_back(word);
    } else if (word.starts_with('/') || word.starts_with('$')) {
      mapped.push_back(
          MapWorkspacePath(art->workspace, art->workspace / "out", word).string());
    } else {
      mapped.push_back(word);
    }
  }
  const std::vector<std::string> argv = SubstitutePoc(mapped, testcase.string());

  Env env = CurrentEnvironment();
  env["OUT"] = (art->workspace / "out").string();
  env["SRC"] = (art->workspace / "src").string();
  env["WORK"] = (art->workspace / "work").string();
  if (!env.contains("ASAN_OPTIONS")) env["ASAN_OPTIONS"] = "detect_leaks=0";
  ProcessOptions opts;
  opts.cwd = art->workspace / "out";
  opts.env = std::move(env);
  opts.timeout = config_.run_timeout;
  const ProcessResult r = RunProcess(argv, opts);
  RunOutcome run = ClassifyProcessExit(r.signaled, r.term_signal, r.exit_code,
                                       r.timed_out, r.err + r.out);
  run.duration_seconds = r.elapsed.count();
  return run;
}

}  // namespace vulnrepro
