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

#include "vulnrepro/container_backend.h"

#include <cctype>
#include <chrono>

#include "vulnrepro/error.h"
#include "vulnrepro/resources.h"
#include "vulnrepro/subprocess.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace fs = std::filesystem;

namespace {

// compile's exit status when the patch does not apply.
constexpr int kPatchExit = 86;
constexpr std::string_view kCheckoutMarker = "@@checkout ";
constexpr std::string_view kContainerPatch = "/vulnrepro.patch";

std::string LowerTag(std::string s) {
  for (char &c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' &&
        c != '.') {
      c = '-';
    }
  }
  return s;
}

}  // namespace

std::vector<std::string> DockerBuildCommand(const ContainerBackendConfig &c,
                                            const std::string &tag,
                                            const fs::path &context) {
  return {c.docker, "build", "--pull=false", "-t", tag,
          "-f", (context / "Dockerfile").string(), context.string()};
}

std::vector<std::string> DockerCompileCommand(
    const ContainerBackendConfig &c, const std::string &tag,
    const fs::path &out_dir, const std::string &main_path, bool with_patch,
    const fs::path &patch_file) {
  std::vector<std::string> cmd = {c.docker, "run", "--rm", "-v",
                                  out_dir.string() + ":/out"};
  std::string script;
  if (with_patch) {
    cmd.push_back("-v");
    cmd.push_back(patch_file.string() + ":" + std::string(kContainerPatch) +
                  ":ro");
    const std::string p(kContainerPatch);
    script += "cd " + ShellQuote(main_path) + " && { git apply --check " + p +
              " && git apply " + p + " || exit " + std::to_string(kPatchExit) +
              "; } && cd - >/dev/null && ";
  }
  script +=
      "compile && for d in $(find /src -maxdepth 4 -name .git -printf "
      "'%h\\n'); do echo \"" +
      std::string(kCheckoutMarker) + "$d $(git -C \"$d\" rev-parse HEAD)\"; done";
  cmd.push_back(tag);
  cmd.push_back("bash");
  cmd.push_back("-c");
  cmd.push_back(script);
  return cmd;
}

std::vector<std::string> DockerRunPocCommand(
    const ContainerBackendConfig &c, const fs::path &out_dir,
    const fs::path &testcase, const std::vector<std::string> &run_command) {
  std::vector<std::string> cmd = {
      c.docker, "run", "--rm", "-e", "ASAN_OPTIONS=detect_leaks=0", "-v",
      out_dir.string() + ":/out", "-v", testcase.string() + ":/testcase:ro",
      c.runner_image};
  for (const std::string &w : SubstitutePoc(run_command, "/testcase")) {
    cmd.push_back(w);
  }
  return cmd;
}

ContainerBackend::ContainerBackend(ContainerBackendConfig config)
    : config_(std::move(config)) {
  if (config_.workspace_root.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "container backend: workspace root");
  }
  config_.workspace_root = fs::absolute(config_.workspace_root);
}

BuildOutcome ContainerBackend::Build(const BuildRequest &req) {
  if (!FindProgram(config_.docker)) {
    throw Error(ErrorCode::kEnvironmentError,
                "container runtime missing: " + config_.docker);
  }
  if (req.workspace_id.empty() || req.workspace_id.find('/') != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "workspace id: " + req.workspace_id);
  }
  const auto start = std::chrono::steady_clock::now();
  const fs::path ws = config_.workspace_root / req.workspace_id;
  std::error_code ec;
  fs::remove_all(ws, ec);
  const fs::path context = ws / "context";
  fs::create_directories(context);
  fs::create_directories(ws / "out");
  if (!req.context_dir.empty() && fs::is_directory(req.context_dir)) {
    fs::copy(req.context_dir, context,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  }
  WriteFile(context / "Dockerfile", SerializeBuildSpec(req.spec));

  BuildOutcome out;
  auto finish = [&](BuildOutcome::Status status) {
    out.status = status;
    out.duration_seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - start)
                               .count();
    return out;
  };
  ProcessOptions opts;
  opts.timeout = config_.build_timeout;
  const std::string tag =
      config_.image_prefix + ":" + LowerTag(req.workspace_id);
  const ProcessResult image =
      RunProcess(DockerBuildCommand(config_, tag, context), opts);
  out.log = image.combined();
  if (!image.ok()) {
    const std::vector<BrokenResource> broken =
        DetectBrokenResources(out.log, req.spec);
    if (!broken.empty()) {
      out.failed_url = broken.front().url;
      return finish(BuildOutcome::Status::kFetchError);
    }
    return finish(BuildOutcome::Status::kCompileError);
  }

  const fs::path patch_file = ws / "candidate.patch";
  if (!req.patch.empty()) WriteFile(patch_file, req.patch);
  const ProcessResult compile = RunProcess(
      DockerCompileCommand(config_, tag, ws / "out", req.main_pin.path,
                           !req.patch.empty(), patch_file),
      opts);
  out.log += compile.combined();
  if (!compile.ok()) {
    if (!compile.signaled && compile.exit_code == kPatchExit) {
      throw Error(ErrorCode::kPatchApplyError, compile.err);
    }
    return finish(BuildOutcome::Status::kCompileError);
  }
  for (const std::string &line : SplitLines(compile.out)) {
    if (!line.starts_with(kCheckoutMarker)) continue;
    std::string_view rest = std::string_view(line).substr(kCheckoutMarker.size());
    const size_t sp = rest.rfind(' ');
    if (sp == std::string_view::npos) continue;
    out.checked_out[std::string(rest.substr(0, sp))] =
        std::string(Trim(rest.substr(sp + 1)));
  }
  {
    std::lock_guard<std::mutex> lock(mu_);
    artifacts_[req.workspace_id] = Artifact{ws, req.run_command};
  }
  out.artifact_id = req.workspace_id;
  return finish(BuildOutcome::Status::kSuccess);
}

RunOutcome ContainerBackend::RunPoc(std::string_view artifact_id,
                                    std::span<const uint8_t> poc) {
  Artifact art;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = artifacts_.find(artifact_id);
    if (it == artifacts_.end()) {
      throw Error(ErrorCode::kNotFound, "artifact " + std::string(artifact_id));
    }
    art = it->second;
  }
  if (!FindProgram(config_.docker)) {
    throw Error(ErrorCode::kEnvironmentError,
                "container runtime missing: " + config_.docker);
  }
  const fs::path testcase = art.workspace / "testcase";
  WriteBinaryFile(testcase, poc);
  ProcessOptions opts;
  opts.timeout = config_.run_timeout;
  const ProcessResult r = RunProcess(
      DockerRunPocCommand(config_, art.workspace / "out", testcase,
                          art.run_command),
      opts);
  // The docker client reports a signal death as 128 + signal.
  const bool signaled = !r.signaled && r.exit_code > 128 && r.exit_code < 160;
  RunOutcome run = ClassifyProcessExit(
      signaled || r.signaled, r.signaled ? r.term_signal : r.exit_code - 128,
      r.exit_code, r.timed_out, r.err + r.out);
  run.duration_seconds = r.elapsed.count();
  return run;
}

}  // namespace vulnrepro
