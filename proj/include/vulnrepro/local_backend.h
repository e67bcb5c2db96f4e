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

// Runs a build file on the host, without a container. Each workspace gets
//
//   <root>/<workspace_id>/src    $SRC, initial working directory
//   <root>/<workspace_id>/out    $OUT, where build.sh leaves the binaries
//   <root>/<workspace_id>/work   $WORK, scratch space and PoC files
//
// RUN bodies go to /bin/bash -c with the accumulated ENV. WORKDIR, COPY and
// ADD paths under /src, /out and /work are mapped into the workspace; other
// instructions (FROM, ARG, ...) are ignored. After the directives, the
// optional patch is applied to the main project checkout and
// `bash $SRC/build.sh` runs in the last working directory with CC and CXX set.

#ifndef VULNREPRO_LOCAL_BACKEND_H_
#define VULNREPRO_LOCAL_BACKEND_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "vulnrepro/executor.h"

namespace vulnrepro {

struct LocalBackendConfig {
  std::filesystem::path workspace_root;
  std::string cc = "cc";
  std::string cxx = "c++";
  std::chrono::seconds run_timeout{60};
  std::chrono::seconds build_timeout{1800};
};

class LocalBackend : public ExecutionBackend {
 public:
  explicit LocalBackend(LocalBackendConfig config);

  std::string_view name() const override { return "local"; }
  BuildOutcome Build(const BuildRequest &req) override;
  // Artifacts built by an earlier process are found through the workspace.
  RunOutcome RunPoc(std::string_view artifact_id,
                    std::span<const uint8_t> poc) override;

  const LocalBackendConfig &config() const { return config_; }
  std::filesystem::path WorkspaceDir(std::string_view workspace_id) const;

 private:
  struct Artifact {
    std::filesystem::path workspace;
    std::vector<std::string> run_command;
  };

  std::optional<Artifact> FindArtifact(std::string_view artifact_id);

  LocalBackendConfig config_;
  std::mutex mu_;
  std::map<std::string, Artifact, std::less<>> artifacts_;
};

// Rewrites a container path ("/src/x", "$OUT/fuzzer", "${SRC}") into the
// workspace. Other absolute paths are returned unchanged; relative paths are
// resolved against `cwd`.
std::filesystem::path MapWorkspacePath(const std::filesystem::path &workspace,
                                       const std::filesystem::path &cwd,
                                       std::string_view path);

}  // namespace vulnrepro

#endif  // VULNREPRO_LOCAL_BACKEND_H_
