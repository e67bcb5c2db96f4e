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

// Builds inside the project's archived builder image with the docker CLI.
// The pinned build file becomes the image's Dockerfile; `compile` runs in a
// container with $OUT bind-mounted from the workspace, and the PoC runs in
// the runner image against that $OUT.

#ifndef VULNREPRO_CONTAINER_BACKEND_H_
#define VULNREPRO_CONTAINER_BACKEND_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "vulnrepro/executor.h"

namespace vulnrepro {

struct ContainerBackendConfig {
  std::filesystem::path workspace_root;
  std::string docker = "docker";
  std::string image_prefix = "vulnrepro";
  std::string runner_image = "gcr.io/oss-fuzz-base/base-runner";
  std::chrono::seconds run_timeout{60};
  std::chrono::seconds build_timeout{3600};
};

// Pure command assembly, separated for testing.
std::vector<std::string> DockerBuildCommand(const ContainerBackendConfig &c,
                                            const std::string &tag,
                                            const std::filesystem::path &context);
std::vector<std::string> DockerCompileCommand(
    const ContainerBackendConfig &c, const std::string &tag,
    const std::filesystem::path &out_dir, const std::string &main_path,
    bool with_patch, const std::filesystem::path &patch_file);
std::vector<std::string> DockerRunPocCommand(
    const ContainerBackendConfig &c, const std::filesystem::path &out_dir,
    const std::filesystem::path &testcase,
    const std::vector<std::string> &run_command);

class ContainerBackend : public ExecutionBackend {
 public:
  explicit ContainerBackend(ContainerBackendConfig config);

  std::string_view name() const override { return "container"; }
  BuildOutcome Build(const BuildRequest &req) override;
  RunOutcome RunPoc(std::string_view artifact_id,
                    std::span<const uint8_t> poc) override;

 private:
  struct Artifact {
    std::filesystem::path workspace;
    std::vector<std::string> run_command;
  };

  ContainerBackendConfig config_;
  std::mutex mu_;
  std::map<std::string, Artifact, std::less<>> artifacts_;
};

}  // namespace vulnrepro

#endif  // VULNREPRO_CONTAINER_BACKEND_H_
