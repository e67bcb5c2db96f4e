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

#ifndef VULNREPRO_SUBPROCESS_H_
#define VULNREPRO_SUBPROCESS_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vulnrepro {

struct ProcessOptions {
  std::filesystem::path cwd;  // empty: inherit
  // Replaces the environment when set.
  std::optional<std::map<std::string, std::string>> env;
  std::chrono::milliseconds timeout{0};  // 0: no limit
  size_t output_limit = 8 << 20;         // per stream, excess dropped
};

struct ProcessResult {
  int exit_code = -1;       // valid when !signaled && !timed_out
  int term_signal = 0;      // valid when signaled
  bool signaled = false;
  bool timed_out = false;   // the whole process group was killed
  std::string out;
  std::string err;
  std::chrono::duration<double> elapsed{0};

  bool ok() const { return !signaled && !timed_out && exit_code == 0; }
  std::string combined() const { return out + err; }
};

// Runs argv[0] (PATH lookup) in its own process group. Throws
// Error(kEnvironmentError) if the program cannot be executed.
ProcessResult RunProcess(const std::vector<std::string> &argv,
                         const ProcessOptions &options = {});

// PATH lookup without running anything.
std::optional<std::filesystem::path> FindProgram(const std::string &name);

// The current environment as a map.
std::map<std::string, std::string> CurrentEnvironment();

}  // namespace vulnrepro

#endif  // VULNREPRO_SUBPROCESS_H_
