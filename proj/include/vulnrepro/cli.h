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

// Command-line driver.
//
//   vulnrepro <ingest|reproduce|locate-fix|audit|stats|emit|compare> [flags]
//
// Per-issue results are written to <out>/<subcommand>/<local_id>.json; an
// existing result file marks the issue done and it is skipped unless --force.
// Bundles go to <out>/bundles/<local_id>/.
//
// Settings resolve as flags > VULNREPRO_<NAME> environment variables > the
// JSON config file (--config or VULNREPRO_CONFIG) > defaults.
//
// Exit codes: 0 every selected issue succeeded, 1 some failed, 2 usage,
// configuration or environment error.

#ifndef VULNREPRO_CLI_H_
#define VULNREPRO_CLI_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace vulnrepro {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

inline constexpr std::string_view kEnvPrefix = "VULNREPRO_";

using Environment = std::map<std::string, std::string>;

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path workspace;  // default <out>/workspace
  std::string backend = "sim";      // sim | local | container
  int jobs = 1;
  int timeout_seconds = 60;         // PoC run timeout
  std::filesystem::path rules;      // default <corpus>/rules.txt
  std::filesystem::path out = "vulnrepro-out";
  std::filesystem::path external;   // compare: {"<local_id>": "<commit>"}
};

// The settings keys, shared by flags, environment and config file.
std::span<const std::string_view> ConfigKeys();

// `flags` holds the settings given on the command line, keyed as in
// ConfigKeys(). Throws kInvalidArgument on unknown config keys, bad numbers,
// jobs < 1, timeout < 1, an unknown backend or a missing corpus.
RunConfig ResolveRunConfig(const std::map<std::string, std::string> &flags,
                           const Environment &env);

// Exclusive advisory lock on <root>/.lock, held for the object's lifetime.
class OutputLock {
 public:
  // nullopt when another holder has the lock.
  static std::optional<OutputLock> TryAcquire(const std::filesystem::path &root);

  OutputLock(OutputLock &&other) noexcept;
  OutputLock &operator=(OutputLock &&other) noexcept;
  OutputLock(const OutputLock &) = delete;
  OutputLock &operator=(const OutputLock &) = delete;
  ~OutputLock();

 private:
  explicit OutputLock(int fd) : fd_(fd) {}
  int fd_ = -1;
};

// args excludes the program name.
int RunCommand(std::span<const std::string> args, std::ostream &out,
               std::ostream &err, const Environment &env);
int RunCommand(std::span<const std::string> args, std::ostream &out,
               std::ostream &err);

}  // namespace vulnrepro

#endif  // VULNREPRO_CLI_H_
