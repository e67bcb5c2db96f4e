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

#ifndef VULNREPRO_ERROR_H_
#define VULNREPRO_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace vulnrepro {

// Every failure the library reports through an exception carries one of
// these codes. Outcomes that are part of normal pipeline flow (a build that
// does not compile, a PoC that does not crash) are values, not errors.
enum class ErrorCode {
  kParseError,
  kMissingPoC,
  kDigestMismatch,
  kMainProjectMissing,
  kMissingSrcMap,
  kUnsupportedVcs,
  kAmbiguousPin,
  kNoCommitBefore,
  kRuleApplicationError,
  kEnvironmentError,
  kPatchApplyError,
  kNoCandidates,
  kBundleIncomplete,
  kEmptyStats,
  kNotFound,
  kIoError,
  kInvalidArgument,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string detail);

  ErrorCode code() const { return code_; }
  // The offending field, path, rule id, ... without the code prefix.
  const std::string &detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace vulnrepro

#endif  // VULNREPRO_ERROR_H_
