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

#include "vulnrepro/error.h"

#include <string>
#include <utility>

namespace vulnrepro {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kMissingPoC: return "MissingPoC";
    case ErrorCode::kDigestMismatch: return "DigestMismatch";
    case ErrorCode::kMainProjectMissing: return "MainProjectMissing";
    case ErrorCode::kMissingSrcMap: return "MissingSrcMap";
    case ErrorCode::kUnsupportedVcs: return "UnsupportedVcs";
    case ErrorCode::kAmbiguousPin: return "AmbiguousPin";
    case ErrorCode::kNoCommitBefore: return "NoCommitBefore";
    case ErrorCode::kRuleApplicationError: return "RuleApplicationError";
    case ErrorCode::kEnvironmentError: return "EnvironmentError";
    case ErrorCode::kPatchApplyError: return "PatchApplyError";
    case ErrorCode::kNoCandidates: return "NoCandidates";
    case ErrorCode::kBundleIncomplete: return "BundleIncomplete";
    case ErrorCode::kEmptyStats: return "EmptyStats";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string detail)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + detail),
      code_(code),
      detail_(std::move(detail)) {}

}  // namespace vulnrepro
