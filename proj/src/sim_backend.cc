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

#include "vulnrepro/sim_backend.h"

#include <algorithm>
#include <set>
#include <string>

#include "vulnrepro/error.h"
#include "vulnrepro/util.h"

namespace vulnrepro {

namespace {

const OrderedJson &Section(const OrderedJson &doc, const char *key) {
  static const OrderedJson kEmpty;
  auto it = doc.find(key);
  return it == doc.end() ? kEmpty : *it;
}

bool RevisionMatches(const OrderedJson &entry, std::string_view revision) {
  if (entry.contains("revision")) {
    return SameRevision(entry["revision"].get<std::string>(), revision);
  }
  if (entry.contains("revisions")) {
    for (const auto &r : entry["revisions"]) {
      if (SameRevision(r.get<std::string>(), revision)) return true;
    }
    return false;
  }
  return true;
}

bool PinsMatch(const OrderedJson &entry, const BuildRequest &req) {
  if (entry.contains("pins_fingerprint") &&
      entry["pins_fingerprint"].get<std::string>() !=
          PinsFingerprint(req.pins)) {
    return false;
  }
  if (!entry.contains("pins")) return true;
  for (const auto &[path, rev] : entry["pins"].items()) {
    auto it = std::find_if(req.pins.begin(), req.pins.end(),
                           [&](const DependencyPin &p) { return p.path == path; });
    if (it == req.pins.end() ||
        !SameRevision(it->revision, rev.get<std::string>())) {
      return false;
    }
  }
  return true;
}

bool RulesMatch(const OrderedJson &entry, const BuildRequest &req) {
  if (!entry.contains("rules")) return true;
  std::set<std::string> want;
  for (const auto &r : entry["rules"]) want.insert(r.get<std::string>());
  return want == std::set<std::string>(req.applied_rules.begin(),
                                       req.applied_rules.end());
}

bool PatchMatches(const OrderedJson &entry, const BuildRequest &req) {
  if (!entry.contains("patch")) return req.patch.empty();
  return entry["patch"].get<std::string>() == "sha256:" + Sha256Hex(req.patch);
}

}  // namespace

std::string PinsFingerprint(std::span<const DependencyPin> pins) {
  std::vector<std::string> lines;
  for (const DependencyPin &p : pins) lines.push_back(p.path + "=" + p.revision);
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const std::string &l : lines) joined += l + "\n";
  return "sha256:" + Sha256Hex(joined);
}

SimBackend::SimBackend(OrderedJson manifest) : manifest_(std::move(manifest)) {
  if (!manifest_.is_object()) {
    throw Error(ErrorCode::kParseError, "sim manifest: expected object");
  }
  for (const char *key : {"builds", "dead_urls"}) {
    if (manifest_.contains(key) && !manifest_[key].is_array()) {
      throw Error(ErrorCode::kParseError, std::string("sim manifest: ") + key);
    }
  }
  for (const char *key : {"runs", "prebuilt"}) {
    if (manifest_.contains(key) && !manifest_[key].is_object()) {
      throw Error(ErrorCode::kParseError, std::string("sim manifest: ") + key);
    }
  }
  if (manifest_.contains("builds")) {
    for (size_t i = 0; i < manifest_["builds"].size(); ++i) {
      const OrderedJson &b = manifest_["builds"][i];
      if (!b.is_object() || !b.contains("outcome") ||
          !b["outcome"].contains("status")) {
        throw Error(ErrorCode::kParseError,
                    "sim manifest: builds[" + std::to_string(i) + "].outcome");
      }
    }
  }
}

SimBackend SimBackend::Load(const std::filesystem::path &path) {
  try {
    return SimBackend(OrderedJson::parse(ReadFile(path)));
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

BuildOutcome SimBackend::Build(const BuildRequest &req) {
  BuildOutcome out;
  const std::string spec_text = SerializeBuildSpec(req.spec);
  for (const auto &dead : Section(manifest_, "dead_urls")) {
    const std::string url = dead.get<std::string>();
    if (spec_text.find(url) == std::string::npos) continue;
    out.status = BuildOutcome::Status::kFetchError;
    out.failed_url = url;
    out.log = "fatal: unable to access '" + url +
              "/': Could not resolve host: " + url + "\n";
    return out;
  }

  for (const auto &entry : Section(manifest_, "builds")) {
    if (!RevisionMatches(entry, req.main_pin.revision) ||
        !PinsMatch(entry, req) || !RulesMatch(entry, req) ||
        !PatchMatches(entry, req)) {
      continue;
    }
    const OrderedJson &o = entry["outcome"];
    const std::string status = o["status"].get<std::string>();
    out.log = o.value("log", "");
    out.duration_seconds = o.value("duration", 0.0);
    if (status == "success") {
      out.status = BuildOutcome::Status::kSuccess;
      out.artifact_id = o.value("artifact", req.main_pin.revision);
      if (o.contains("checked_out")) {
        out.checked_out =
            o["checked_out"].get<std::map<std::string, std::string>>();
      } else {
        for (const DependencyPin &p : req.pins) {
          out.checked_out[p.path] = p.revision;
        }
        out.checked_out[req.main_pin.path] = req.main_pin.revision;
      }
    } else if (status == "compile_error") {
      out.status = BuildOutcome::Status::kCompileError;
    } else if (status == "fetch_error") {
      out.status = BuildOutcome::Status::kFetchError;
      out.failed_url = o.value("url", "");
    } else if (status == "patch_error") {
      throw Error(ErrorCode::kPatchApplyError, out.log);
    } else {
      throw Error(ErrorCode::kParseError, "sim manifest: status " + status);
    }
    return out;
  }
  out.status = BuildOutcome::Status::kCompileError;
  out.log = "unscripted";
  return out;
}

RunOutcome SimBackend::RunPoc(std::string_view artifact_id,
                              std::span<const uint8_t> poc) {
  (void)poc;
  const OrderedJson &runs = Section(manifest_, "runs");
  auto it = runs.find(std::string(artifact_id));
  if (it == runs.end()) {
    throw Error(ErrorCode::kNotFound, "artifact " + std::string(artifact_id));
  }
  const OrderedJson &r = *it;
  RunOutcome run;
  const std::string status = r.value("status", "clean");
  run.exit_code = r.value("exit_code", 0);
  run.duration_seconds = r.value("duration", 0.0);
  run.output = r.value("output", "");
  if (status == "crash") {
    run.status = RunOutcome::Status::kCrash;
    run.observed = CrashClass(r.value("crash_type", "unknown-crash"));
    if (!r.contains("exit_code")) run.exit_code = 1;
  } else if (status == "timeout") {
    run.status = RunOutcome::Status::kTimeout;
  } else if (status == "clean") {
    run.status = RunOutcome::Status::kClean;
  } else {
    throw Error(ErrorCode::kParseError, "sim manifest: run status " + status);
  }
  return run;
}

std::optional<std::string> SimBackend::FetchPrebuilt(const IssueRecord &issue,
                                                     BuildVariant variant) {
  const OrderedJson &prebuilt = Section(manifest_, "prebuilt");
  auto it = prebuilt.find(std::to_string(issue.local_id) + "-" +
                          std::string(VariantTag(variant)));
  if (it == prebuilt.end()) return std::nullopt;
  return it->get<std::string>();
}

}  // namespace vulnrepro
