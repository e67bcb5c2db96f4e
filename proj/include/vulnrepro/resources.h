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

// Vanished build resources: spotting them in build logs and repairing build
// files with a persistent rule store.
//
// Rule file, one rule per line:
//   rule_id | core|non_core | <url glob> | replace <url> | # note
//   rule_id | non_core      | <url glob> | remove        | # note
// Lines starting with '#' are comments. A leading `# rules-format: 1` line
// is written by Serialize(). First matching rule wins.

#ifndef VULNREPRO_RESOURCES_H_
#define VULNREPRO_RESOURCES_H_

#include <filesystem>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vulnrepro/buildspec.h"

namespace vulnrepro {

enum class ResourceClass { kCore, kNonCore };
enum class RuleAction { kReplace, kRemove };

struct ResourceRule {
  std::string id;
  std::string match;  // glob over the locator
  ResourceClass classification = ResourceClass::kCore;
  RuleAction action = RuleAction::kReplace;
  std::string replacement;  // kReplace only
  std::string note;

  bool Matches(std::string_view url) const;
  bool operator==(const ResourceRule &) const = default;
};

class RuleStore {
 public:
  RuleStore() = default;

  // Throws kParseError (with line number) on malformed lines, duplicate ids
  // or a core rule whose action is remove.
  static RuleStore Parse(std::string_view text);
  static RuleStore Load(const std::filesystem::path &path);
  std::string Serialize() const;
  void Save(const std::filesystem::path &path) const;

  // Same validation as Parse.
  void Add(ResourceRule rule);

  const std::vector<ResourceRule> &rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }
  const ResourceRule *FirstMatch(std::string_view url) const;
  const ResourceRule *Find(std::string_view id) const;
  // Rules whose id is in `ids`, keeping store order.
  RuleStore Subset(std::span<const std::string> ids) const;

 private:
  std::vector<ResourceRule> rules_;
};

struct BrokenResource {
  std::string url;  // as written in the build file
  size_t directive_index = 0;
  std::string evidence;  // the log line that reported the failure
};

// One row of the error-pattern table. The first capture group of `regex`
// is a locator (kUrl) or a host name (kHost); kContext rows carry no capture
// and blame the locator most recently printed in the log (wget and curl
// report HTTP errors on the line after the request).
struct ErrorPattern {
  enum class Capture { kUrl, kHost, kContext };
  std::string name;
  std::regex regex;
  Capture capture = Capture::kUrl;
};

class ErrorPatternTable {
 public:
  // Clone failures, HTTP 404/410, DNS failures and archive downloads.
  static ErrorPatternTable Defaults();
  // Extra rows, one per line: `url|host|context <name> <ECMAScript regex>`.
  void LoadExtensions(std::string_view text);

  const std::vector<ErrorPattern> &patterns() const { return patterns_; }

 private:
  std::vector<ErrorPattern> patterns_;
};

// Locators (scheme://...) mentioned in a directive, in order of appearance.
std::vector<std::string> ExtractUrls(std::string_view text);

// One entry per failing locator that also appears in a directive of `spec`,
// deduplicated by locator, in log order.
std::vector<BrokenResource> DetectBrokenResources(
    std::string_view build_log, const BuildSpec &spec,
    const ErrorPatternTable &patterns = ErrorPatternTable::Defaults());

struct RuleApplication {
  BuildSpec spec;
  std::vector<std::string> applied;  // unique ids, first-application order
  // Directives that deserve a human look (e.g. a command cut out of a
  // multi-line script).
  std::vector<std::string> warnings;
};

// Replace rewrites the locator in place; Remove drops the smallest
// `&&`-separated command mentioning it, or the whole directive when it is a
// single command. Throws kRuleApplicationError("<rule>@<directive>") when a
// matching RUN directive cannot be split into a command chain.
RuleApplication ApplyRules(const BuildSpec &spec, const RuleStore &store);

// A resource is non-core iff the build retried without it still compiled.
struct BuildOutcome;
ResourceClass ClassifyResource(const BrokenResource &broken,
                               const BuildOutcome &retry_without_resource);

}  // namespace vulnrepro

#endif  // VULNREPRO_RESOURCES_H_
