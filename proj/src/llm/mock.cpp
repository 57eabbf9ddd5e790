// Copyright 2026 The Taskbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fmt/format.h>

#include "taskbench/fileio.hpp"
#include "taskbench/hash.hpp"
#include "taskbench/llm.hpp"

namespace taskbench::llm {

using nlohmann::json;

std::shared_ptr<MockProvider> MockProvider::from_file(const std::filesystem::path& path) {
  std::vector<Rule> rules;
  std::size_t lineno = 0;
  for (const auto& line : read_lines(path)) {
    ++lineno;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || (!j.contains("response") && !j.contains("error"))) {
      throw ConfigError(fmt::format("{}:{}: malformed mock rule", path.string(), lineno));
    }
    Rule r;
    r.tag = j.value("tag", "");
    r.contains = j.value("contains", "");
    r.prompt_sha256 = j.value("prompt_sha256", "");
    r.response = j.value("response", "");
    if (j.contains("error")) r.error = parse_error_kind(j.at("error").get<std::string>());
    rules.push_back(std::move(r));
  }
  return std::make_shared<MockProvider>(std::move(rules));
}

CompletionResult MockProvider::complete(const CompletionRequest& req) {
  std::string haystack = req.system.value_or("") + "\n" + req.prompt;
  std::string digest;
  for (const auto& rule : rules_) {
    if (!rule.tag.empty() && rule.tag != req.tag) continue;
    if (!rule.contains.empty() && haystack.find(rule.contains) == std::string::npos) continue;
    if (!rule.prompt_sha256.empty()) {
      if (digest.empty()) digest = sha256_hex(req.prompt);
      if (digest != rule.prompt_sha256) continue;
    }
    if (rule.error) {
      throw LlmError(*rule.error, fmt::format("scripted {} error", error_kind_name(*rule.error)));
    }
    return {rule.response, "mock", 0.0, std::nullopt};
  }
  throw LlmError(LlmErrorKind::ResponseMalformed,
                 fmt::format("no mock rule for request tagged '{}'", req.tag));
}

}  // namespace taskbench::llm
