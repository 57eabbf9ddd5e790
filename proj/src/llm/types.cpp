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

#include "taskbench/hash.hpp"
#include "taskbench/llm.hpp"

namespace taskbench::llm {

using nlohmann::json;

void GenerationParams::validate() const {
  if (!(top_p > 0.0 && top_p <= 1.0)) {
    throw LlmError(LlmErrorKind::InvalidRequest, fmt::format("top_p out of range: {}", top_p));
  }
  if (!(temperature >= 0.0)) {
    throw LlmError(LlmErrorKind::InvalidRequest, fmt::format("negative temperature: {}", temperature));
  }
  if (max_tokens <= 0) {
    throw LlmError(LlmErrorKind::InvalidRequest, fmt::format("max_tokens must be positive: {}", max_tokens));
  }
}

std::string_view error_kind_name(LlmErrorKind k) {
  switch (k) {
    case LlmErrorKind::ProviderUnavailable: return "unavailable";
    case LlmErrorKind::ResponseMalformed: return "malformed";
    case LlmErrorKind::RateLimited: return "rate_limited";
    case LlmErrorKind::InvalidRequest: return "invalid_request";
    case LlmErrorKind::ReplayMiss: return "replay_miss";
  }
  return "unavailable";
}

LlmErrorKind parse_error_kind(std::string_view name) {
  for (auto k : {LlmErrorKind::ProviderUnavailable, LlmErrorKind::ResponseMalformed,
                 LlmErrorKind::RateLimited, LlmErrorKind::InvalidRequest, LlmErrorKind::ReplayMiss}) {
    if (error_kind_name(k) == name) return k;
  }
  throw ConfigError(fmt::format("unknown provider error kind: {}", name));
}

bool LlmError::transient() const {
  return kind_ == LlmErrorKind::ProviderUnavailable || kind_ == LlmErrorKind::RateLimited;
}

json to_json(const CompletionRequest& req) {
  return {{"system", req.system ? json(*req.system) : json(nullptr)},
          {"prompt", req.prompt},
          {"params",
           {{"top_p", req.params.top_p},
            {"temperature", req.params.temperature},
            {"max_tokens", req.params.max_tokens},
            {"stop", req.params.stop}}},
          {"tag", req.tag}};
}

CompletionRequest request_from_json(const json& j) {
  CompletionRequest r;
  if (j.contains("system") && !j.at("system").is_null()) r.system = j.at("system").get<std::string>();
  r.prompt = j.at("prompt").get<std::string>();
  r.tag = j.value("tag", "");
  if (j.contains("params")) {
    const auto& p = j.at("params");
    r.params.top_p = p.value("top_p", r.params.top_p);
    r.params.temperature = p.value("temperature", r.params.temperature);
    r.params.max_tokens = p.value("max_tokens", r.params.max_tokens);
    r.params.stop = p.value("stop", std::vector<std::string>{});
  }
  return r;
}

json to_json(const CompletionResult& res) {
  json j = {{"text", res.text}, {"provider", res.provider}, {"latency_ms", res.latency_ms}};
  j["usage"] = res.usage ? json{{"prompt_tokens", res.usage->prompt_tokens},
                                {"completion_tokens", res.usage->completion_tokens}}
                         : json(nullptr);
  return j;
}

CompletionResult result_from_json(const json& j) {
  CompletionResult r;
  r.text = j.at("text").get<std::string>();
  r.provider = j.value("provider", "");
  r.latency_ms = j.value("latency_ms", 0.0);
  if (j.contains("usage") && !j.at("usage").is_null()) {
    r.usage = Usage{j.at("usage").value("prompt_tokens", 0), j.at("usage").value("completion_tokens", 0)};
  }
  return r;
}

std::string request_key(const CompletionRequest& req) {
  return sha256_hex(to_json(req).dump(-1, ' ', false, json::error_handler_t::replace));
}

}  // namespace taskbench::llm
