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
#include <httplib.h>

#include <chrono>

#include "taskbench/llm.hpp"

namespace taskbench::llm {

using nlohmann::json;

OpenAiCompatibleProvider::OpenAiCompatibleProvider(Options opts) : opts_(std::move(opts)) {
  auto scheme = opts_.base_url.find("://");
  if (scheme == std::string::npos) throw ConfigError(fmt::format("base_url needs a scheme: {}", opts_.base_url));
  auto slash = opts_.base_url.find('/', scheme + 3);
  origin_ = opts_.base_url.substr(0, slash);
  path_prefix_ = slash == std::string::npos ? "" : opts_.base_url.substr(slash);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  if (opts_.model.empty()) throw ConfigError("provider profile has no model");
}

CompletionResult OpenAiCompatibleProvider::complete(const CompletionRequest& req) {
  json messages = json::array();
  if (req.system) messages.push_back({{"role", "system"}, {"content", *req.system}});
  messages.push_back({{"role", "user"}, {"content", req.prompt}});
  json body = {{"model", opts_.model},
               {"messages", messages},
               {"temperature", req.params.temperature},
               {"top_p", req.params.top_p},
               {"max_tokens", req.params.max_tokens}};
  if (!req.params.stop.empty()) body["stop"] = req.params.stop;

  httplib::Client cli(origin_);
  auto timeout = std::chrono::milliseconds(static_cast<long long>(opts_.timeout_s * 1000));
  cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count() + 1);
  cli.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count() + 1);
  httplib::Headers headers = {{"X-Taskbench-Tag", req.tag}};
  if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);

  auto start = std::chrono::steady_clock::now();
  auto res = cli.Post(path_prefix_ + "/chat/completions", headers,
                      body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
  double latency =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (!res) {
    throw LlmError(LlmErrorKind::ProviderUnavailable,
                   fmt::format("{}: {}", origin_, httplib::to_string(res.error())));
  }
  if (res->status == 429) throw LlmError(LlmErrorKind::RateLimited, "rate limited (429)");
  if (res->status == 408 || res->status >= 500) {
    throw LlmError(LlmErrorKind::ProviderUnavailable, fmt::format("provider returned {}", res->status));
  }
  if (res->status != 200) {
    throw LlmError(LlmErrorKind::InvalidRequest,
                   fmt::format("provider returned {}: {}", res->status, res->body.substr(0, 200)));
  }
  json j = json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw LlmError(LlmErrorKind::ResponseMalformed, "response is not JSON");
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw LlmError(LlmErrorKind::ResponseMalformed, "content is not text");
    CompletionResult out{content.get<std::string>(), name(), latency, std::nullopt};
    if (j.contains("usage") && j.at("usage").is_object()) {
      out.usage = Usage{j.at("usage").value("prompt_tokens", 0), j.at("usage").value("completion_tokens", 0)};
    }
    return out;
  } catch (const json::exception& e) {
    throw LlmError(LlmErrorKind::ResponseMalformed, fmt::format("unexpected response shape: {}", e.what()));
  }
}

}  // namespace taskbench::llm
