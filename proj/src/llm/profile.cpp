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

#include <cstdlib>

#include "taskbench/fileio.hpp"
#include "taskbench/llm.hpp"

namespace taskbench::llm {

namespace fs = std::filesystem;
using nlohmann::json;

Profile parse_profile(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("profile must be a JSON object");
  auto resolve = [&](const std::string& p) -> fs::path {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  try {
    Profile p;
    p.provider = j.at("provider").get<std::string>();
    p.base_url = j.value("base_url", "");
    p.model = j.value("model", "");
    p.api_key_env = j.value("api_key_env", "");
    if (j.contains("api_key")) throw ConfigError("profiles must not hold secrets; use api_key_env");
    p.rules = resolve(j.value("rules", ""));
    p.journal = resolve(j.value("journal", ""));
    if (j.contains("system") && !j.at("system").is_null()) p.system = j.at("system").get<std::string>();
    if (j.contains("params")) {
      const auto& q = j.at("params");
      p.params.top_p = q.value("top_p", p.params.top_p);
      p.params.temperature = q.value("temperature", p.params.temperature);
      p.params.max_tokens = q.value("max_tokens", p.params.max_tokens);
      p.params.stop = q.value("stop", std::vector<std::string>{});
    }
    p.timeout_s = j.value("timeout_s", p.timeout_s);
    p.gateway.max_in_flight = j.value("max_in_flight", p.gateway.max_in_flight);
    p.gateway.min_interval = std::chrono::milliseconds(j.value("min_interval_ms", 0));
    if (j.contains("retry_backoff_ms")) {
      p.gateway.retry.backoff.clear();
      for (const auto& ms : j.at("retry_backoff_ms")) {
        p.gateway.retry.backoff.emplace_back(ms.get<long long>());
      }
    }
    try {
      p.params.validate();
    } catch (const LlmError& e) {
      throw ConfigError(e.what());
    }
    if (p.provider == "openai" && p.base_url.empty()) throw ConfigError("openai profile needs base_url");
    if (p.provider == "mock" && p.rules.empty()) throw ConfigError("mock profile needs rules");
    if (p.provider == "replay" && p.journal.empty()) throw ConfigError("replay profile needs journal");
    if (p.provider != "openai" && p.provider != "mock" && p.provider != "replay") {
      throw ConfigError(fmt::format("unknown provider: {}", p.provider));
    }
    return p;
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad profile: {}", e.what()));
  }
}

Profile load_profile(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(fmt::format("{}: not valid JSON", path.string()));
  return parse_profile(j, path.parent_path());
}

std::shared_ptr<Provider> make_provider(const Profile& profile) {
  if (profile.provider == "mock") return MockProvider::from_file(profile.rules);
  if (profile.provider == "replay") return std::make_shared<ReplayProvider>(profile.journal);
  OpenAiCompatibleProvider::Options opts{profile.base_url, profile.model, "", profile.timeout_s};
  if (!profile.api_key_env.empty()) {
    const char* key = std::getenv(profile.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ConfigError(fmt::format("environment variable {} is not set", profile.api_key_env));
    }
    opts.api_key = key;
  }
  return std::make_shared<OpenAiCompatibleProvider>(std::move(opts));
}

}  // namespace taskbench::llm
