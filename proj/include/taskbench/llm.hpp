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

#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/error.hpp"

namespace taskbench::llm {

struct GenerationParams {
  double top_p = 0.9;
  double temperature = 0.6;
  int max_tokens = 2048;
  std::vector<std::string> stop;

  /// Throws LlmError(InvalidRequest) when out of range.
  void validate() const;

  bool operator==(const GenerationParams&) const = default;
};

struct CompletionRequest {
  std::optional<std::string> system;
  std::string prompt;
  GenerationParams params;
  /// Purpose label: generate, analyze, repair, curate.*
  std::string tag;

  bool operator==(const CompletionRequest&) const = default;
};

struct Usage {
  int prompt_tokens = 0;
  int completion_tokens = 0;

  bool operator==(const Usage&) const = default;
};

struct CompletionResult {
  std::string text;
  std::string provider;
  double latency_ms = 0.0;
  std::optional<Usage> usage;

  bool operator==(const CompletionResult&) const = default;
};

enum class LlmErrorKind {
  ProviderUnavailable,
  ResponseMalformed,
  RateLimited,
  InvalidRequest,
  ReplayMiss,
};

std::string_view error_kind_name(LlmErrorKind k);
LlmErrorKind parse_error_kind(std::string_view name);

class LlmError : public Error {
 public:
  LlmError(LlmErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  LlmErrorKind kind() const { return kind_; }
  /// Worth retrying: unavailable or rate limited.
  bool transient() const;

 private:
  LlmErrorKind kind_;
};

/// Raised by the gateway once retries are spent; kind() is the last failure.
class ProviderExhausted : public LlmError {
 public:
  ProviderExhausted(LlmErrorKind kind, const std::string& what, int calls)
      : LlmError(kind, what), calls_(calls) {}
  int calls() const { return calls_; }

 private:
  int calls_;
};

nlohmann::json to_json(const CompletionRequest& req);
CompletionRequest request_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CompletionResult& res);
CompletionResult result_from_json(const nlohmann::json& j);

/// SHA-256 over the canonical JSON form of the request.
std::string request_key(const CompletionRequest& req);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual CompletionResult complete(const CompletionRequest& req) = 0;
  virtual std::string name() const = 0;
};

/// Deterministic provider driven by rules. A rule matches on any combination
/// of tag, substring of system+prompt, and prompt digest; the first matching
/// rule answers. The answer depends only on the request.
class MockProvider : public Provider {
 public:
  struct Rule {
    std::string tag;
    std::string contains;
    std::string prompt_sha256;
    std::string response;
    std::optional<LlmErrorKind> error;
  };

  explicit MockProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  /// One JSON rule per line: {tag?, contains?, prompt_sha256?, response | error}.
  static std::shared_ptr<MockProvider> from_file(const std::filesystem::path& path);

  CompletionResult complete(const CompletionRequest& req) override;
  std::string name() const override { return "mock"; }

 private:
  std::vector<Rule> rules_;
};

/// Appends request/outcome pairs as JSON Lines. Thread safe.
class Journal {
 public:
  explicit Journal(std::filesystem::path path) : path_(std::move(path)) {}
  void record(const CompletionRequest& req, const CompletionResult& res);
  void record_error(const CompletionRequest& req, const LlmError& err);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

/// Answers from a journal. Identical requests are served in recorded order;
/// once the queue for a request is down to one entry that entry repeats.
/// Unknown requests raise ReplayMiss.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::filesystem::path& journal);

  CompletionResult complete(const CompletionRequest& req) override;
  std::string name() const override { return "replay"; }

 private:
  struct Entry {
    std::optional<CompletionResult> result;
    std::optional<LlmErrorKind> error;
    std::string message;
  };
  std::map<std::string, std::vector<Entry>> entries_;
  std::map<std::string, std::size_t> cursor_;
  std::mutex mu_;
};

/// Chat-completions over HTTP(S).
class OpenAiCompatibleProvider : public Provider {
 public:
  struct Options {
    std::string base_url;  // e.g. https://api.example.com/v1
    std::string model;
    std::string api_key;   // may be empty for local servers
    double timeout_s = 120.0;
  };

  explicit OpenAiCompatibleProvider(Options opts);
  CompletionResult complete(const CompletionRequest& req) override;
  std::string name() const override { return "openai:" + opts_.model; }

 private:
  Options opts_;
  std::string origin_;
  std::string path_prefix_;
};

struct RetryPolicy {
  /// Waits before each retry; the size is the retry cap.
  std::vector<std::chrono::milliseconds> backoff{std::chrono::seconds(1), std::chrono::seconds(4),
                                                 std::chrono::seconds(9)};
};

struct GatewayOptions {
  RetryPolicy retry;
  int max_in_flight = 4;
  std::chrono::milliseconds min_interval{0};
};

struct RequestLogEntry {
  std::string tag;
  std::string key;
  int calls = 0;
  bool ok = false;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// Shared front door to a provider: validation, retries, concurrency and
/// pacing limits, journaling and a per-tag request log.
class Gateway {
 public:
  explicit Gateway(std::shared_ptr<Provider> provider, GatewayOptions opts = {},
                   std::shared_ptr<Journal> journal = nullptr);

  /// Throws LlmError(InvalidRequest) for bad requests, ResponseMalformed
  /// as-is, and ProviderExhausted once transient failures outlast the
  /// retry policy.
  CompletionResult complete(const CompletionRequest& req);

  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }
  std::vector<RequestLogEntry> request_log() const;
  std::map<std::string, std::size_t> requests_by_tag() const;
  const Provider& provider() const { return *provider_; }

 private:
  void pace();

  std::shared_ptr<Provider> provider_;
  GatewayOptions opts_;
  std::shared_ptr<Journal> journal_;
  Sleeper sleeper_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  int in_flight_ = 0;
  std::chrono::steady_clock::time_point last_start_{};
  std::vector<RequestLogEntry> log_;
};

struct Profile {
  std::string provider;  // openai | mock | replay
  std::string base_url;
  std::string model;
  std::string api_key_env;
  std::filesystem::path rules;    // mock
  std::filesystem::path journal;  // replay source
  std::optional<std::string> system;
  GenerationParams params;
  double timeout_s = 120.0;
  GatewayOptions gateway;
};

/// Reads a JSON profile. Relative paths resolve against the profile's
/// directory. Throws ConfigError.
Profile load_profile(const std::filesystem::path& path);
Profile parse_profile(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Builds the provider; the API key is read from the environment variable
/// the profile names. Throws ConfigError when it is unset.
std::shared_ptr<Provider> make_provider(const Profile& profile);

/// The candidate program inside a completion: the first fenced block, the
/// longest run of code-like lines when the text mixes code and prose, or the
/// text itself. Idempotent.
std::string extract_code(std::string_view completion);

}  // namespace taskbench::llm
