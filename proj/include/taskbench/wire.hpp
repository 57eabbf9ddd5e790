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

#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "taskbench/sandbox.hpp"

namespace taskbench::sandbox {

/// What the orchestrator writes to the runner's stdin.
struct RunRequest {
  std::string task_file;
  SandboxLimits limits;
  std::map<std::string, std::string> env;

  bool operator==(const RunRequest&) const = default;
};

enum class EventKind { Start, Line, Exit };
enum class OutStream { Out, Err };

struct RunEvent {
  EventKind ev = EventKind::Start;
  std::optional<OutStream> stream;
  std::optional<std::string> text;
  std::optional<int> code;
  std::optional<double> duration_s;
  bool timeout = false;
  std::optional<std::string> error;

  static RunEvent start() { return {}; }
  static RunEvent line(OutStream s, std::string text);
  static RunEvent exit(int code, double duration_s, bool timeout = false);

  bool operator==(const RunEvent&) const = default;
};

/// Exit code a runner reports when it could not parse its request.
inline constexpr int kRequestErrorCode = 125;
/// Exit code reported when the child was killed at the deadline.
inline constexpr int kTimeoutCode = -1;

nlohmann::json to_json(const SandboxLimits& limits);
SandboxLimits limits_from_json(const nlohmann::json& j);

std::string encode_request(const RunRequest& req);
/// Throws SandboxError(ProtocolViolation) on malformed input.
RunRequest decode_request(std::string_view line);

/// One JSON object, no trailing newline.
std::string encode_event(const RunEvent& ev);
/// Throws SandboxError(ProtocolViolation) on malformed input.
RunEvent decode_event(std::string_view line);

/// Enforces `start line* exit`.
class EventGrammar {
 public:
  void accept(const RunEvent& ev);
  /// Throws unless the stream ended with exit.
  void finish() const;
  bool started() const { return state_ != State::Initial; }
  bool done() const { return state_ == State::Done; }

 private:
  enum class State { Initial, Running, Done };
  State state_ = State::Initial;
};

}  // namespace taskbench::sandbox
