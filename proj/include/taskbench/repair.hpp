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

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/executor.hpp"
#include "taskbench/llm.hpp"
#include "taskbench/task.hpp"

namespace taskbench::repair {

enum class RepairErrorKind { GenerationEmpty, InvalidBudget };

class RepairError : public Error {
 public:
  RepairError(RepairErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  RepairErrorKind kind() const { return kind_; }

 private:
  RepairErrorKind kind_;
};

struct RepairAttempt {
  int index = 0;  // 0 is the original generation
  std::string program;
  sandbox::ExecutionReport report;
  /// Model analysis of this attempt's failure; only on non-final attempts.
  std::optional<std::string> analysis;
  /// Why the attempt (or the session, on the final attempt) went wrong.
  std::optional<std::string> error;
  /// The echo addendum had to be sent to get this program.
  bool echo_retry = false;

  bool operator==(const RepairAttempt&) const = default;
};

enum class OutcomeKind { SolvedAtZero, SolvedByRepair, Exhausted };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Exhausted;
  int round = 0;  // k for SolvedByRepair

  bool operator==(const Outcome&) const = default;
};

std::string describe(const Outcome& o);

struct RepairSession {
  std::string task_id;
  int budget = 0;
  std::vector<RepairAttempt> attempts;
  Outcome outcome;
  /// Set when a provider failure cut the session short.
  bool aborted = false;

  const RepairAttempt& final_attempt() const { return attempts.back(); }
  bool operator==(const RepairSession&) const = default;
};

struct RepairPrompt {
  std::string instruction;
  std::string failing_program;
  std::string traceback_excerpt;
  std::optional<std::string> prior_analysis;
};

inline constexpr int kDefaultBudget = 2;
inline constexpr std::size_t kExcerptFrames = 5;

std::string generation_prompt(const task::TaskSpec& task);
/// Innermost frames plus the exception line; failed-case marker lines when
/// there is no interpreter traceback. Never empty.
std::string traceback_excerpt(const sandbox::ExecutionReport& report);
std::string analysis_prompt(const task::TaskSpec& task, const sandbox::ExecutionReport& report,
                            std::string_view program);
std::string render_repair_prompt(const RepairPrompt& prompt);
/// Appended once when a repair echoes the failing program back.
std::string_view echo_addendum();

struct AgentOptions {
  int budget = kDefaultBudget;
  sandbox::SandboxLimits limits;
  llm::GenerationParams params;
  std::optional<std::string> system;
};

/// The generate, execute, analyze, regenerate loop for one task at a time.
/// Safe to share across threads when the gateway and sandbox are.
class Agent {
 public:
  /// Throws RepairError(InvalidBudget) unless budget >= 1.
  Agent(llm::Gateway& gateway, const sandbox::Sandbox& sandbox, AgentOptions opts);

  /// Throws RepairError(GenerationEmpty) when no code comes back.
  std::string generate_initial(const task::TaskSpec& task) const;
  std::string analyze_failure(const task::TaskSpec& task, const sandbox::ExecutionReport& report,
                              std::string_view program) const;
  /// Provider exhaustion ends the session with outcome Exhausted and the
  /// error on the final attempt; sandbox errors propagate.
  RepairSession run(const task::TaskSpec& task) const;

  const AgentOptions& options() const { return opts_; }

 private:
  llm::CompletionRequest request(std::string prompt, std::string tag) const;
  std::string complete_code(std::string prompt, std::string tag) const;

  llm::Gateway& gateway_;
  const sandbox::Sandbox& sandbox_;
  AgentOptions opts_;
};

/// SolvedAtZero / SolvedByRepair(k) / Exhausted from the attempt reports.
Outcome classify(const std::vector<RepairAttempt>& attempts);

nlohmann::json to_json(const RepairSession& s);
RepairSession session_from_json(const nlohmann::json& j);

}  // namespace taskbench::repair
