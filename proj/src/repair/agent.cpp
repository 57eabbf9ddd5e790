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

#include "taskbench/report_io.hpp"
#include "taskbench/repair.hpp"
#include "taskbench/text.hpp"

namespace taskbench::repair {

using sandbox::ExecutionReport;

namespace {

// A placeholder report for an attempt that never reached the sandbox.
ExecutionReport unrun_report(const task::TaskSpec& task, int index, std::string error) {
  ExecutionReport r;
  r.task_id = task.id;
  r.attempt = index;
  r.exit_code = -1;
  r.error = std::move(error);
  for (int i = 1; i <= task.num_test_cases; ++i) {
    r.verdicts.push_back({i, sandbox::VerdictStatus::NotReached, ""});
  }
  return r;
}

std::string outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::SolvedAtZero: return "solved_at_zero";
    case OutcomeKind::SolvedByRepair: return "solved_by_repair";
    case OutcomeKind::Exhausted: return "exhausted";
  }
  return "exhausted";
}

OutcomeKind parse_outcome(std::string_view s) {
  if (s == "solved_at_zero") return OutcomeKind::SolvedAtZero;
  if (s == "solved_by_repair") return OutcomeKind::SolvedByRepair;
  if (s == "exhausted") return OutcomeKind::Exhausted;
  throw Error(fmt::format("unknown repair outcome '{}'", s));
}

}  // namespace

std::string describe(const Outcome& o) {
  if (o.kind == OutcomeKind::SolvedByRepair) return fmt::format("solved_by_repair({})", o.round);
  return outcome_name(o.kind);
}

Outcome classify(const std::vector<RepairAttempt>& attempts) {
  for (const auto& a : attempts) {
    if (!a.report.all_passed()) continue;
    if (a.index == 0) return {OutcomeKind::SolvedAtZero, 0};
    return {OutcomeKind::SolvedByRepair, a.index};
  }
  return {OutcomeKind::Exhausted, 0};
}

Agent::Agent(llm::Gateway& gateway, const sandbox::Sandbox& sandbox, AgentOptions opts)
    : gateway_(gateway), sandbox_(sandbox), opts_(std::move(opts)) {
  if (opts_.budget < 1) {
    throw RepairError(RepairErrorKind::InvalidBudget,
                      fmt::format("repair budget must be at least 1, got {}", opts_.budget));
  }
}

llm::CompletionRequest Agent::request(std::string prompt, std::string tag) const {
  return {opts_.system, std::move(prompt), opts_.params, std::move(tag)};
}

std::string Agent::complete_code(std::string prompt, std::string tag) const {
  auto res = gateway_.complete(request(std::move(prompt), tag));
  auto code = llm::extract_code(res.text);
  if (text::is_blank(code)) {
    throw RepairError(RepairErrorKind::GenerationEmpty, fmt::format("{}: completion had no code", tag));
  }
  return code;
}

std::string Agent::generate_initial(const task::TaskSpec& task) const {
  return complete_code(generation_prompt(task), "generate");
}

std::string Agent::analyze_failure(const task::TaskSpec& task, const ExecutionReport& report,
                                   std::string_view program) const {
  return gateway_.complete(request(analysis_prompt(task, report, program), "analyze")).text;
}

RepairSession Agent::run(const task::TaskSpec& task) const {
  RepairSession s;
  s.task_id = task.id;
  s.budget = opts_.budget;

  auto run_attempt = [&](int index, std::string program, bool echo) {
    RepairAttempt a;
    a.index = index;
    a.echo_retry = echo;
    a.report = sandbox_.execute(task, program, opts_.limits, index);
    a.program = std::move(program);
    s.attempts.push_back(std::move(a));
  };
  auto empty_attempt = [&](int index, const RepairError& e) {
    RepairAttempt a;
    a.index = index;
    a.report = unrun_report(task, index, "generation_empty");
    a.error = e.what();
    s.attempts.push_back(std::move(a));
  };
  auto abort = [&](const llm::LlmError& e) {
    s.aborted = true;
    s.attempts.back().analysis.reset();
    s.attempts.back().error = fmt::format("{}: {}", llm::error_kind_name(e.kind()), e.what());
  };

  try {
    run_attempt(0, generate_initial(task), false);
  } catch (const RepairError& e) {
    empty_attempt(0, e);
  } catch (const llm::LlmError& e) {
    s.attempts.push_back({0, "", unrun_report(task, 0, "provider_error"), std::nullopt, std::nullopt, false});
    abort(e);
    s.outcome = classify(s.attempts);
    return s;
  }

  for (int k = 1; k <= opts_.budget && !s.attempts.back().report.all_passed(); ++k) {
    auto& prev = s.attempts.back();
    try {
      prev.analysis = analyze_failure(task, prev.report, prev.program);
      RepairPrompt p{task.instruction, prev.program, traceback_excerpt(prev.report), prev.analysis};
      auto prompt = render_repair_prompt(p);
      std::string code;
      bool echo = false;
      try {
        code = complete_code(prompt, "repair");
        if (text::trim(code) == text::trim(prev.program)) {
          echo = true;
          code = complete_code(prompt + std::string(echo_addendum()), "repair");
        }
      } catch (const RepairError& e) {
        empty_attempt(k, e);
        continue;
      }
      run_attempt(k, std::move(code), echo);
    } catch (const llm::LlmError& e) {
      abort(e);
      break;
    }
  }
  s.outcome = classify(s.attempts);
  return s;
}

nlohmann::json to_json(const RepairSession& s) {
  nlohmann::json attempts = nlohmann::json::array();
  for (const auto& a : s.attempts) {
    nlohmann::json j = {{"index", a.index},
                        {"program", a.program},
                        {"report", a.report},
                        {"analysis", a.analysis ? nlohmann::json(*a.analysis) : nlohmann::json()},
                        {"error", a.error ? nlohmann::json(*a.error) : nlohmann::json()},
                        {"echo_retry", a.echo_retry}};
    attempts.push_back(std::move(j));
  }
  return {{"task_id", s.task_id},
          {"budget", s.budget},
          {"outcome", outcome_name(s.outcome.kind)},
          {"round", s.outcome.round},
          {"aborted", s.aborted},
          {"attempts", std::move(attempts)}};
}

RepairSession session_from_json(const nlohmann::json& j) {
  RepairSession s;
  s.task_id = j.at("task_id").get<std::string>();
  s.budget = j.at("budget").get<int>();
  s.outcome = {parse_outcome(j.at("outcome").get<std::string>()), j.value("round", 0)};
  s.aborted = j.value("aborted", false);
  for (const auto& aj : j.at("attempts")) {
    RepairAttempt a;
    a.index = aj.at("index").get<int>();
    a.program = aj.at("program").get<std::string>();
    a.report = aj.at("report").get<ExecutionReport>();
    if (aj.contains("analysis") && !aj["analysis"].is_null()) a.analysis = aj["analysis"].get<std::string>();
    if (aj.contains("error") && !aj["error"].is_null()) a.error = aj["error"].get<std::string>();
    a.echo_retry = aj.value("echo_retry", false);
    s.attempts.push_back(std::move(a));
  }
  return s;
}

}  // namespace taskbench::repair
