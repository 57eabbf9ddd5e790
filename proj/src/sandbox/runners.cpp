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

#include <algorithm>
#include <filesystem>

#include "taskbench/fileio.hpp"
#include "taskbench/hash.hpp"
#include "taskbench/process.hpp"
#include "taskbench/runner.hpp"
#include "taskbench/text.hpp"

namespace taskbench::sandbox {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::chrono::milliseconds to_ms(double seconds) {
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0));
}

RunEvent request_error(const std::string& what) {
  auto ev = RunEvent::exit(kRequestErrorCode, 0.0);
  ev.error = what;
  return ev;
}

}  // namespace

void ProcessRunner::run(const RunRequest& req, const EventSink& sink) const {
  std::error_code ec;
  if (!fs::is_regular_file(req.task_file, ec)) {
    sink(request_error(fmt::format("task file not found: {}", req.task_file)));
    return;
  }
  process::Spec spec;
  spec.argv = opts_.interpreter;
  spec.argv.push_back(fs::path(req.task_file).filename().string());
  spec.cwd = fs::path(req.task_file).parent_path();
  spec.env = req.env;
  spec.env["PYTHONUNBUFFERED"] = "1";
  if (req.limits.allow_install && !opts_.install_cache.empty()) {
    spec.env["PIP_CACHE_DIR"] = opts_.install_cache.string();
  }
  spec.timeout = to_ms(req.limits.wall_clock_timeout_s);
  spec.max_output_bytes = req.limits.max_output_bytes;
  spec.isolate_network = !req.limits.allow_network;

  // The interpreter reports the script by absolute path; strip the scratch
  // directory so reports and prompts don't depend on where the run happened.
  std::string dir_prefix = fs::absolute(spec.cwd).lexically_normal().string();
  if (!dir_prefix.empty() && dir_prefix.back() != '/') dir_prefix.push_back('/');

  sink(RunEvent::start());
  process::Result res;
  try {
    res = process::run(spec, [&](process::Stream s, std::string_view line) {
      sink(RunEvent::line(s == process::Stream::Out ? OutStream::Out : OutStream::Err,
                          text::replace_all(std::string(line), dir_prefix, "")));
    });
  } catch (const process::SpawnError& e) {
    throw SandboxError(SandboxErrorKind::SandboxUnavailable, e.what());
  }
  sink(RunEvent::exit(res.exit_code, res.duration_s, res.timed_out));
}

void ShimRunner::run(const RunRequest& req, const EventSink& sink) const {
  process::Spec spec;
  spec.argv = argv_;
  spec.stdin_data = encode_request(req) + "\n";
  spec.timeout = to_ms(req.limits.wall_clock_timeout_s + grace_s_);
  // Room for JSON framing around the capped payload.
  spec.max_output_bytes = req.limits.max_output_bytes * 2 + (1u << 20);

  EventGrammar grammar;
  std::optional<std::string> failure;
  std::string diagnostics;
  process::Result res;
  try {
    res = process::run(spec, [&](process::Stream s, std::string_view line) {
      if (failure) return;
      if (s == process::Stream::Err) {
        if (diagnostics.size() < 4096) diagnostics.append(line).push_back('\n');
        return;
      }
      if (text::is_blank(line)) return;
      try {
        auto ev = decode_event(line);
        grammar.accept(ev);
        sink(ev);
      } catch (const SandboxError& e) {
        failure = e.what();
      }
    });
  } catch (const process::SpawnError& e) {
    throw SandboxError(SandboxErrorKind::SandboxUnavailable, e.what());
  }
  if (failure) throw SandboxError(SandboxErrorKind::ProtocolViolation, *failure);
  if (!grammar.done()) {
    if (res.timed_out) {
      // The shim itself hung; close the stream on its behalf.
      if (!grammar.started()) sink(RunEvent::start());
      sink(RunEvent::exit(kTimeoutCode, res.duration_s, true));
      return;
    }
    throw SandboxError(SandboxErrorKind::ProtocolViolation,
                       fmt::format("runner exited ({}) without an exit event{}{}", res.exit_code,
                                   diagnostics.empty() ? "" : ": ", text::trim(diagnostics)));
  }
}

ScriptedRunner ScriptedRunner::from_file(const fs::path& path) {
  std::vector<Rule> rules;
  for (const auto& line : read_lines(path)) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("events")) {
      throw ConfigError(fmt::format("{}: malformed scripted rule", path.string()));
    }
    Rule r;
    r.contains = j.value("contains", "");
    r.program_sha256 = j.value("program_sha256", "");
    for (const auto& e : j.at("events")) r.events.push_back(decode_event(e.dump()));
    rules.push_back(std::move(r));
  }
  return ScriptedRunner(std::move(rules));
}

void ScriptedRunner::run(const RunRequest& req, const EventSink& sink) const {
  std::error_code ec;
  if (!fs::is_regular_file(req.task_file, ec)) {
    sink(request_error(fmt::format("task file not found: {}", req.task_file)));
    return;
  }
  auto content = read_file(req.task_file);
  std::string digest;
  for (const auto& rule : rules_) {
    bool match = true;
    if (!rule.contains.empty()) match = content.find(rule.contains) != std::string::npos;
    if (match && !rule.program_sha256.empty()) {
      if (digest.empty()) digest = sha256_hex(content);
      match = digest == rule.program_sha256;
    }
    if (!match) continue;
    EventGrammar grammar;
    for (const auto& ev : rule.events) {
      grammar.accept(ev);
      sink(ev);
    }
    grammar.finish();
    return;
  }
  throw SandboxError(SandboxErrorKind::SandboxUnavailable, "no scripted rule matches the task file");
}

std::shared_ptr<Runner> make_runner(const std::string& spec) {
  if (spec == "process") return std::make_shared<ProcessRunner>();
  if (spec == "shim") return std::make_shared<ShimRunner>();
  if (spec.starts_with("shim:")) {
    std::vector<std::string> argv;
    for (auto part : text::split_lines(text::replace_all(spec.substr(5), " ", "\n"))) {
      if (!part.empty()) argv.emplace_back(part);
    }
    if (argv.empty()) throw ConfigError("shim runner needs a command");
    return std::make_shared<ShimRunner>(std::move(argv));
  }
  if (spec.starts_with("scripted:")) {
    return std::make_shared<ScriptedRunner>(ScriptedRunner::from_file(spec.substr(9)));
  }
  throw ConfigError(fmt::format("unknown runner: {}", spec));
}

}  // namespace taskbench::sandbox
