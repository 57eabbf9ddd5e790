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

#include "taskbench/wire.hpp"

#include <fmt/format.h>

namespace taskbench::sandbox {

using nlohmann::json;

namespace {

[[noreturn]] void violation(const std::string& what) {
  throw SandboxError(SandboxErrorKind::ProtocolViolation, what);
}

json parse_object(std::string_view line, std::string_view what) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) violation(fmt::format("{} is not a JSON object", what));
  return j;
}

}  // namespace

RunEvent RunEvent::line(OutStream s, std::string text) {
  RunEvent e;
  e.ev = EventKind::Line;
  e.stream = s;
  e.text = std::move(text);
  return e;
}

RunEvent RunEvent::exit(int code, double duration_s, bool timeout) {
  RunEvent e;
  e.ev = EventKind::Exit;
  e.code = code;
  e.duration_s = duration_s;
  e.timeout = timeout;
  return e;
}

json to_json(const SandboxLimits& l) {
  return {{"wall_clock_timeout", l.wall_clock_timeout_s},
          {"max_output_bytes", l.max_output_bytes},
          {"allow_network", l.allow_network},
          {"allow_install", l.allow_install}};
}

SandboxLimits limits_from_json(const json& j) {
  SandboxLimits l;
  l.wall_clock_timeout_s = j.value("wall_clock_timeout", l.wall_clock_timeout_s);
  l.max_output_bytes = j.value("max_output_bytes", l.max_output_bytes);
  l.allow_network = j.value("allow_network", l.allow_network);
  l.allow_install = j.value("allow_install", l.allow_install);
  return l;
}

std::string encode_request(const RunRequest& req) {
  json j = {{"task_file", req.task_file}, {"limits", to_json(req.limits)}, {"env", req.env}};
  return j.dump();
}

RunRequest decode_request(std::string_view line) {
  auto j = parse_object(line, "request");
  try {
    RunRequest req;
    req.task_file = j.at("task_file").get<std::string>();
    if (j.contains("limits")) req.limits = limits_from_json(j.at("limits"));
    if (j.contains("env")) req.env = j.at("env").get<std::map<std::string, std::string>>();
    return req;
  } catch (const json::exception& e) {
    violation(fmt::format("bad request: {}", e.what()));
  }
}

std::string encode_event(const RunEvent& ev) {
  json j;
  switch (ev.ev) {
    case EventKind::Start:
      j["ev"] = "start";
      break;
    case EventKind::Line:
      j["ev"] = "line";
      j["stream"] = ev.stream.value_or(OutStream::Out) == OutStream::Out ? "out" : "err";
      j["text"] = ev.text.value_or("");
      break;
    case EventKind::Exit:
      j["ev"] = "exit";
      j["code"] = ev.code.value_or(0);
      j["duration_s"] = ev.duration_s.value_or(0.0);
      if (ev.timeout) j["timeout"] = true;
      break;
  }
  if (ev.error) j["error"] = *ev.error;
  // Child output is not guaranteed to be valid UTF-8.
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

RunEvent decode_event(std::string_view line) {
  auto j = parse_object(line, "event");
  RunEvent ev;
  try {
    auto name = j.at("ev").get<std::string>();
    if (name == "start") {
      ev.ev = EventKind::Start;
    } else if (name == "line") {
      ev.ev = EventKind::Line;
      auto stream = j.at("stream").get<std::string>();
      if (stream == "out") {
        ev.stream = OutStream::Out;
      } else if (stream == "err") {
        ev.stream = OutStream::Err;
      } else {
        violation(fmt::format("unknown stream: {}", stream));
      }
      ev.text = j.at("text").get<std::string>();
    } else if (name == "exit") {
      ev.ev = EventKind::Exit;
      ev.code = j.at("code").get<int>();
      ev.duration_s = j.value("duration_s", 0.0);
      ev.timeout = j.value("timeout", false);
    } else {
      violation(fmt::format("unknown event: {}", name));
    }
    if (j.contains("error")) ev.error = j.at("error").get<std::string>();
  } catch (const json::exception& e) {
    violation(fmt::format("bad event: {}", e.what()));
  }
  return ev;
}

void EventGrammar::accept(const RunEvent& ev) {
  switch (state_) {
    case State::Initial:
      // A runner that fails to read its request answers with a lone exit.
      if (ev.ev == EventKind::Exit) {
        state_ = State::Done;
        return;
      }
      if (ev.ev != EventKind::Start) violation("first event must be start");
      state_ = State::Running;
      return;
    case State::Running:
      if (ev.ev == EventKind::Start) violation("duplicate start event");
      if (ev.ev == EventKind::Exit) state_ = State::Done;
      return;
    case State::Done:
      violation("event after exit");
  }
}

void EventGrammar::finish() const {
  if (state_ != State::Done) violation("event stream ended without exit");
}

}  // namespace taskbench::sandbox
