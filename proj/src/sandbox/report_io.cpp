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

#include "taskbench/report_io.hpp"

#include <fmt/format.h>

#include "taskbench/fileio.hpp"

namespace taskbench::sandbox {

using nlohmann::json;

void to_json(json& j, const TestCaseVerdict& v) {
  j = {{"index", v.index}, {"status", status_name(v.status)}, {"detail", v.detail}};
}

void from_json(const json& j, TestCaseVerdict& v) {
  v.index = j.at("index").get<int>();
  v.status = parse_status(j.at("status").get<std::string>());
  v.detail = j.value("detail", "");
}

void to_json(json& j, const TracebackInfo& t) {
  json frames = json::array();
  for (const auto& f : t.frames) {
    frames.push_back(
        {{"file", f.file}, {"line", f.line}, {"symbol", f.symbol}, {"source_line", f.source_line}});
  }
  j = {{"exception_type", t.exception_type},
       {"message", t.message},
       {"frames", frames},
       {"raw", t.raw}};
}

void from_json(const json& j, TracebackInfo& t) {
  t.exception_type = j.value("exception_type", "");
  t.message = j.value("message", "");
  t.raw = j.value("raw", "");
  t.frames.clear();
  for (const auto& f : j.value("frames", json::array())) {
    t.frames.push_back({f.value("file", ""), f.value("line", 0), f.value("symbol", ""),
                        f.value("source_line", "")});
  }
}

void to_json(json& j, const ExecutionReport& r) {
  j = {{"task_id", r.task_id},
       {"attempt", r.attempt},
       {"verdicts", r.verdicts},
       {"all_passed", r.all_passed()},
       {"any_passed", r.any_passed()},
       {"stdout", r.stdout_text},
       {"stderr", r.stderr_text},
       {"traceback", r.traceback ? json(*r.traceback) : json(nullptr)},
       {"exit_code", r.exit_code},
       {"duration_s", r.duration_s},
       {"truncated", r.truncated},
       {"timed_out", r.timed_out},
       {"gpu_visible", r.gpu_visible},
       {"error", r.error ? json(*r.error) : json(nullptr)}};
}

void from_json(const json& j, ExecutionReport& r) {
  r.task_id = j.at("task_id").get<std::string>();
  r.attempt = j.value("attempt", 0);
  r.verdicts = j.value("verdicts", std::vector<TestCaseVerdict>{});
  r.stdout_text = j.value("stdout", "");
  r.stderr_text = j.value("stderr", "");
  r.traceback.reset();
  if (j.contains("traceback") && !j.at("traceback").is_null()) {
    r.traceback = j.at("traceback").get<TracebackInfo>();
  }
  r.exit_code = j.value("exit_code", 0);
  r.duration_s = j.value("duration_s", 0.0);
  r.truncated = j.value("truncated", false);
  r.timed_out = j.value("timed_out", false);
  r.gpu_visible = j.value("gpu_visible", false);
  r.error.reset();
  if (j.contains("error") && !j.at("error").is_null()) r.error = j.at("error").get<std::string>();
}

namespace {

std::string dump_line(const ExecutionReport& r) {
  return json(r).dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace

void write_reports(const std::filesystem::path& path, std::span<const ExecutionReport> reports) {
  std::string out;
  for (const auto& r : reports) out += dump_line(r) + "\n";
  write_file(path, out);
}

void append_report(const std::filesystem::path& path, const ExecutionReport& report) {
  append_line(path, dump_line(report));
}

std::vector<ExecutionReport> read_reports(const std::filesystem::path& path) {
  std::vector<ExecutionReport> out;
  for (const auto& line : read_lines(path)) {
    try {
      out.push_back(json::parse(line).get<ExecutionReport>());
    } catch (const json::exception& e) {
      throw Error(fmt::format("{}: bad report line: {}", path.string(), e.what()));
    }
  }
  return out;
}

std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& model,
                                    const std::string& stamp) {
  std::string safe = model;
  for (char& c : safe) {
    if (c == '/' || c == '\\' || c == ':') c = '_';
  }
  return root / "runs" / safe / stamp;
}

}  // namespace taskbench::sandbox
