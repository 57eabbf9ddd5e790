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

#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "taskbench/sandbox.hpp"

namespace taskbench::sandbox {

void to_json(nlohmann::json& j, const TestCaseVerdict& v);
void from_json(const nlohmann::json& j, TestCaseVerdict& v);
void to_json(nlohmann::json& j, const TracebackInfo& t);
void from_json(const nlohmann::json& j, TracebackInfo& t);
void to_json(nlohmann::json& j, const ExecutionReport& r);
void from_json(const nlohmann::json& j, ExecutionReport& r);

/// One report per line, in the given order.
void write_reports(const std::filesystem::path& path, std::span<const ExecutionReport> reports);
void append_report(const std::filesystem::path& path, const ExecutionReport& report);
std::vector<ExecutionReport> read_reports(const std::filesystem::path& path);

/// `<root>/runs/<model>/<stamp>`, with path separators in `model` replaced.
std::filesystem::path run_directory(const std::filesystem::path& root, const std::string& model,
                                    const std::string& stamp);

}  // namespace taskbench::sandbox
