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
#include <vector>

#include "taskbench/task.hpp"

namespace taskbench::task {

void to_json(nlohmann::json& j, const SourceMeta& m);
void from_json(const nlohmann::json& j, SourceMeta& m);

TaskMetadata metadata_from_json(const nlohmann::json& j);
nlohmann::json metadata_to_json(const TaskSpec& task);

/// One corpus index line.
nlohmann::json summary_json(const TaskSpec& task);

/// Loads `<file>` with its sidecar `<stem>.meta.json`.
TaskSpec load_task(const std::filesystem::path& file);

/// Loads every task listed in `<dir>/index.jsonl`, or every `*.py` with a
/// sidecar when there is no index. Tasks come back sorted by id; duplicate
/// ids are an error.
std::vector<TaskSpec> load_corpus(const std::filesystem::path& dir);

/// Writes `<id>.py`, `<id>.meta.json` and `index.jsonl` under `dir`.
void write_corpus(const std::filesystem::path& dir, std::span<const TaskSpec> tasks);

}  // namespace taskbench::task
