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

#include "taskbench/corpus.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

#include "taskbench/fileio.hpp"

namespace taskbench::task {

namespace fs = std::filesystem;
using nlohmann::json;

void to_json(json& j, const SourceMeta& m) {
  j = json{{"domain", m.domain},
           {"model_name", m.model_name},
           {"model_description", m.model_description},
           {"example_code", m.example_code},
           {"performance_metrics", m.performance_metrics}};
}

void from_json(const json& j, SourceMeta& m) {
  m.domain = j.value("domain", "");
  m.model_name = j.value("model_name", "");
  m.model_description = j.value("model_description", "");
  m.example_code = j.value("example_code", "");
  m.performance_metrics.clear();
  if (auto it = j.find("performance_metrics"); it != j.end() && it->is_object()) {
    for (const auto& [k, v] : it->items()) {
      m.performance_metrics[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
  }
}

TaskMetadata metadata_from_json(const json& j) {
  TaskMetadata meta;
  meta.id = j.at("id").get<std::string>();
  meta.category = j.at("category").get<std::string>();
  if (auto it = j.find("instruction"); it != j.end() && it->is_string()) {
    meta.instruction = it->get<std::string>();
  }
  if (auto it = j.find("source"); it != j.end() && it->is_object()) {
    meta.source = it->get<SourceMeta>();
  }
  return meta;
}

json metadata_to_json(const TaskSpec& task) {
  return json{{"id", task.id},
              {"category", std::string(category_label(task.category))},
              {"instruction", task.instruction},
              {"source", task.source}};
}

json summary_json(const TaskSpec& task) {
  return json{{"id", task.id},
              {"category", std::string(category_label(task.category))},
              {"file", task.id + ".py"},
              {"instruction", task.instruction},
              {"num_test_cases", task.num_test_cases},
              {"heuristic", task.sections.heuristic}};
}

TaskSpec load_task(const fs::path& file) {
  auto meta_path = file;
  meta_path.replace_extension(".meta.json");
  auto meta = metadata_from_json(json::parse(read_file(meta_path)));
  return parse_task_file(read_file(file), meta);
}

std::vector<TaskSpec> load_corpus(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(fmt::format("corpus directory {} not found", dir.string()));
  std::vector<fs::path> files;
  auto index = dir / "index.jsonl";
  if (fs::exists(index)) {
    for (const auto& line : read_lines(index)) {
      files.push_back(dir / json::parse(line).at("file").get<std::string>());
    }
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".py") continue;
      auto meta = entry.path();
      meta.replace_extension(".meta.json");
      if (fs::exists(meta)) files.push_back(entry.path());
    }
  }
  std::vector<TaskSpec> tasks;
  std::set<std::string> ids;
  for (const auto& f : files) {
    auto task = load_task(f);
    if (task.id.empty()) throw Error(fmt::format("{}: empty task id", f.string()));
    if (!ids.insert(task.id).second) throw Error(fmt::format("duplicate task id {}", task.id));
    tasks.push_back(std::move(task));
  }
  std::sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return tasks;
}

void write_corpus(const fs::path& dir, std::span<const TaskSpec> tasks) {
  fs::create_directories(dir);
  std::string index;
  for (const auto& t : tasks) {
    write_file(dir / (t.id + ".py"), t.sections.reconstruct());
    write_file(dir / (t.id + ".meta.json"), metadata_to_json(t).dump(2) + "\n");
    index += summary_json(t).dump() + "\n";
  }
  write_file(dir / "index.jsonl", index);
}

}  // namespace taskbench::task
