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

#include "taskbench/fileio.hpp"
#include "taskbench/llm.hpp"

namespace taskbench::llm {

using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

}  // namespace

void Journal::record(const CompletionRequest& req, const CompletionResult& res) {
  // Latency is wall-clock noise; leave it out so journals are reproducible.
  auto r = to_json(res);
  r.erase("latency_ms");
  json j = {{"key", request_key(req)}, {"request", to_json(req)}, {"result", r}};
  std::lock_guard lock(mu_);
  append_line(path_, dump(j));
}

void Journal::record_error(const CompletionRequest& req, const LlmError& err) {
  json j = {{"key", request_key(req)},
            {"request", to_json(req)},
            {"error", {{"kind", error_kind_name(err.kind())}, {"message", err.what()}}}};
  std::lock_guard lock(mu_);
  append_line(path_, dump(j));
}

ReplayProvider::ReplayProvider(const std::filesystem::path& journal) {
  std::size_t lineno = 0;
  for (const auto& line : read_lines(journal)) {
    ++lineno;
    try {
      auto j = json::parse(line);
      auto req = request_from_json(j.at("request"));
      Entry e;
      if (j.contains("result")) {
        e.result = result_from_json(j.at("result"));
      } else {
        const auto& err = j.at("error");
        e.error = parse_error_kind(err.at("kind").get<std::string>());
        e.message = err.value("message", "");
      }
      // Re-derive the key so hand-edited journals stay consistent.
      entries_[request_key(req)].push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw ConfigError(fmt::format("{}:{}: bad journal line: {}", journal.string(), lineno, ex.what()));
    }
  }
}

CompletionResult ReplayProvider::complete(const CompletionRequest& req) {
  auto key = request_key(req);
  Entry e;
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      throw LlmError(LlmErrorKind::ReplayMiss,
                     fmt::format("request tagged '{}' is not in the journal", req.tag));
    }
    auto& pos = cursor_[key];
    e = it->second[pos];
    if (pos + 1 < it->second.size()) ++pos;
  }
  if (e.error) throw LlmError(*e.error, e.message);
  auto res = *e.result;
  res.latency_ms = 0.0;
  return res;
}

}  // namespace taskbench::llm
