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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taskbench/error.hpp"
#include "taskbench/sandbox.hpp"
#include "taskbench/task.hpp"

namespace taskbench::metrics {

enum class MetricsErrorKind { EmptyInput, BaseZero, UnknownTask };

class MetricsError : public Error {
 public:
  MetricsError(MetricsErrorKind kind, const std::string& what) : Error(what), kind_(kind) {}
  MetricsErrorKind kind() const { return kind_; }

 private:
  MetricsErrorKind kind_;
};

/// Rounds half away from zero, tolerating binary representation error
/// (2.675 rounds to 2.68).
double round_half_up(double value, int decimals);

/// Percent of reports with every case passed. Throws EmptyInput.
double sr_all(std::span<const sandbox::ExecutionReport> reports);
/// Percent of reports with at least one case passed. Throws EmptyInput.
double sr_any(std::span<const sandbox::ExecutionReport> reports);

/// 100 * (treated - base) / base at 2 decimals. Throws BaseZero.
double relative_increase(double base, double treated);

enum class Condition { Original, WithAgent };
std::string_view condition_name(Condition c);

/// One report per task: attempt 0 for Original, the last attempt for
/// WithAgent. Output is sorted by task id.
std::vector<sandbox::ExecutionReport> select_final(std::span<const sandbox::ExecutionReport> reports,
                                                   Condition condition);

struct CategoryScore {
  double sr_all = 0.0;
  double sr_any = 0.0;
  std::size_t n = 0;

  bool operator==(const CategoryScore&) const = default;
};

struct EvalSummary {
  std::string model;
  Condition condition = Condition::Original;
  double sr_all = 0.0;
  double sr_any = 0.0;
  double mean_cl = 0.0;
  double mean_ct = 0.0;
  std::size_t n_tasks = 0;
  std::map<task::Category, CategoryScore> per_category;

  bool operator==(const EvalSummary&) const = default;
};

/// Aggregates one report per task. `categories` maps task id to category
/// (missing ids throw UnknownTask); `stats` holds the code statistics of the
/// scored program per task id, and tasks without stats are left out of the
/// CL/CT means.
EvalSummary summarize(std::string model, Condition condition,
                      std::span<const sandbox::ExecutionReport> reports,
                      const std::map<std::string, task::Category>& categories,
                      const std::map<std::string, task::CodeStats>& stats = {});

struct ComparisonRow {
  std::string model;
  EvalSummary base;
  EvalSummary treated;
  /// Absent when the base rate is zero.
  std::optional<double> rel_inc_all;
  std::optional<double> rel_inc_any;
};

/// Relative increases are taken between the 2-decimal SR values, the same
/// precision the tables publish.
ComparisonRow compare(const EvalSummary& base, const EvalSummary& treated);

/// Ascending mean CL, then mean CT, then model name. Rank is position + 1.
std::vector<EvalSummary> rank_models(std::vector<EvalSummary> summaries);

struct CategoryShare {
  task::Category category;
  std::size_t count = 0;
  double percent = 0.0;  // 1 decimal
};

/// All seven categories in canonical order. Throws EmptyInput on an empty
/// corpus.
std::vector<CategoryShare> category_distribution(std::span<const task::TaskSpec> corpus);
std::vector<CategoryShare> category_distribution(const std::map<task::Category, std::size_t>& counts);

/// Unrounded values, for reading summaries back.
nlohmann::json to_json(const EvalSummary& s);
EvalSummary summary_from_json(const nlohmann::json& j);
Condition parse_condition(std::string_view name);

enum class Format { Markdown, Json, Csv };

/// "" and "markdown" give Markdown. Throws ConfigError otherwise.
Format parse_format(std::string_view name);

std::string render_report(std::span<const ComparisonRow> rows, Format format);
/// Code-size table with ranks, in rank order.
std::string render_ranking(std::span<const EvalSummary> ranked, Format format);
std::string render_categories(std::span<const CategoryShare> shares, Format format);
/// Per-category SR@All / SR@Any for each summary. Categories with no tasks
/// render as an en dash.
std::string render_breakdown(std::span<const EvalSummary> summaries, Format format);

}  // namespace taskbench::metrics
