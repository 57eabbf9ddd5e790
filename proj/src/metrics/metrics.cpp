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

#include "taskbench/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace taskbench::metrics {

using sandbox::ExecutionReport;

double round_half_up(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  double scaled = std::fabs(value) * scale;
  // Nudge values a few ulps below a .5 boundary (e.g. 2.675) back onto it.
  double rounded = std::floor(scaled + 0.5 + 1e-9 * std::max(1.0, scaled));
  return std::copysign(rounded / scale, value);
}

namespace {

template <class Pred>
double success_rate(std::span<const ExecutionReport> reports, Pred pred) {
  if (reports.empty()) throw MetricsError(MetricsErrorKind::EmptyInput, "no reports to score");
  std::size_t hits = 0;
  for (const auto& r : reports) hits += pred(r) ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(reports.size());
}

}  // namespace

double sr_all(std::span<const ExecutionReport> reports) {
  return success_rate(reports, [](const ExecutionReport& r) { return r.all_passed(); });
}

double sr_any(std::span<const ExecutionReport> reports) {
  return success_rate(reports, [](const ExecutionReport& r) { return r.any_passed(); });
}

double relative_increase(double base, double treated) {
  if (base == 0.0) throw MetricsError(MetricsErrorKind::BaseZero, "relative increase over zero base");
  return round_half_up(100.0 * (treated - base) / base, 2);
}

std::string_view condition_name(Condition c) {
  return c == Condition::Original ? "original" : "with_agent";
}

std::vector<ExecutionReport> select_final(std::span<const ExecutionReport> reports,
                                          Condition condition) {
  std::map<std::string, const ExecutionReport*> chosen;
  for (const auto& r : reports) {
    auto& slot = chosen[r.task_id];
    if (condition == Condition::Original) {
      if (r.attempt == 0) slot = &r;
    } else if (!slot || r.attempt > slot->attempt) {
      slot = &r;
    }
  }
  std::vector<ExecutionReport> out;
  for (const auto& [id, r] : chosen) {
    if (r) out.push_back(*r);
  }
  return out;
}

EvalSummary summarize(std::string model, Condition condition,
                      std::span<const ExecutionReport> reports,
                      const std::map<std::string, task::Category>& categories,
                      const std::map<std::string, task::CodeStats>& stats) {
  EvalSummary s;
  s.model = std::move(model);
  s.condition = condition;
  s.sr_all = sr_all(reports);
  s.sr_any = sr_any(reports);
  s.n_tasks = reports.size();

  std::map<task::Category, std::vector<ExecutionReport>> by_cat;
  double cl = 0, ct = 0;
  std::size_t with_stats = 0;
  for (const auto& r : reports) {
    auto it = categories.find(r.task_id);
    if (it == categories.end()) {
      throw MetricsError(MetricsErrorKind::UnknownTask, fmt::format("no category for task {}", r.task_id));
    }
    by_cat[it->second].push_back(r);
    if (auto st = stats.find(r.task_id); st != stats.end()) {
      cl += static_cast<double>(st->second.code_lines);
      ct += static_cast<double>(st->second.code_tokens);
      ++with_stats;
    }
  }
  if (with_stats > 0) {
    s.mean_cl = cl / static_cast<double>(with_stats);
    s.mean_ct = ct / static_cast<double>(with_stats);
  }
  for (const auto& [cat, rs] : by_cat) s.per_category[cat] = {sr_all(rs), sr_any(rs), rs.size()};
  return s;
}

ComparisonRow compare(const EvalSummary& base, const EvalSummary& treated) {
  ComparisonRow row{base.model, base, treated, std::nullopt, std::nullopt};
  auto rel = [](double b, double t) -> std::optional<double> {
    b = round_half_up(b, 2);
    t = round_half_up(t, 2);
    if (b == 0.0) return std::nullopt;
    return relative_increase(b, t);
  };
  row.rel_inc_all = rel(base.sr_all, treated.sr_all);
  row.rel_inc_any = rel(base.sr_any, treated.sr_any);
  return row;
}

std::vector<EvalSummary> rank_models(std::vector<EvalSummary> summaries) {
  std::stable_sort(summaries.begin(), summaries.end(), [](const EvalSummary& a, const EvalSummary& b) {
    if (a.mean_cl != b.mean_cl) return a.mean_cl < b.mean_cl;
    if (a.mean_ct != b.mean_ct) return a.mean_ct < b.mean_ct;
    return a.model < b.model;
  });
  return summaries;
}

std::vector<CategoryShare> category_distribution(const std::map<task::Category, std::size_t>& counts) {
  std::size_t total = 0;
  for (const auto& [c, n] : counts) total += n;
  if (total == 0) throw MetricsError(MetricsErrorKind::EmptyInput, "empty corpus");
  std::vector<CategoryShare> out;
  for (auto c : task::kCategories) {
    auto it = counts.find(c);
    std::size_t n = it == counts.end() ? 0 : it->second;
    out.push_back({c, n, round_half_up(100.0 * static_cast<double>(n) / static_cast<double>(total), 1)});
  }
  return out;
}

std::vector<CategoryShare> category_distribution(std::span<const task::TaskSpec> corpus) {
  std::map<task::Category, std::size_t> counts;
  for (const auto& t : corpus) ++counts[t.category];
  return category_distribution(counts);
}

}  // namespace taskbench::metrics
