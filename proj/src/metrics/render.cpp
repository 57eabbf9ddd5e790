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

#include <nlohmann/json.hpp>

#include "taskbench/metrics.hpp"

namespace taskbench::metrics {

using nlohmann::json;

namespace {

constexpr std::string_view kDash = "–";

using Table = std::vector<std::vector<std::string>>;

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_table(const std::vector<std::string>& header, const Table& rows, Format format) {
  std::string out;
  if (format == Format::Csv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += csv_cell(cells[i]);
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
  auto line = [&](const std::vector<std::string>& cells) {
    out += '|';
    for (const auto& c : cells) out += fmt::format(" {} |", c);
    out += '\n';
  };
  line(header);
  out += '|';
  for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
  out += '\n';
  for (const auto& r : rows) line(r);
  return out;
}

std::string num(double v) { return fmt::format("{:.2f}", round_half_up(v, 2)); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(kDash); }
json jnum(const std::optional<double>& v) { return v ? json(round_half_up(*v, 2)) : json(nullptr); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

json to_json(const EvalSummary& s) {
  json cats = json::object();
  for (const auto& [c, score] : s.per_category) {
    cats[std::string(task::category_label(c))] = {{"sr_all", score.sr_all}, {"sr_any", score.sr_any}, {"n", score.n}};
  }
  return {{"model", s.model},   {"condition", condition_name(s.condition)},
          {"sr_all", s.sr_all}, {"sr_any", s.sr_any},
          {"mean_cl", s.mean_cl}, {"mean_ct", s.mean_ct},
          {"n_tasks", s.n_tasks}, {"per_category", cats}};
}

Condition parse_condition(std::string_view name) {
  for (auto c : {Condition::Original, Condition::WithAgent}) {
    if (condition_name(c) == name) return c;
  }
  throw ConfigError(fmt::format("unknown condition: {}", name));
}

EvalSummary summary_from_json(const json& j) {
  EvalSummary s;
  s.model = j.at("model").get<std::string>();
  s.condition = parse_condition(j.at("condition").get<std::string>());
  s.sr_all = j.at("sr_all").get<double>();
  s.sr_any = j.at("sr_any").get<double>();
  s.mean_cl = j.at("mean_cl").get<double>();
  s.mean_ct = j.at("mean_ct").get<double>();
  s.n_tasks = j.at("n_tasks").get<std::size_t>();
  for (const auto& [label, v] : j.at("per_category").items()) {
    s.per_category[task::parse_category(label)] = {v.at("sr_all").get<double>(), v.at("sr_any").get<double>(),
                                                   v.at("n").get<std::size_t>()};
  }
  return s;
}

Format parse_format(std::string_view name) {
  if (name.empty() || name == "markdown" || name == "md") return Format::Markdown;
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  throw ConfigError(fmt::format("unknown format: {}", name));
}

std::string render_report(std::span<const ComparisonRow> rows, Format format) {
  if (format == Format::Json) {
    json arr = json::array();
    for (const auto& r : rows) {
      arr.push_back({{"model", r.model},
                     {"original_sr_all", round_half_up(r.base.sr_all, 2)},
                     {"original_sr_any", round_half_up(r.base.sr_any, 2)},
                     {"with_agent_sr_all", round_half_up(r.treated.sr_all, 2)},
                     {"with_agent_sr_any", round_half_up(r.treated.sr_any, 2)},
                     {"rel_inc_sr_all", jnum(r.rel_inc_all)},
                     {"rel_inc_sr_any", jnum(r.rel_inc_any)}});
    }
    return dump(arr);
  }
  Table t;
  for (const auto& r : rows) {
    t.push_back({r.model, num(r.base.sr_all), num(r.base.sr_any), num(r.treated.sr_all),
                 num(r.treated.sr_any), num(r.rel_inc_all), num(r.rel_inc_any)});
  }
  return render_table({"Model", "Original SR@All", "Original SR@Any", "With agent SR@All",
                       "With agent SR@Any", "SR@All ↑%", "SR@Any ↑%"},
                      t, format);
}

std::string render_ranking(std::span<const EvalSummary> ranked, Format format) {
  if (format == Format::Json) {
    json arr = json::array();
    int rank = 1;
    for (const auto& s : ranked) {
      arr.push_back({{"model", s.model},
                     {"condition", condition_name(s.condition)},
                     {"code_lines", round_half_up(s.mean_cl, 2)},
                     {"code_tokens", round_half_up(s.mean_ct, 2)},
                     {"rank", rank++}});
    }
    return dump(arr);
  }
  Table t;
  int rank = 1;
  for (const auto& s : ranked) {
    t.push_back({s.model, std::string(condition_name(s.condition)), num(s.mean_cl), num(s.mean_ct),
                 std::to_string(rank++)});
  }
  return render_table({"Model", "Condition", "Code Lines (CL)", "Code Tokens (CT)", "Rank"}, t, format);
}

std::string render_categories(std::span<const CategoryShare> shares, Format format) {
  std::size_t total = 0;
  for (const auto& s : shares) total += s.count;
  if (format == Format::Json) {
    json arr = json::array();
    for (const auto& s : shares) {
      arr.push_back({{"category", task::category_label(s.category)},
                     {"count", s.count},
                     {"percent", s.percent}});
    }
    return dump({{"categories", arr}, {"total", total}});
  }
  Table t;
  for (const auto& s : shares) {
    t.push_back({std::string(task::category_label(s.category)), std::to_string(s.count),
                 fmt::format("{:.1f}%", s.percent)});
  }
  t.push_back({"Total", std::to_string(total), "100%"});
  return render_table({"Category", "Cnt.", "%"}, t, format);
}

std::string render_breakdown(std::span<const EvalSummary> summaries, Format format) {
  if (format == Format::Json) {
    json arr = json::array();
    for (const auto& s : summaries) {
      json cats = json::object();
      for (auto c : task::kCategories) {
        auto it = s.per_category.find(c);
        if (it == s.per_category.end() || it->second.n == 0) {
          cats[std::string(task::category_label(c))] = nullptr;
        } else {
          cats[std::string(task::category_label(c))] = {{"sr_all", round_half_up(it->second.sr_all, 2)},
                                                         {"sr_any", round_half_up(it->second.sr_any, 2)},
                                                         {"n", it->second.n}};
        }
      }
      arr.push_back({{"model", s.model}, {"condition", condition_name(s.condition)}, {"per_category", cats}});
    }
    return dump(arr);
  }
  std::vector<std::string> header = {"Model", "Condition"};
  for (auto c : task::kCategories) header.emplace_back(task::category_label(c));
  Table t;
  for (const auto& s : summaries) {
    std::vector<std::string> row = {s.model, std::string(condition_name(s.condition))};
    for (auto c : task::kCategories) {
      auto it = s.per_category.find(c);
      if (it == s.per_category.end() || it->second.n == 0) {
        row.emplace_back(kDash);
      } else {
        row.push_back(fmt::format("{} / {}", num(it->second.sr_all), num(it->second.sr_any)));
      }
    }
    t.push_back(std::move(row));
  }
  return render_table(header, t, format);
}

}  // namespace taskbench::metrics
