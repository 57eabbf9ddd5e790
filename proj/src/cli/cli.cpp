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

#include "taskbench/cli.hpp"

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <csignal>
#include <ctime>
#include <exception>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>
#include <set>
#include <thread>

#include "taskbench/corpus.hpp"
#include "taskbench/curation.hpp"
#include "taskbench/fileio.hpp"
#include "taskbench/metrics.hpp"
#include "taskbench/repair.hpp"
#include "taskbench/report_io.hpp"
#include "taskbench/text.hpp"

namespace taskbench::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using sandbox::ExecutionReport;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

struct Context {
  RunConfig cfg;
  std::ostream& out;
  std::ostream& err;
  const std::atomic<bool>* stop;

  bool stopped() const { return stop && stop->load(); }
};

// Runs fn(i) for i in [0, n) on up to `workers` threads; the first exception
// is rethrown after every thread has finished.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  auto work = [&] {
    for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    }
  };
  int k = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  std::vector<std::thread> threads;
  for (int t = 1; t < k; ++t) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string utc_stamp() {
  std::time_t now = std::time(nullptr);
  return fmt::format("{:%Y%m%dT%H%M%SZ}", fmt::gmtime(now));
}

fs::path fresh_run_dir(const RunConfig& cfg, const std::string& model) {
  auto base = sandbox::run_directory(cfg.out, model, fmt::format("{}-{}", utc_stamp(), cfg.seed));
  auto dir = base;
  for (int n = 2; fs::exists(dir); ++n) dir = fs::path(base.string() + "-" + std::to_string(n));
  fs::create_directories(dir);
  return dir;
}

sandbox::SandboxLimits limits_of(const RunConfig& cfg) {
  sandbox::SandboxLimits l;
  l.wall_clock_timeout_s = cfg.timeout_s;
  l.allow_install = !cfg.no_install;
  l.validate();
  return l;
}

std::string ext_of(metrics::Format f) {
  switch (f) {
    case metrics::Format::Json: return "json";
    case metrics::Format::Csv: return "csv";
    case metrics::Format::Markdown: break;
  }
  return "md";
}

// Joins titled tables into one document in the requested format.
std::string compose(const std::vector<std::pair<std::string, std::string>>& sections, metrics::Format f) {
  if (f == metrics::Format::Json) {
    json j = json::object();
    for (const auto& [title, body] : sections) j[title] = json::parse(body);
    return j.dump(2) + "\n";
  }
  std::string out;
  for (const auto& [title, body] : sections) {
    if (!out.empty()) out += "\n";
    out += f == metrics::Format::Markdown ? fmt::format("## {}\n\n{}", title, body)
                                          : fmt::format("# {}\n{}", title, body);
  }
  return out;
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  std::string s;
  for (const auto& r : rows) s += r.dump() + "\n";
  write_file(path, s);
}

// Sorts journal lines by request key (stable), so worker interleaving does
// not leak into the artifact.
void canonicalize_journal(const fs::path& path) {
  if (!fs::exists(path)) return;
  auto lines = read_lines(path);
  std::vector<std::pair<std::string, std::string>> keyed;
  for (auto& l : lines) {
    if (text::is_blank(l)) continue;
    keyed.emplace_back(json::parse(l).value("key", ""), std::move(l));
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::string s;
  for (const auto& [k, l] : keyed) s += l + "\n";
  write_file(path, s);
}

ExecutionReport unrun_report(const task::TaskSpec& t, int attempt, std::string error) {
  ExecutionReport r;
  r.task_id = t.id;
  r.attempt = attempt;
  r.exit_code = -1;
  r.error = std::move(error);
  for (int i = 1; i <= t.num_test_cases; ++i) r.verdicts.push_back({i, sandbox::VerdictStatus::NotReached, ""});
  return r;
}

std::vector<task::TaskSpec> load_tasks(const RunConfig& cfg) {
  if (cfg.corpus.empty()) throw ConfigError("--corpus is required");
  if (!fs::is_directory(cfg.corpus)) throw ConfigError(fmt::format("corpus not found: {}", cfg.corpus.string()));
  auto tasks = task::load_corpus(cfg.corpus);
  if (tasks.empty()) throw ConfigError(fmt::format("corpus is empty: {}", cfg.corpus.string()));
  return tasks;
}

// Processing order only; every artifact is sorted by task id.
std::vector<std::size_t> shuffled(std::size_t n, unsigned seed) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::mt19937 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

struct Engine {
  llm::Profile profile;
  std::string model;
  std::shared_ptr<llm::Gateway> gateway;
  std::shared_ptr<sandbox::Sandbox> sandbox;
};

llm::Profile profile_of(const RunConfig& cfg) {
  if (cfg.profile.empty()) throw ConfigError("--profile is required");
  return llm::load_profile(cfg.profile);
}

std::string model_of(const llm::Profile& p) { return p.model.empty() ? p.provider : p.model; }

Engine make_engine(const RunConfig& cfg, const llm::Profile& profile, const fs::path& journal) {
  Engine e;
  e.profile = profile;
  e.model = model_of(profile);
  e.gateway = std::make_shared<llm::Gateway>(llm::make_provider(profile), profile.gateway,
                                             std::make_shared<llm::Journal>(journal));
  e.sandbox = std::make_shared<sandbox::Sandbox>(sandbox::make_runner(cfg.runner));
  e.sandbox->set_record_timings(cfg.timings);
  return e;
}

json config_json(const RunConfig& c, const std::string& command) {
  return {{"command", command},         {"corpus", c.corpus.string()},  {"profile", c.profile.string()},
          {"budget", c.budget},         {"workers", c.workers},         {"timeout_s", c.timeout_s},
          {"no_install", c.no_install}, {"format", c.format},           {"seed", c.seed},
          {"runner", c.runner},         {"timings", c.timings}};
}

std::map<std::string, task::Category> categories_of(const std::vector<task::TaskSpec>& tasks) {
  std::map<std::string, task::Category> m;
  for (const auto& t : tasks) m[t.id] = t.category;
  return m;
}

json program_row(const std::string& id, int attempt, const std::string& program) {
  return {{"task_id", id}, {"attempt", attempt}, {"program", program}};
}

void write_checkpoint(const fs::path& dir, const std::vector<std::string>& pending, std::string_view why) {
  json j = {{"reason", why}, {"pending", pending}};
  write_file(dir / "checkpoint.json", j.dump(2) + "\n");
}

int cmd_evaluate(Context& c) {
  const auto& cfg = c.cfg;
  auto format = metrics::parse_format(cfg.format);
  auto tasks = load_tasks(cfg);
  auto limits = limits_of(cfg);
  auto profile = profile_of(cfg);

  if (cfg.dry_run) {
    auto dir = fresh_run_dir(cfg, model_of(profile));
    std::vector<json> rows;
    for (const auto& t : tasks) {
      llm::CompletionRequest req{profile.system, repair::generation_prompt(t), profile.params, "generate"};
      rows.push_back({{"task_id", t.id}, {"key", llm::request_key(req)}, {"request", llm::to_json(req)}});
    }
    write_jsonl(dir / "prompts.jsonl", rows);
    write_file(dir / "config.json", config_json(cfg, "evaluate").dump(2) + "\n");
    c.out << fmt::format("dry run: {} prompts written to {}\n", rows.size(), dir.string());
    return kOk;
  }

  auto dir = fresh_run_dir(cfg, model_of(profile));
  auto engine = make_engine(cfg, profile, dir / "llm_journal.jsonl");
  write_file(dir / "config.json", config_json(cfg, "evaluate").dump(2) + "\n");
  repair::Agent agent(*engine.gateway, *engine.sandbox,
                      {std::max(1, cfg.budget), limits, profile.params, profile.system});

  std::vector<std::optional<std::string>> programs(tasks.size());
  std::vector<std::optional<std::string>> failures(tasks.size());
  std::atomic<bool> exhausted{false};
  auto order = shuffled(tasks.size(), cfg.seed);
  parallel_for(order.size(), cfg.workers, [&](std::size_t k) {
    auto i = order[k];
    if (c.stopped()) return;
    if (exhausted.load()) {
      failures[i] = "provider_exhausted";
      return;
    }
    try {
      programs[i] = agent.generate_initial(tasks[i]);
    } catch (const repair::RepairError&) {
      failures[i] = "generation_empty";
    } catch (const llm::LlmError& e) {
      failures[i] = fmt::format("{}: {}", llm::error_kind_name(e.kind()), e.what());
      if (dynamic_cast<const llm::ProviderExhausted*>(&e)) exhausted.store(true);
    }
  });

  std::vector<sandbox::Job> jobs;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (programs[i]) jobs.push_back({&tasks[i], *programs[i], 0});
  }
  auto ran = sandbox::run_batch(*engine.sandbox, jobs, limits, cfg.workers, c.stop);
  std::map<std::string, ExecutionReport> by_id;
  for (auto& r : ran) by_id.emplace(r.task_id, std::move(r));

  std::vector<ExecutionReport> reports;
  std::vector<json> program_rows;
  std::map<std::string, task::CodeStats> stats;
  std::vector<std::string> pending;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    if (auto it = by_id.find(t.id); it != by_id.end()) {
      reports.push_back(it->second);
      program_rows.push_back(program_row(t.id, 0, *programs[i]));
      stats[t.id] = task::program_stats(*programs[i]);
    } else if (failures[i]) {
      reports.push_back(unrun_report(t, 0, *failures[i]));
    } else {
      pending.push_back(t.id);
    }
  }
  sandbox::write_reports(dir / "reports.jsonl", reports);
  write_jsonl(dir / "programs.jsonl", program_rows);
  canonicalize_journal(dir / "llm_journal.jsonl");
  if (!pending.empty()) {
    write_checkpoint(dir, pending, "interrupted");
    c.err << fmt::format("interrupted; {} task(s) pending, see {}\n", pending.size(), dir.string());
    return kInterrupted;
  }

  auto summary = metrics::summarize(engine.model, metrics::Condition::Original, reports, categories_of(tasks), stats);
  write_file(dir / "summary.json", json::array({metrics::to_json(summary)}).dump(2) + "\n");
  std::vector<metrics::EvalSummary> one = {summary};
  auto doc = compose({{"Per category", metrics::render_breakdown(one, format)},
                      {"Code size", metrics::render_ranking(one, format)}},
                     format);
  write_file(dir / ("report." + ext_of(format)), doc);
  c.out << fmt::format("{} original: SR@All {:.2f} SR@Any {:.2f} over {} task(s)\n{}\n", engine.model,
                       summary.sr_all, summary.sr_any, summary.n_tasks, dir.string());
  if (exhausted.load()) {
    c.err << "provider exhausted; affected tasks were scored as not reached\n";
    return kProviderExhausted;
  }
  return kOk;
}

int cmd_repair(Context& c) {
  const auto& cfg = c.cfg;
  auto format = metrics::parse_format(cfg.format);
  auto tasks = load_tasks(cfg);
  auto limits = limits_of(cfg);
  auto profile = profile_of(cfg);

  fs::path dir;
  std::map<std::string, repair::RepairSession> sessions;
  if (cfg.resume) {
    dir = *cfg.resume;
    if (!fs::is_directory(dir)) throw ConfigError(fmt::format("no run directory at {}", dir.string()));
    if (fs::exists(dir / "sessions.jsonl")) {
      for (const auto& line : read_lines(dir / "sessions.jsonl")) {
        if (text::is_blank(line)) continue;
        auto s = repair::session_from_json(json::parse(line));
        if (!s.aborted) sessions.emplace(s.task_id, std::move(s));
      }
    }
  } else {
    dir = fresh_run_dir(cfg, model_of(profile));
  }

  if (cfg.dry_run) {
    std::vector<json> rows;
    for (const auto& t : tasks) {
      llm::CompletionRequest req{profile.system, repair::generation_prompt(t), profile.params, "generate"};
      rows.push_back({{"task_id", t.id}, {"key", llm::request_key(req)}, {"request", llm::to_json(req)}});
    }
    write_jsonl(dir / "prompts.jsonl", rows);
    write_file(dir / "config.json", config_json(cfg, "repair").dump(2) + "\n");
    c.out << fmt::format("dry run: {} prompts written to {}\n", rows.size(), dir.string());
    return kOk;
  }

  auto engine = make_engine(cfg, profile, dir / "llm_journal.jsonl");
  write_file(dir / "config.json", config_json(cfg, "repair").dump(2) + "\n");
  repair::Agent agent(*engine.gateway, *engine.sandbox, {cfg.budget, limits, profile.params, profile.system});

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!sessions.count(tasks[i].id)) todo.push_back(i);
  }
  auto order = shuffled(todo.size(), cfg.seed);
  std::vector<std::optional<repair::RepairSession>> fresh(tasks.size());
  std::atomic<bool> provider_down{false};
  parallel_for(order.size(), cfg.workers, [&](std::size_t k) {
    auto i = todo[order[k]];
    if (c.stopped() || provider_down.load()) return;
    auto s = agent.run(tasks[i]);
    if (s.aborted) provider_down.store(true);
    fresh[i] = std::move(s);
  });

  std::vector<repair::RepairSession> done;
  std::vector<std::string> pending;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (auto it = sessions.find(tasks[i].id); it != sessions.end()) {
      done.push_back(it->second);
    } else if (fresh[i]) {
      done.push_back(*fresh[i]);
    } else {
      pending.push_back(tasks[i].id);
    }
  }

  std::vector<json> session_rows, program_rows;
  std::vector<ExecutionReport> all_reports;
  std::map<std::string, task::CodeStats> first_stats, final_stats;
  bool aborted = false;
  for (const auto& s : done) {
    session_rows.push_back(repair::to_json(s));
    aborted = aborted || s.aborted;
    for (const auto& a : s.attempts) {
      all_reports.push_back(a.report);
      if (!a.program.empty()) program_rows.push_back(program_row(s.task_id, a.index, a.program));
    }
    const auto& first = s.attempts.front();
    const auto& last = s.final_attempt();
    if (!first.program.empty()) first_stats[s.task_id] = task::program_stats(first.program);
    if (!last.program.empty()) final_stats[s.task_id] = task::program_stats(last.program);
  }
  write_jsonl(dir / "sessions.jsonl", session_rows);
  write_jsonl(dir / "programs.jsonl", program_rows);
  sandbox::write_reports(dir / "reports.jsonl", all_reports);
  canonicalize_journal(dir / "llm_journal.jsonl");

  if (!pending.empty()) {
    std::string why = aborted ? "provider exhausted" : "interrupted";
    write_checkpoint(dir, pending, why);
    c.err << fmt::format("{}; {} task(s) pending, resume with --resume {}\n", why, pending.size(), dir.string());
    return aborted ? kProviderExhausted : kInterrupted;
  }
  std::error_code ec;
  fs::remove(dir / "checkpoint.json", ec);

  auto cats = categories_of(tasks);
  auto base = metrics::summarize(engine.model, metrics::Condition::Original,
                                 metrics::select_final(all_reports, metrics::Condition::Original), cats, first_stats);
  auto treated = metrics::summarize(engine.model, metrics::Condition::WithAgent,
                                    metrics::select_final(all_reports, metrics::Condition::WithAgent), cats,
                                    final_stats);
  write_file(dir / "summary.json",
             json::array({metrics::to_json(base), metrics::to_json(treated)}).dump(2) + "\n");
  std::vector<metrics::ComparisonRow> rows = {metrics::compare(base, treated)};
  std::vector<metrics::EvalSummary> both = {base, treated};
  auto doc = compose({{"Success rates", metrics::render_report(rows, format)},
                      {"Per category", metrics::render_breakdown(both, format)},
                      {"Code size", metrics::render_ranking(both, format)}},
                     format);
  write_file(dir / ("comparison." + ext_of(format)), doc);

  std::map<std::string, int> outcomes;
  for (const auto& s : done) ++outcomes[repair::describe(s.outcome)];
  c.out << fmt::format("{}: SR@All {:.2f} -> {:.2f}, SR@Any {:.2f} -> {:.2f} over {} task(s)\n", engine.model,
                       base.sr_all, treated.sr_all, base.sr_any, treated.sr_any, base.n_tasks);
  for (const auto& [name, n] : outcomes) c.out << fmt::format("  {}: {}\n", name, n);
  c.out << dir.string() << "\n";
  return aborted ? kProviderExhausted : kOk;
}

int cmd_curate(Context& c) {
  const auto& cfg = c.cfg;
  auto format = metrics::parse_format(cfg.format);
  if (cfg.sources.empty()) throw ConfigError("--sources is required");
  if (!fs::is_regular_file(cfg.sources)) throw ConfigError(fmt::format("sources not found: {}", cfg.sources.string()));
  auto sources = curation::load_sources(cfg.sources);
  auto templates = cfg.templates ? curation::Templates::load(*cfg.templates) : curation::Templates::defaults();
  auto policy = curation::parse_policy(cfg.policy);
  auto profile = profile_of(cfg);
  fs::create_directories(cfg.out);

  if (cfg.dry_run) {
    std::vector<json> rows;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      json row = {{"source_index", i}, {"model_name", sources[i].model_name}};
      try {
        row["prompt"] = curation::render_generation_prompt(sources[i], templates);
      } catch (const curation::CurationError& e) {
        row["error"] = e.what();
      }
      rows.push_back(std::move(row));
    }
    write_jsonl(cfg.out / "prompts.jsonl", rows);
    c.out << fmt::format("dry run: {} prompts written to {}\n", rows.size(), cfg.out.string());
    return kOk;
  }

  auto engine = make_engine(cfg, profile, cfg.out / "llm_journal.jsonl");
  curation::CurationOptions opts;
  opts.piecewise = !cfg.single_call;
  opts.candidates_per_source = cfg.candidates_per_source;
  opts.workers = cfg.workers;
  opts.limits = limits_of(cfg);
  opts.params = profile.params;
  opts.system = profile.system;
  curation::CurationJournal journal(cfg.out / "journal.jsonl");

  std::span<const task::SourceMeta> all(sources);
  curation::PipelineResult res;
  if (cfg.target_size) {
    // Grow the processed prefix until enough benchmark tasks exist; the
    // journal keeps earlier chunks from being redone.
    std::size_t chunk = std::max<std::size_t>(8, static_cast<std::size_t>(cfg.workers) * 2);
    std::size_t upto = 0;
    do {
      upto = std::min(upto + chunk, sources.size());
      res = curation::run_pipeline(all.first(upto), *engine.gateway, *engine.sandbox, templates, opts, journal, c.stop);
    } while (upto < sources.size() && res.funnel.benchmark < *cfg.target_size && !c.stopped());
  } else {
    res = curation::run_pipeline(all, *engine.gateway, *engine.sandbox, templates, opts, journal, c.stop);
  }

  auto bench = curation::benchmark_tasks(res.records, cfg.target_size);
  task::write_corpus(cfg.out / "corpus", bench);
  auto pool = policy == curation::ExportPolicy::BenchmarkOnly ? bench : curation::stage1_tasks(res.records);
  std::string train;
  for (const auto& t : pool) {
    try {
      auto p = curation::training_pair(t);
      train += json{{"task_id", p.task_id}, {"instruction", p.instruction}, {"completion", p.completion}}.dump() + "\n";
    } catch (const curation::CurationError& e) {
      c.err << fmt::format("skipping training pair: {}\n", e.what());
    }
  }
  write_file(cfg.out / "train.jsonl", train);

  std::vector<json> records, quarantine;
  for (const auto& r : res.records) records.push_back(curation::to_json(r));
  for (const auto& q : res.quarantine) {
    quarantine.push_back({{"source_index", q.source_index}, {"source", q.source}, {"reason", q.reason}});
  }
  write_jsonl(cfg.out / "candidates.jsonl", records);
  write_jsonl(cfg.out / "quarantine.jsonl", quarantine);
  canonicalize_journal(cfg.out / "llm_journal.jsonl");
  auto funnel = curation::render_funnel(res.funnel, format);
  write_file(cfg.out / ("funnel." + ext_of(format)), funnel);
  if (!bench.empty()) {
    auto shares = metrics::category_distribution(bench);
    write_file(cfg.out / ("categories." + ext_of(format)), metrics::render_categories(shares, format));
  }
  c.out << funnel;

  if (c.stopped()) {
    c.err << "interrupted; rerun the same command to resume from the journal\n";
    return kInterrupted;
  }
  if (res.provider_failures > 0) {
    c.err << fmt::format("{} candidate(s) lost to provider errors; rerun to retry them\n", res.provider_failures);
    return kProviderExhausted;
  }
  return kOk;
}

int cmd_report(Context& c, bool out_given) {
  const auto& cfg = c.cfg;
  auto format = metrics::parse_format(cfg.format);
  if (cfg.runs.empty() && cfg.corpus.empty()) throw ConfigError("report needs run directories or --corpus");

  std::vector<metrics::EvalSummary> summaries;
  for (const auto& run : cfg.runs) {
    auto file = run / "summary.json";
    if (!fs::exists(file)) throw ConfigError(fmt::format("no summary.json in {}", run.string()));
    for (const auto& j : json::parse(read_file(file))) summaries.push_back(metrics::summary_from_json(j));
  }

  std::vector<std::pair<std::string, std::string>> sections;
  if (!summaries.empty()) {
    std::map<std::string, std::map<metrics::Condition, metrics::EvalSummary>> by_model;
    for (const auto& s : summaries) by_model[s.model][s.condition] = s;
    std::vector<metrics::ComparisonRow> rows;
    for (const auto& [model, conds] : by_model) {
      auto o = conds.find(metrics::Condition::Original);
      auto w = conds.find(metrics::Condition::WithAgent);
      if (o != conds.end() && w != conds.end()) rows.push_back(metrics::compare(o->second, w->second));
    }
    if (!rows.empty()) sections.emplace_back("Success rates", metrics::render_report(rows, format));
    sections.emplace_back("Per category", metrics::render_breakdown(summaries, format));
    sections.emplace_back("Code size", metrics::render_ranking(metrics::rank_models(summaries), format));
  }
  if (!cfg.corpus.empty()) {
    auto tasks = load_tasks(cfg);
    sections.emplace_back("Categories", metrics::render_categories(metrics::category_distribution(tasks), format));
  }
  auto doc = compose(sections, format);
  if (out_given) {
    write_file(cfg.out, doc);
  } else {
    c.out << doc;
  }
  return kOk;
}

// Fills settings the command line left alone from a JSON config file.
// Relative paths resolve against the file's directory.
void merge_config(RunConfig& cfg, const fs::path& file, const std::set<std::string>& given) {
  json j;
  try {
    j = json::parse(read_file(file));
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("{}: {}", file.string(), e.what()));
  }
  if (!j.is_object()) throw ConfigError(fmt::format("{}: expected a JSON object", file.string()));
  auto base = file.parent_path();
  auto path_of = [&](const json& v) {
    fs::path p = v.get<std::string>();
    return p.is_relative() ? base / p : p;
  };
  static const std::set<std::string> kKnown = {
      "corpus", "profile", "budget",  "workers", "timeout_s", "no_install", "format",
      "out",    "seed",    "dry_run", "runner",  "timings",   "sources",    "target_size",
      "policy", "candidates_per_source", "single_call", "templates"};
  for (const auto& [key, v] : j.items()) {
    if (!kKnown.count(key)) throw ConfigError(fmt::format("{}: unknown key '{}'", file.string(), key));
    if (given.count(key)) continue;
    try {
      if (key == "corpus") cfg.corpus = path_of(v);
      else if (key == "profile") cfg.profile = path_of(v);
      else if (key == "budget") cfg.budget = v.get<int>();
      else if (key == "workers") cfg.workers = v.get<int>();
      else if (key == "timeout_s") cfg.timeout_s = v.get<double>();
      else if (key == "no_install") cfg.no_install = v.get<bool>();
      else if (key == "format") cfg.format = v.get<std::string>();
      else if (key == "out") cfg.out = path_of(v);
      else if (key == "seed") cfg.seed = v.get<unsigned>();
      else if (key == "dry_run") cfg.dry_run = v.get<bool>();
      else if (key == "runner") cfg.runner = v.get<std::string>();
      else if (key == "timings") cfg.timings = v.get<bool>();
      else if (key == "sources") cfg.sources = path_of(v);
      else if (key == "target_size") cfg.target_size = v.get<std::size_t>();
      else if (key == "policy") cfg.policy = v.get<std::string>();
      else if (key == "candidates_per_source") cfg.candidates_per_source = v.get<int>();
      else if (key == "single_call") cfg.single_call = v.get<bool>();
      else if (key == "templates") cfg.templates = path_of(v);
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("{}: bad value for '{}': {}", file.string(), key, e.what()));
    }
  }
}

std::string key_of(const CLI::Option* opt) {
  std::string name = opt->get_name(false, true);
  auto pos = name.find_first_not_of('-');
  name = pos == std::string::npos ? name : name.substr(pos);
  std::replace(name.begin(), name.end(), '-', '_');
  return name;
}

}  // namespace

void RunConfig::validate(const std::string& command) const {
  if (workers < 1) throw ConfigError(fmt::format("--workers must be at least 1, got {}", workers));
  if (command == "repair" && budget < 1) throw ConfigError(fmt::format("--budget must be at least 1, got {}", budget));
  if (!(timeout_s > 0)) throw ConfigError("--timeout-s must be positive");
  if (candidates_per_source < 1) throw ConfigError("--candidates-per-source must be at least 1");
  if (target_size && *target_size == 0) throw ConfigError("--target-size must be at least 1");
  metrics::parse_format(format);
  curation::parse_policy(policy);
}

const std::atomic<bool>* install_signal_handlers() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  return &g_stop;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
        const std::atomic<bool>* stop) {
  CLI::App app{"Evaluate, repair and curate executable code-generation tasks."};
  app.name("taskbench");
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_file, corpus, profile, out_dir, sources, templates, resume;
  std::size_t target_size = 0;
  std::vector<std::string> runs;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", config_file, "JSON file with defaults for any flag");
    s->add_option("--format", cfg.format, "markdown, json or csv");
    s->add_option("--seed", cfg.seed, "Seed for processing order; part of the run directory name");
    s->add_option("--workers", cfg.workers, "Parallel sandbox/provider workers");
  };
  auto exec = [&](CLI::App* s) {
    s->add_option("--profile", profile, "Model profile (JSON)");
    s->add_option("--timeout-s", cfg.timeout_s, "Wall-clock limit per program run");
    s->add_flag("--no-install", cfg.no_install, "Skip the task's package install block");
    s->add_option("--runner", cfg.runner, "process | shim[:cmd args] | scripted:<file>");
    s->add_flag("--dry-run", cfg.dry_run, "Write prompts only; no provider calls or execution");
    s->add_flag("--timings", cfg.timings, "Record wall-clock durations in reports");
  };

  auto* evaluate = app.add_subcommand("evaluate", "Generate one program per task and score it");
  common(evaluate);
  exec(evaluate);
  evaluate->add_option("--corpus", corpus, "Task corpus directory");
  evaluate->add_option("--out", out_dir, "Root for run directories (default: out)");
  evaluate->add_option("--budget", cfg.budget, "Unused by evaluate; accepted for shared configs");

  auto* repair_cmd = app.add_subcommand("repair", "Run the repair loop per task and compare conditions");
  common(repair_cmd);
  exec(repair_cmd);
  repair_cmd->add_option("--corpus", corpus, "Task corpus directory");
  repair_cmd->add_option("--out", out_dir, "Root for run directories (default: out)");
  repair_cmd->add_option("--budget", cfg.budget, "Repair rounds after the first attempt (>= 1)");
  repair_cmd->add_option("--resume", resume, "Continue an interrupted run directory");

  auto* curate = app.add_subcommand("curate", "Generate, execute and filter candidate tasks");
  common(curate);
  exec(curate);
  curate->add_option("--sources", sources, "Source metadata, one JSON record per line");
  curate->add_option("--out", out_dir, "Output directory (corpus/, train.jsonl, ...)");
  curate->add_option("--target-size", target_size, "Stop once this many benchmark tasks exist");
  curate->add_option("--policy", cfg.policy, "Training export: benchmark | stage1");
  curate->add_option("--candidates-per-source", cfg.candidates_per_source, "Candidates per source record");
  curate->add_flag("--single-call", cfg.single_call, "Ask for the whole file in one completion");
  curate->add_option("--templates", templates, "Directory of prompt template overrides");

  auto* report = app.add_subcommand("report", "Render tables from finished runs");
  report->add_option("runs", runs, "Run directories holding summary.json");
  report->add_option("--corpus", corpus, "Corpus for the category table");
  report->add_option("--format", cfg.format, "markdown, json or csv");
  report->add_option("--out", out_dir, "Write to this file instead of stdout");
  report->add_option("--config", config_file, "JSON file with defaults for any flag");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::string command = sub->get_name();
  std::set<std::string> given;
  for (const auto* opt : sub->get_options()) {
    if (opt->count() > 0) given.insert(key_of(opt));
  }

  try {
    if (!corpus.empty()) cfg.corpus = corpus;
    if (!profile.empty()) cfg.profile = profile;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (!sources.empty()) cfg.sources = sources;
    if (!templates.empty()) cfg.templates = fs::path(templates);
    if (!resume.empty()) cfg.resume = fs::path(resume);
    if (given.count("target_size")) cfg.target_size = target_size;
    for (const auto& r : runs) cfg.runs.emplace_back(r);
    if (!config_file.empty()) merge_config(cfg, config_file, given);
    cfg.validate(command);

    Context ctx{cfg, out, err, stop};
    if (command == "evaluate") return cmd_evaluate(ctx);
    if (command == "repair") return cmd_repair(ctx);
    if (command == "curate") return cmd_curate(ctx);
    return cmd_report(ctx, given.count("out") > 0);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace taskbench::cli
