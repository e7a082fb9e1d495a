#include "ric/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ric/metrics.hpp"
#include "ric/parse.hpp"
#include "ric/toml.hpp"

namespace ric {

namespace fs = std::filesystem;

namespace {

std::string backend_mode_name(BackendMode m) {
  switch (m) {
    case BackendMode::live: return "live";
    case BackendMode::mock: return "mock";
    case BackendMode::replay: return "replay";
  }
  return "mock";
}

std::optional<BackendMode> backend_mode_from(const std::string& name) {
  if (name == "live") return BackendMode::live;
  if (name == "mock") return BackendMode::mock;
  if (name == "replay") return BackendMode::replay;
  return std::nullopt;
}

StrategyKnobs knobs_from_json(const json& j, long default_seed) {
  StrategyKnobs knobs;
  knobs.seed = default_seed;
  from_json(j, knobs);
  if (!j.contains("seed")) knobs.seed = default_seed;
  return knobs;
}

LoadedTask load_task_entry(const TaskEntry& entry) {
  LoadedTask loaded;
  if (entry.schema == "bigbench") {
    loaded = load_bigbench_task(entry.path);
  } else if (entry.schema == "stance") {
    if (entry.target.empty())
      throw std::runtime_error("stance task requires a target: " + entry.path);
    loaded = load_stance_tsv(entry.path, entry.target);
  } else if (entry.schema == "socnorm") {
    loaded = load_nli_pairs(entry.path, NliSchema::socnorm);
  } else if (entry.schema == "e_socnorm") {
    loaded = load_nli_pairs(entry.path, NliSchema::e_socnorm);
  } else if (entry.schema == "cali") {
    loaded = load_nli_pairs(entry.path, NliSchema::cali);
  } else {
    throw std::runtime_error("unknown task schema '" + entry.schema + "'");
  }
  if (entry.limit && static_cast<size_t>(*entry.limit) < loaded.instances.size())
    loaded.instances.resize(*entry.limit);
  return loaded;
}

// Deterministic stand-in content for demonstrations whose strategies need
// more than a bare label: a short rationale for few-shot CoT, and a full
// keywords/one-turn-dialogue exemplar for few-shot RiC (keyword counts
// alternate between 4 and 5 across demos).
void enrich_demo(Demonstration& demo, Strategy strategy, size_t demo_index) {
  const QuestionInstance& q = demo.question;
  if (strategy == Strategy::few_shot_cot && !demo.rationale) {
    demo.rationale =
        "Considering the question carefully, the best interpretation points "
        "to " + q.gold + ".";
  }
  if ((strategy == Strategy::ric_unified || strategy == Strategy::ric_staged) &&
      !demo.structured) {
    StructuredResponse s;
    const size_t want = demo_index % 2 == 0 ? 4 : 5;
    std::istringstream words(q.question);
    std::string word;
    while (s.keywords.size() < want && words >> word) {
      std::string folded = fold_label_surface(word);
      if (folded.size() > 3) s.keywords.push_back(folded);
    }
    if (s.keywords.empty()) s.keywords.push_back(fold_label_surface(q.question));
    s.scenario = {
        {"A", "Have you thought about this? " + q.question},
        {"B", "Yes, considering it carefully, I would say " + q.gold + "."},
    };
    s.reasoning = "From the conversation, the answer is " + q.gold + ".";
    s.answer = q.gold;
    demo.structured = s;
  }
}

bool strategy_uses_demos(Strategy s) {
  return s == Strategy::icl || s == Strategy::few_shot_cot ||
         s == Strategy::ric_unified || s == Strategy::ric_staged;
}

struct Job {
  size_t index;        // canonical position
  size_t task_idx;
  size_t strategy_idx;
  int question_index;
};

std::string record_key(const std::string& task_id, int question_index,
                       Strategy strategy, const std::string& kdigest) {
  return task_id + "|" + std::to_string(question_index) + "|" +
         to_string(strategy) + "|" + kdigest;
}

std::string row_label(Strategy strategy, const StrategyKnobs& knobs) {
  std::string out = to_string(strategy);
  if (knobs.disable_keywords) out += " w/o KE";
  if (knobs.disable_dialogue) out += " w/o DS";
  if (knobs.keyword_count) out += " kw=" + std::to_string(*knobs.keyword_count);
  if (knobs.turn_count) out += " turns=" + std::to_string(*knobs.turn_count);
  if (knobs.demo_count > 0) out += " d=" + std::to_string(knobs.demo_count);
  return out;
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void to_json(json& j, const RunRecord& r) {
  RawCompletion persisted = r.completion;
  persisted.cached = false;
  j = json{{"task_id", r.task_id},
           {"question_index", r.question_index},
           {"strategy", to_string(r.strategy)},
           {"knobs", r.knobs},
           {"knobs_digest", r.knobs_digest},
           {"prompt_digest", r.prompt_digest},
           {"completion", persisted},
           {"response", r.response},
           {"gold", r.gold},
           {"correct", r.correct},
           {"error", r.error}};
}

void from_json(const json& j, RunRecord& r) {
  j.at("task_id").get_to(r.task_id);
  j.at("question_index").get_to(r.question_index);
  auto s = strategy_from_string(j.at("strategy").get<std::string>());
  if (!s) throw std::invalid_argument("unknown strategy in record");
  r.strategy = *s;
  j.at("knobs").get_to(r.knobs);
  j.at("knobs_digest").get_to(r.knobs_digest);
  j.at("prompt_digest").get_to(r.prompt_digest);
  j.at("completion").get_to(r.completion);
  j.at("response").get_to(r.response);
  j.at("gold").get_to(r.gold);
  j.at("correct").get_to(r.correct);
  if (j.contains("error")) j.at("error").get_to(r.error);
  r.wall_time_ms = 0;
}

std::string knobs_digest(Strategy strategy, const StrategyKnobs& knobs) {
  json key = json{{"strategy", to_string(strategy)}, {"knobs", knobs}};
  return sha256_hex(key.dump()).substr(0, 12);
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  json doc = load_config_file(path);
  ExperimentConfig cfg;
  if (doc.contains("seed")) doc.at("seed").get_to(cfg.seed);
  if (doc.contains("cache_dir")) doc.at("cache_dir").get_to(cfg.cache_dir);
  if (doc.contains("output_dir")) doc.at("output_dir").get_to(cfg.output_dir);
  if (doc.contains("templates")) doc.at("templates").get_to(cfg.templates_path);
  if (doc.contains("max_concurrency"))
    doc.at("max_concurrency").get_to(cfg.max_concurrency);
  if (doc.contains("backend")) {
    auto mode = backend_mode_from(doc.at("backend").get<std::string>());
    if (!mode)
      throw std::runtime_error("unknown backend mode '" +
                               doc.at("backend").get<std::string>() + "'");
    cfg.backend = *mode;
  }
  if (doc.contains("mock_script")) doc.at("mock_script").get_to(cfg.mock_script);
  if (doc.contains("model")) cfg.model = doc.at("model").get<ModelConfig>();
  for (const auto& t : doc.value("tasks", json::array())) {
    TaskEntry entry;
    t.at("path").get_to(entry.path);
    t.at("schema").get_to(entry.schema);
    if (t.contains("target")) t.at("target").get_to(entry.target);
    if (t.contains("train")) t.at("train").get_to(entry.train_path);
    if (t.contains("limit")) entry.limit = t.at("limit").get<int>();
    cfg.tasks.push_back(std::move(entry));
  }
  for (const auto& s : doc.value("strategies", json::array())) {
    StrategyEntry entry;
    auto name = s.at("name").get<std::string>();
    auto strategy = strategy_from_string(name);
    if (!strategy)
      throw std::runtime_error("unknown strategy '" + name + "'");
    entry.strategy = *strategy;
    entry.knobs = knobs_from_json(s, cfg.seed);
    cfg.strategies.push_back(std::move(entry));
  }
  return cfg;
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> problems;
  if (tasks.empty()) problems.push_back("tasks: at least one task required");
  if (strategies.empty())
    problems.push_back("strategies: at least one strategy required");
  if (max_concurrency < 1)
    problems.push_back("max_concurrency: must be >= 1, got " +
                       std::to_string(max_concurrency));
  if (backend == BackendMode::mock && mock_script.empty())
    problems.push_back("mock_script: required for the mock backend");
  if (backend == BackendMode::live && model.endpoint.empty())
    problems.push_back("model.endpoint: required for the live backend");
  if (model.temperature < 0)
    problems.push_back("model.temperature: must be >= 0");
  if (model.max_tokens <= 0)
    problems.push_back("model.max_tokens: must be positive");
  for (size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    if (!fs::exists(t.path))
      problems.push_back("tasks[" + std::to_string(i) + "].path: missing file " +
                         t.path);
    if (t.schema == "stance" && t.target.empty())
      problems.push_back("tasks[" + std::to_string(i) +
                         "].target: required for the stance schema");
    if (!t.train_path.empty() && !fs::exists(t.train_path))
      problems.push_back("tasks[" + std::to_string(i) +
                         "].train: missing file " + t.train_path);
  }
  for (size_t i = 0; i < strategies.size(); ++i) {
    const auto& s = strategies[i];
    const bool is_ric = s.strategy == Strategy::ric_unified ||
                        s.strategy == Strategy::ric_staged;
    if ((s.knobs.disable_keywords || s.knobs.disable_dialogue) && !is_ric)
      problems.push_back("strategies[" + std::to_string(i) +
                         "]: ablation flags only apply to ric strategies");
    if (s.knobs.disable_keywords && s.knobs.disable_dialogue)
      problems.push_back("strategies[" + std::to_string(i) +
                         "]: disabling both stages degenerates to direct; "
                         "request the direct strategy instead");
    if ((s.strategy == Strategy::icl || s.strategy == Strategy::few_shot_cot) &&
        s.knobs.demo_count < 1)
      problems.push_back("strategies[" + std::to_string(i) +
                         "]: few-shot strategies need demo_count >= 1");
    const bool zero_shot = s.strategy == Strategy::direct ||
                           s.strategy == Strategy::zero_shot_cot ||
                           s.strategy == Strategy::recite_answer;
    if (zero_shot && s.knobs.demo_count != 0)
      problems.push_back("strategies[" + std::to_string(i) +
                         "]: demo_count must be 0 for zero-shot strategies");
    if (s.knobs.demo_count > 0) {
      for (const auto& t : tasks)
        if (t.train_path.empty())
          problems.push_back("strategies[" + std::to_string(i) + "]: task " +
                             t.path + " has no train file for demo sampling");
    }
  }
  return problems;
}

RunResult run_experiment(const ExperimentConfig& config) {
  {
    auto problems = config.validate();
    if (!problems.empty()) {
      std::string msg = "invalid experiment config:";
      for (const auto& p : problems) msg += "\n  - " + p;
      throw std::runtime_error(msg);
    }
  }

  PromptTemplateSet templates;
  if (!config.templates_path.empty())
    templates = PromptTemplateSet::load(config.templates_path);

  auto cache = std::make_shared<ResponseCache>(config.cache_dir);
  std::shared_ptr<ChatBackend> inner;
  switch (config.backend) {
    case BackendMode::live:
      inner = std::make_shared<HttpBackend>();
      break;
    case BackendMode::mock:
      inner = MockBackend::from_script(config.mock_script);
      break;
    case BackendMode::replay:
      if (fs::is_empty(cache->dir()))
        throw std::runtime_error(
            "replay mode requires a warm cache; " + config.cache_dir +
            " is empty");
      inner = nullptr;
      break;
  }
  CachingClient client(inner, cache);

  RunResult result;
  std::vector<std::vector<std::vector<Demonstration>>> demos_by_cell;
  for (const auto& entry : config.tasks) {
    result.tasks.push_back(load_task_entry(entry));
    auto& cell = demos_by_cell.emplace_back();
    const LoadedTask& loaded = result.tasks.back();
    for (const auto& strat : config.strategies) {
      std::vector<Demonstration> demos;
      if (strategy_uses_demos(strat.strategy) && strat.knobs.demo_count > 0) {
        auto train = read_instances_jsonl(
            config.tasks[result.tasks.size() - 1].train_path);
        demos = sample_demonstrations(train, loaded.task,
                                      strat.knobs.demo_count,
                                      strat.knobs.seed,
                                      SampleMode::one_per_label);
        for (size_t i = 0; i < demos.size(); ++i)
          enrich_demo(demos[i], strat.strategy, i);
      }
      cell.push_back(std::move(demos));
    }
  }

  // Canonical job order: task, then strategy, then question index.
  std::vector<Job> jobs;
  for (size_t ti = 0; ti < result.tasks.size(); ++ti)
    for (size_t si = 0; si < config.strategies.size(); ++si)
      for (size_t qi = 0; qi < result.tasks[ti].instances.size(); ++qi)
        jobs.push_back(Job{jobs.size(), ti, si, static_cast<int>(qi)});

  fs::create_directories(config.output_dir);
  const fs::path records_path = fs::path(config.output_dir) / "records.jsonl";

  // Resume: keep records already journaled, skip their jobs.
  std::map<std::string, RunRecord> done;
  if (fs::exists(records_path)) {
    for (auto& r : read_records_jsonl(records_path.string()))
      done.emplace(record_key(r.task_id, r.question_index, r.strategy,
                              r.knobs_digest),
                   std::move(r));
  }

  std::vector<std::optional<RunRecord>> results(jobs.size());
  std::ofstream journal(records_path, std::ios::app);
  std::mutex journal_mutex;
  std::atomic<size_t> next_job{0};

  auto run_job = [&](const Job& job) {
    const LoadedTask& loaded = result.tasks[job.task_idx];
    const StrategyEntry& strat = config.strategies[job.strategy_idx];
    const QuestionInstance& q = loaded.instances[job.question_index];
    const std::vector<Demonstration>& demos =
        demos_by_cell[job.task_idx][job.strategy_idx];

    RunRecord record;
    record.task_id = loaded.task.id;
    record.question_index = job.question_index;
    record.strategy = strat.strategy;
    record.knobs = strat.knobs;
    record.knobs_digest = knobs_digest(strat.strategy, strat.knobs);
    record.gold = q.gold;

    const auto key = record_key(record.task_id, record.question_index,
                                record.strategy, record.knobs_digest);
    if (auto it = done.find(key); it != done.end()) {
      results[job.index] = it->second;
      return;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
      if (strat.strategy == Strategy::ric_staged) {
        StructuredResponse prior;
        auto b1 = build_ric_staged_step(1, loaded.task, q, prior, templates);
        auto c1 = client.complete(b1, config.model);
        auto s1 = split_sections(c1.text);
        prior.keywords =
            extract_keywords(s1.keywords ? *s1.keywords : c1.text);

        auto b2 = build_ric_staged_step(2, loaded.task, q, prior, templates);
        auto c2 = client.complete(b2, config.model);
        auto s2 = split_sections(c2.text);
        prior.scenario = parse_scenario(s2.scenario ? *s2.scenario : c2.text);

        auto b3 = build_ric_staged_step(3, loaded.task, q, prior, templates);
        auto c3 = client.complete(b3, config.model);

        record.prompt_digest = sha256_hex(cache_key(b1, config.model) +
                                          cache_key(b2, config.model) +
                                          cache_key(b3, config.model));
        record.completion = c3;
        record.completion.cached = c1.cached && c2.cached && c3.cached;
        if (c1.prompt_tokens && c2.prompt_tokens && c3.prompt_tokens)
          record.completion.prompt_tokens =
              *c1.prompt_tokens + *c2.prompt_tokens + *c3.prompt_tokens;
        if (c1.completion_tokens && c2.completion_tokens && c3.completion_tokens)
          record.completion.completion_tokens = *c1.completion_tokens +
                                                *c2.completion_tokens +
                                                *c3.completion_tokens;
        record.response = prior;
        auto s3 = split_sections(c3.text);
        record.response.reasoning = s3.reasoning ? *s3.reasoning : c3.text;
        record.response.answer = extract_answer(c3.text, loaded.task, q.options);
      } else {
        auto bundle = build_prompt(strat.strategy, loaded.task, q, demos,
                                   strat.knobs, templates);
        record.prompt_digest = cache_key(bundle, config.model);
        record.completion = client.complete(bundle, config.model);
        record.response =
            parse_completion(record.completion.text, loaded.task, q.options);
      }
    } catch (const std::exception& e) {
      record.error = e.what();
      record.response = StructuredResponse{};
    }
    record.correct = record.response.answer == q.gold;
    record.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
    {
      std::lock_guard<std::mutex> lock(journal_mutex);
      journal << json(record).dump() << "\n";
      journal.flush();
    }
    results[job.index] = std::move(record);
  };

  const int workers = std::min<int>(config.max_concurrency,
                                    static_cast<int>(jobs.size()) + 1);
  std::vector<std::thread> pool;
  std::exception_ptr worker_error;
  std::mutex error_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const size_t i = next_job.fetch_add(1);
        if (i >= jobs.size()) return;
        try {
          run_job(jobs[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!worker_error) worker_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (worker_error) std::rethrow_exception(worker_error);

  result.records.reserve(jobs.size());
  for (auto& r : results) result.records.push_back(std::move(*r));

  // Rewrite the journal in canonical order; this is what reports consume.
  write_records_jsonl(records_path.string(), result.records);
  std::vector<TaskSpec> specs;
  for (const auto& t : result.tasks) specs.push_back(t.task);
  write_tasks_json((fs::path(config.output_dir) / "tasks.json").string(), specs);
  return result;
}

Report emit_report(const std::vector<RunRecord>& records,
                   const std::vector<TaskSpec>& tasks,
                   const ReportOptions& options) {
  if (records.empty())
    throw std::invalid_argument("cannot report on zero records");

  std::map<std::string, const TaskSpec*> task_by_id;
  for (const auto& t : tasks) task_by_id[t.id] = &t;
  for (const auto& r : records)
    if (!task_by_id.count(r.task_id))
      throw std::invalid_argument("record references unknown task '" +
                                  r.task_id + "'");

  // Column order: task vector order, restricted to tasks with records.
  std::set<std::string> present;
  for (const auto& r : records) present.insert(r.task_id);
  std::vector<const TaskSpec*> columns;
  for (const auto& t : tasks)
    if (present.count(t.id)) columns.push_back(&t);

  // Row order: first appearance of (strategy, knobs digest).
  struct Row {
    std::string label;
    std::string key;
    std::vector<const RunRecord*> records;
  };
  std::vector<Row> rows;
  std::map<std::string, size_t> row_index;
  for (const auto& r : records) {
    const std::string key = to_string(r.strategy) + "|" + r.knobs_digest;
    auto it = row_index.find(key);
    if (it == row_index.end()) {
      row_index.emplace(key, rows.size());
      rows.push_back(Row{row_label(r.strategy, r.knobs), key, {}});
      it = row_index.find(key);
    }
    rows[it->second].records.push_back(&r);
  }

  auto cell_score = [&](const Row& row, const TaskSpec& task)
      -> std::optional<double> {
    std::vector<std::string> preds, golds;
    for (const auto* r : row.records) {
      if (r->task_id != task.id) continue;
      preds.push_back(r->response.answer);
      golds.push_back(r->gold);
    }
    if (preds.empty()) return std::nullopt;
    return score(preds, golds, task);
  };

  std::ostringstream md, csv;
  md << "# Results\n\n| Method |";
  csv << "method";
  for (const auto* t : columns) {
    const std::string metric =
        t->metric == MetricKind::accuracy ? "Acc." : "F1";
    md << " " << t->id << " (" << metric << ") |";
    csv << "," << csv_escape(t->id);
  }
  md << " Avg |\n|---|";
  csv << ",avg\n";
  for (size_t i = 0; i < columns.size() + 1; ++i) md << "---|";
  md << "\n";

  auto emit_row = [&](const std::string& label,
                      const std::vector<std::optional<double>>& cells) {
    md << "| " << label << " |";
    csv << csv_escape(label);
    std::vector<std::pair<std::string, double>> scored;
    for (size_t i = 0; i < cells.size(); ++i) {
      if (cells[i]) {
        md << " " << format_score(*cells[i]) << " |";
        csv << "," << format_score(*cells[i]);
        scored.emplace_back(columns[i]->id, *cells[i]);
      } else {
        md << " - |";
        csv << ",";
      }
    }
    if (!scored.empty()) {
      const double avg = aggregate(scored);
      md << " " << format_score(avg) << " |\n";
      csv << "," << format_score(avg) << "\n";
    } else {
      md << " - |\n";
      csv << ",\n";
    }
  };

  if (options.include_baseline_rows) {
    std::vector<std::optional<double>> random_cells, majority_cells;
    for (const auto* t : columns) {
      random_cells.push_back(expected_random_score(*t));
      std::vector<std::string> golds;
      std::set<int> seen;
      for (const auto& r : records)
        if (r.task_id == t->id && seen.insert(r.question_index).second)
          golds.push_back(r.gold);
      majority_cells.push_back(majority_score(golds, *t));
    }
    emit_row("Random", random_cells);
    emit_row("Majority", majority_cells);
  }

  for (const auto& row : rows) {
    std::vector<std::optional<double>> cells;
    for (const auto* t : columns) cells.push_back(cell_score(row, *t));
    emit_row(row.label, cells);
  }

  // Analysis table: generation statistics per method row.
  md << "\n# Analysis\n\n| Method | Mean keywords | Mean turns | "
        "Mean generated tokens | Abstain rate |\n|---|---|---|---|---|\n";
  csv << "\nmethod,mean_keywords,mean_turns,mean_generated_tokens,abstain_rate\n";
  for (const auto& row : rows) {
    std::vector<StructuredResponse> responses;
    std::vector<RawCompletion> completions;
    for (const auto* r : row.records) {
      responses.push_back(r->response);
      completions.push_back(r->completion);
    }
    const auto stats = corpus_statistics(responses);
    const auto usage = usage_totals(completions);
    auto opt = [](const std::optional<double>& v) {
      return v ? format_score(*v) : std::string("-");
    };
    md << "| " << row.label << " | " << opt(stats.mean_keyword_count) << " | "
       << opt(stats.mean_turn_count) << " | "
       << format_score(usage.mean_completion_tokens) << " | "
       << format_score(100.0 * stats.abstain_rate) << " |\n";
    csv << csv_escape(row.label) << "," << opt(stats.mean_keyword_count) << ","
        << opt(stats.mean_turn_count) << ","
        << format_score(usage.mean_completion_tokens) << ","
        << format_score(100.0 * stats.abstain_rate) << "\n";
  }

  return Report{md.str(), csv.str()};
}

std::vector<RunRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read records file: " + path);
  std::vector<RunRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(json::parse(line).get<RunRecord>());
  }
  return out;
}

void write_records_jsonl(const std::string& path,
                         const std::vector<RunRecord>& records) {
  const fs::path tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write records file: " + path);
    for (const auto& r : records) out << json(r).dump() << "\n";
  }
  fs::rename(tmp, path);
}

std::vector<TaskSpec> read_tasks_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read tasks file: " + path);
  return json::parse(in).get<std::vector<TaskSpec>>();
}

void write_tasks_json(const std::string& path,
                      const std::vector<TaskSpec>& tasks) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write tasks file: " + path);
  out << json(tasks).dump(2) << "\n";
}

}  // namespace ric
