// Command-line entry point: run experiments, emit report tables, validate
// configs, and print corpus statistics over persisted records.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ric/backend.hpp"
#include "ric/parse.hpp"
#include "ric/runner.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, const std::string& backend_override,
            int concurrency_override, const std::string& out_override) {
  auto config = ric::ExperimentConfig::load(config_path);
  if (!backend_override.empty()) {
    if (backend_override == "live") config.backend = ric::BackendMode::live;
    else if (backend_override == "mock") config.backend = ric::BackendMode::mock;
    else if (backend_override == "replay") config.backend = ric::BackendMode::replay;
    else throw std::runtime_error("unknown backend: " + backend_override);
  }
  if (concurrency_override > 0) config.max_concurrency = concurrency_override;
  if (!out_override.empty()) config.output_dir = out_override;

  auto result = ric::run_experiment(config);

  std::vector<ric::TaskSpec> specs;
  for (const auto& t : result.tasks) specs.push_back(t.task);
  ric::ReportOptions options;
  options.include_baseline_rows = true;
  auto report = ric::emit_report(result.records, specs, options);
  const fs::path out_dir(config.output_dir);
  std::ofstream(out_dir / "report.md") << report.markdown;
  std::ofstream(out_dir / "report.csv") << report.csv;
  std::cout << "wrote " << result.records.size() << " records to "
            << (out_dir / "records.jsonl").string() << "\n"
            << report.markdown;
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& tasks_path,
               bool baselines, const std::string& out_dir) {
  auto records = ric::read_records_jsonl(records_path);
  std::string tp = tasks_path;
  if (tp.empty())
    tp = (fs::path(records_path).parent_path() / "tasks.json").string();
  auto tasks = ric::read_tasks_json(tp);
  ric::ReportOptions options;
  options.include_baseline_rows = baselines;
  auto report = ric::emit_report(records, tasks, options);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / "report.md") << report.markdown;
    std::ofstream(fs::path(out_dir) / "report.csv") << report.csv;
  }
  std::cout << report.markdown;
  return 0;
}

int cmd_validate(const std::string& config_path) {
  auto config = ric::ExperimentConfig::load(config_path);
  auto problems = config.validate();
  if (problems.empty()) {
    std::cout << "config ok: " << config_path << "\n";
    return 0;
  }
  for (const auto& p : problems) std::cerr << "error: " << p << "\n";
  return 1;
}

int cmd_stats(const std::string& records_path) {
  auto records = ric::read_records_jsonl(records_path);
  std::vector<ric::StructuredResponse> responses;
  std::vector<ric::RawCompletion> completions;
  for (const auto& r : records) {
    responses.push_back(r.response);
    completions.push_back(r.completion);
  }
  const auto stats = ric::corpus_statistics(responses);
  const auto usage = ric::usage_totals(completions);
  auto opt = [](const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string("absent");
  };
  std::cout << "records: " << records.size() << "\n"
            << "mean keywords: " << opt(stats.mean_keyword_count) << "\n"
            << "mean dialogue turns: " << opt(stats.mean_turn_count) << "\n"
            << "abstain rate: " << stats.abstain_rate << "\n"
            << "total prompt tokens: " << usage.total_prompt_tokens << "\n"
            << "total completion tokens: " << usage.total_completion_tokens
            << "\n"
            << "mean completion tokens: " << usage.mean_completion_tokens
            << "\n"
            << "records with approximate usage: " << usage.approximate_records
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RiC subjective-task prompting harness"};
  app.require_subcommand(1);

  std::string config_path, backend, out_dir, records_path, tasks_path;
  int concurrency = 0;
  bool baselines = false;

  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  run->add_option("config,--config", config_path, "TOML or JSON experiment config")
      ->required();
  run->add_option("--backend", backend, "Override backend: live|mock|replay");
  run->add_option("--max-concurrency", concurrency, "Override worker count");
  run->add_option("--out", out_dir, "Override output directory");

  auto* report = app.add_subcommand("report", "Render tables from records");
  report->add_option("records", records_path, "records.jsonl path")->required();
  report->add_option("--tasks", tasks_path, "tasks.json path (default: sibling)");
  report->add_option("--out", out_dir, "Directory for report.md / report.csv");
  report->add_flag("--baselines", baselines, "Include Random/Majority rows");

  auto* validate = app.add_subcommand("validate", "Check a config file");
  validate->add_option("config,--config", config_path, "Config path")->required();

  auto* stats = app.add_subcommand("stats", "Corpus statistics over records");
  stats->add_option("records", records_path, "records.jsonl path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, backend, concurrency, out_dir);
    if (report->parsed())
      return cmd_report(records_path, tasks_path, baselines, out_dir);
    if (validate->parsed()) return cmd_validate(config_path);
    if (stats->parsed()) return cmd_stats(records_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
