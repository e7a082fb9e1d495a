#pragma once

// Experiment orchestration: config parsing, the (task x strategy x
// question) evaluation grid, JSONL record persistence with resume, and
// report emission.

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ric/backend.hpp"
#include "ric/core.hpp"
#include "ric/datasets.hpp"
#include "ric/strategies.hpp"

namespace ric {

enum class BackendMode { live, mock, replay };

struct TaskEntry {
  std::string path;
  std::string schema;           // bigbench | stance | socnorm | e_socnorm | cali
  std::string target;           // stance only
  std::string train_path;       // required when any strategy samples demos
  std::optional<int> limit;     // cap instance count (desk-scale runs)
};

struct StrategyEntry {
  Strategy strategy = Strategy::direct;
  StrategyKnobs knobs;
};

struct ExperimentConfig {
  std::vector<TaskEntry> tasks;
  std::vector<StrategyEntry> strategies;
  ModelConfig model;
  BackendMode backend = BackendMode::mock;
  std::string mock_script;      // backend = mock
  std::string cache_dir = "cache";
  std::string output_dir = "out";
  std::string templates_path;   // optional PromptTemplateSet overrides
  int max_concurrency = 1;
  long seed = 0;

  static ExperimentConfig load(const std::string& path);

  // Returns human-readable problems; empty means valid.
  std::vector<std::string> validate() const;
};

// One (question, strategy, model) evaluation.
struct RunRecord {
  std::string task_id;
  int question_index = 0;
  Strategy strategy = Strategy::direct;
  StrategyKnobs knobs;
  std::string knobs_digest;
  std::string prompt_digest;
  RawCompletion completion;
  StructuredResponse response;
  std::string gold;
  bool correct = false;
  std::string error;        // nonempty when the question degraded to ABSTAIN
  long wall_time_ms = 0;    // in-memory only, not persisted
};

// Persisted record form omits wall_time_ms and the transient cached flag
// so reruns and resumed runs serialize identically.
void to_json(json& j, const RunRecord& r);
void from_json(const json& j, RunRecord& r);

std::string knobs_digest(Strategy strategy, const StrategyKnobs& knobs);

struct RunResult {
  std::vector<RunRecord> records;
  std::vector<LoadedTask> tasks;
};

// Evaluates every (task, strategy) cell. Records are appended to
// {output_dir}/records.jsonl as they complete and the file is rewritten in
// canonical order at the end; an interrupted run resumes from the journal
// and the cache. Per-question failures become ABSTAIN records.
RunResult run_experiment(const ExperimentConfig& config);

struct ReportOptions {
  bool include_baseline_rows = false;  // analytic Random / Majority rows
};

struct Report {
  std::string markdown;
  std::string csv;
};

// Strategy rows x task columns with the Avg column, plus the analysis
// table (mean keywords / turns / generated tokens, abstain rate). Tasks
// must cover every task_id present in the records.
Report emit_report(const std::vector<RunRecord>& records,
                   const std::vector<TaskSpec>& tasks,
                   const ReportOptions& options = {});

std::vector<RunRecord> read_records_jsonl(const std::string& path);
void write_records_jsonl(const std::string& path,
                         const std::vector<RunRecord>& records);

std::vector<TaskSpec> read_tasks_json(const std::string& path);
void write_tasks_json(const std::string& path,
                      const std::vector<TaskSpec>& tasks);

}  // namespace ric
