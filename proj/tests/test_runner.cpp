#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ric/runner.hpp"

using namespace ric;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) {
  return std::string(RIC_FIXTURES_DIR) + "/" + name;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ric_runner_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Mock-backed config over the four-question metaphor fixture with two
// strategies: direct and the unified three-stage method.
ExperimentConfig small_config(const fs::path& workdir) {
  ExperimentConfig cfg;
  TaskEntry task;
  task.path = fixture("bigbench_metaphor.json");
  task.schema = "bigbench";
  task.train_path = fixture("train_metaphor.jsonl");
  cfg.tasks.push_back(task);

  StrategyEntry direct;
  direct.strategy = Strategy::direct;
  cfg.strategies.push_back(direct);
  StrategyEntry unified;
  unified.strategy = Strategy::ric_unified;
  cfg.strategies.push_back(unified);

  cfg.model.model_name = "mock-model";
  cfg.backend = BackendMode::mock;
  cfg.mock_script = fixture("mock_script.json");
  cfg.cache_dir = (workdir / "cache").string();
  cfg.output_dir = (workdir / "out").string();
  cfg.max_concurrency = 1;
  cfg.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("config loads from TOML with nested tables") {
  const std::string path = "experiment_test.toml";
  std::ofstream(path) << "backend = \"mock\"\n"
                         "mock_script = \"" +
                             fixture("mock_script.json") +
                             "\"\n"
                             "max_concurrency = 4\n"
                             "seed = 11\n"
                             "[model]\n"
                             "model_name = \"m\"\n"
                             "temperature = 0.5\n"
                             "max_tokens = 128\n"
                             "[[tasks]]\n"
                             "path = \"" +
                             fixture("bigbench_metaphor.json") +
                             "\"\n"
                             "schema = \"bigbench\"\n"
                             "limit = 2\n"
                             "[[strategies]]\n"
                             "name = \"direct\"\n"
                             "[[strategies]]\n"
                             "name = \"ric_unified\"\n"
                             "keyword_count = 4\n";
  const auto cfg = ExperimentConfig::load(path);
  CHECK(cfg.backend == BackendMode::mock);
  CHECK(cfg.max_concurrency == 4);
  CHECK(cfg.model.temperature == 0.5);
  REQUIRE(cfg.tasks.size() == 1);
  CHECK(cfg.tasks[0].limit == 2);
  REQUIRE(cfg.strategies.size() == 2);
  CHECK(cfg.strategies[0].strategy == Strategy::direct);
  CHECK(cfg.strategies[1].knobs.keyword_count == 4);
  // Strategies without an explicit seed inherit the experiment seed.
  CHECK(cfg.strategies[1].knobs.seed == 11);
  CHECK(cfg.validate().empty());
}

TEST_CASE("validation names the offending field") {
  const auto workdir = fresh_dir("validate");
  auto cfg = small_config(workdir);

  cfg.max_concurrency = 0;
  auto problems = cfg.validate();
  REQUIRE_FALSE(problems.empty());
  bool found = false;
  for (const auto& p : problems)
    if (p.find("max_concurrency") != std::string::npos) found = true;
  CHECK(found);

  cfg = small_config(workdir);
  cfg.tasks[0].path = "does_not_exist.json";
  problems = cfg.validate();
  REQUIRE_FALSE(problems.empty());
  CHECK(problems[0].find("tasks[0].path") != std::string::npos);

  cfg = small_config(workdir);
  cfg.strategies[1].knobs.disable_keywords = true;
  cfg.strategies[1].knobs.disable_dialogue = true;
  CHECK_FALSE(cfg.validate().empty());

  cfg = small_config(workdir);
  cfg.strategies[0].knobs.disable_keywords = true;  // ablation on direct
  CHECK_FALSE(cfg.validate().empty());

  cfg = small_config(workdir);
  cfg.mock_script = "";
  CHECK_FALSE(cfg.validate().empty());
}

TEST_CASE("a mock run covers the full grid deterministically") {
  const auto work_a = fresh_dir("grid_a");
  const auto result = run_experiment(small_config(work_a));
  // 4 questions x 2 strategies.
  REQUIRE(result.records.size() == 8);
  REQUIRE(result.tasks.size() == 1);
  CHECK(result.tasks[0].task.id == "metaphor_fixture");

  // Canonical order: strategy-major within the task, question index within.
  CHECK(result.records[0].strategy == Strategy::direct);
  CHECK(result.records[0].question_index == 0);
  CHECK(result.records[4].strategy == Strategy::ric_unified);

  // The scripted answers match gold on every question for ric_unified.
  int unified_correct = 0;
  for (const auto& r : result.records)
    if (r.strategy == Strategy::ric_unified && r.correct) ++unified_correct;
  CHECK(unified_correct == 4);

  // The lion question yields the full structured parse.
  const auto& lion = result.records[4];
  CHECK(lion.response.keywords.size() == 3);
  CHECK(lion.response.scenario.size() == 3);
  CHECK(lion.response.answer == "True");

  // Byte-identical artifacts on an independent rerun.
  const auto work_b = fresh_dir("grid_b");
  run_experiment(small_config(work_b));
  CHECK(slurp(work_a / "out" / "records.jsonl") ==
        slurp(work_b / "out" / "records.jsonl"));
  CHECK(slurp(work_a / "out" / "tasks.json") ==
        slurp(work_b / "out" / "tasks.json"));

  // And under concurrency.
  const auto work_c = fresh_dir("grid_c");
  auto concurrent = small_config(work_c);
  concurrent.max_concurrency = 8;
  run_experiment(concurrent);
  CHECK(slurp(work_a / "out" / "records.jsonl") ==
        slurp(work_c / "out" / "records.jsonl"));
}

TEST_CASE("a second run over a warm cache makes no backend calls") {
  const auto workdir = fresh_dir("warm");
  const auto cfg = small_config(workdir);
  run_experiment(cfg);

  // Replay (null inner backend) over the same cache must succeed, proving
  // the rerun needed zero fresh completions.
  auto replay = cfg;
  replay.backend = BackendMode::replay;
  replay.mock_script = "";
  replay.output_dir = (workdir / "out_replay").string();
  const auto result = run_experiment(replay);
  CHECK(result.records.size() == 8);
  CHECK(slurp(workdir / "out" / "records.jsonl") ==
        slurp(workdir / "out_replay" / "records.jsonl"));
}

TEST_CASE("replay mode fails fast on a cold cache") {
  const auto workdir = fresh_dir("cold");
  auto cfg = small_config(workdir);
  cfg.backend = BackendMode::replay;
  cfg.mock_script = "";
  CHECK_THROWS_WITH_AS(run_experiment(cfg), doctest::Contains("replay"),
                       std::runtime_error);
}

TEST_CASE("an interrupted run resumes to identical bytes") {
  const auto work_full = fresh_dir("resume_full");
  run_experiment(small_config(work_full));
  const auto full_bytes = slurp(work_full / "out" / "records.jsonl");

  // Simulate an interruption: keep only the first three journal lines.
  const auto work_part = fresh_dir("resume_part");
  const auto cfg = small_config(work_part);
  run_experiment(cfg);
  const fs::path records = fs::path(cfg.output_dir) / "records.jsonl";
  std::vector<std::string> lines;
  {
    std::istringstream in(slurp(records));
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
  }
  REQUIRE(lines.size() == 8);
  {
    std::ofstream out(records, std::ios::trunc);
    for (size_t i = 0; i < 3; ++i) out << lines[i] << "\n";
  }

  run_experiment(cfg);
  CHECK(slurp(records) == full_bytes);
}

TEST_CASE("few-shot strategies consume sampled demonstrations") {
  const auto workdir = fresh_dir("demos");
  auto cfg = small_config(workdir);
  cfg.strategies.clear();
  StrategyEntry icl;
  icl.strategy = Strategy::icl;
  icl.knobs.demo_count = 2;
  icl.knobs.seed = 7;
  cfg.strategies.push_back(icl);
  StrategyEntry ric;
  ric.strategy = Strategy::ric_unified;
  ric.knobs.demo_count = 2;
  ric.knobs.seed = 7;
  cfg.strategies.push_back(ric);

  const auto result = run_experiment(cfg);
  CHECK(result.records.size() == 8);
  for (const auto& r : result.records) CHECK(r.error.empty());

  // Demo-bearing rows are labeled with the shot count in the report.
  std::vector<TaskSpec> specs = {result.tasks[0].task};
  const auto report = emit_report(result.records, specs);
  CHECK(report.markdown.find("icl d=2") != std::string::npos);
  CHECK(report.markdown.find("ric_unified d=2") != std::string::npos);
}

TEST_CASE("staged runs thread keywords and scenario through three calls") {
  const auto workdir = fresh_dir("staged");
  auto cfg = small_config(workdir);
  cfg.strategies.clear();
  StrategyEntry staged;
  staged.strategy = Strategy::ric_staged;
  cfg.strategies.push_back(staged);
  cfg.tasks[0].limit = 1;  // just the lion question

  const auto result = run_experiment(cfg);
  REQUIRE(result.records.size() == 1);
  const auto& r = result.records[0];
  CHECK(r.error.empty());
  CHECK(r.response.keywords.size() == 3);
  CHECK_FALSE(r.response.scenario.empty());
  CHECK(r.response.answer == "True");
  CHECK(r.prompt_digest.size() == 64);
}

TEST_CASE("report lays out strategy rows against task columns") {
  const auto workdir = fresh_dir("report");
  const auto result = run_experiment(small_config(workdir));
  std::vector<TaskSpec> specs = {result.tasks[0].task};

  ReportOptions options;
  options.include_baseline_rows = true;
  const auto report = emit_report(result.records, specs, options);

  CHECK(report.markdown.find("| Method |") != std::string::npos);
  CHECK(report.markdown.find("metaphor_fixture (Acc.) |") != std::string::npos);
  CHECK(report.markdown.find("| Random | 50.00 | 50.00 |") !=
        std::string::npos);
  CHECK(report.markdown.find("| Majority | 50.00 | 50.00 |") !=
        std::string::npos);
  CHECK(report.markdown.find("| ric_unified | 100.00 | 100.00 |") !=
        std::string::npos);
  CHECK(report.markdown.find("# Analysis") != std::string::npos);

  // CSV mirrors the same cells.
  CHECK(report.csv.find("ric_unified,100.00,100.00") != std::string::npos);
  CHECK(report.csv.find("Random,50.00,50.00") != std::string::npos);

  // The mock script matches on question text, so the direct strategy sees
  // the same scripted answers and also scores perfectly here.
  CHECK(report.markdown.find("| direct | 100.00 | 100.00 |") !=
        std::string::npos);
}

TEST_CASE("zero-correct cells format as 0.00, not blank") {
  const auto workdir = fresh_dir("zero");
  auto cfg = small_config(workdir);
  // The pronoun questions match no scripted rule, so every completion is
  // the catch-all "I cannot decide." and every record abstains.
  cfg.tasks[0].path = fixture("bigbench_options.json");
  cfg.tasks[0].train_path = "";
  cfg.strategies.resize(1);  // direct only

  const auto result = run_experiment(cfg);
  REQUIRE(result.records.size() == 3);
  for (const auto& r : result.records) CHECK(r.response.answer == kAbstain);

  std::vector<TaskSpec> specs = {result.tasks[0].task};
  const auto report = emit_report(result.records, specs);
  CHECK(report.markdown.find("| direct | 0.00 | 0.00 |") != std::string::npos);
  CHECK(report.csv.find("direct,0.00,0.00") != std::string::npos);
  // Abstain rate in the analysis table is total.
  CHECK(report.markdown.find("| 100.00 |") != std::string::npos);
}

TEST_CASE("report rejects records referencing unknown tasks") {
  const auto workdir = fresh_dir("report_bad");
  const auto result = run_experiment(small_config(workdir));
  CHECK_THROWS_WITH_AS(emit_report(result.records, {}),
                       doctest::Contains("unknown task"),
                       std::invalid_argument);
  CHECK_THROWS_AS(emit_report({}, {}), std::invalid_argument);
}

TEST_CASE("records survive a JSONL round trip without transient state") {
  const auto workdir = fresh_dir("persist");
  const auto result = run_experiment(small_config(workdir));
  const std::string path = (workdir / "copy.jsonl").string();
  write_records_jsonl(path, result.records);
  const auto back = read_records_jsonl(path);
  REQUIRE(back.size() == result.records.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].task_id == result.records[i].task_id);
    CHECK(back[i].response == result.records[i].response);
    CHECK(back[i].correct == result.records[i].correct);
    CHECK(back[i].wall_time_ms == 0);       // never persisted
    CHECK_FALSE(back[i].completion.cached); // normalized on write
  }
}

TEST_CASE("knobs digest distinguishes strategy variants") {
  StrategyKnobs plain;
  StrategyKnobs ablated;
  ablated.disable_keywords = true;
  CHECK(knobs_digest(Strategy::ric_unified, plain) ==
        knobs_digest(Strategy::ric_unified, plain));
  CHECK(knobs_digest(Strategy::ric_unified, plain) !=
        knobs_digest(Strategy::ric_unified, ablated));
  CHECK(knobs_digest(Strategy::ric_unified, plain) !=
        knobs_digest(Strategy::direct, plain));
  CHECK(knobs_digest(Strategy::direct, plain).size() == 12);
}
