#pragma once

// Dataset ingestion into the canonical (TaskSpec, QuestionInstance)
// representation, plus few-shot demonstration sampling.

#include <string>
#include <vector>

#include "ric/core.hpp"

namespace ric {

struct LoadedTask {
  TaskSpec task;
  std::vector<QuestionInstance> instances;
  long dropped_rows = 0;  // filtered / NONE-stance rows, reported upstream
};

// BIG-bench task JSON: every "examples" entry becomes an instance whose
// gold is the argmax of target_scores. Labels follow first appearance.
// An example with a tied maximum is rejected with its index.
LoadedTask load_bigbench_task(const std::string& path);

// SemEval-style TSV with Target / Tweet / Stance columns, filtered to one
// target. Labels {favor, against}, macro-F1 averaged over both; rows with
// stance NONE are dropped and counted.
LoadedTask load_stance_tsv(const std::string& path, const std::string& target);

enum class NliSchema { socnorm, e_socnorm, cali };

// Premise/hypothesis pairs with the three-way entailment label set.
// e_socnorm additionally requires a free-text explanation column that is
// appended to the question rendering.
LoadedTask load_nli_pairs(const std::string& path, NliSchema schema);

enum class SampleMode { one_per_label, uniform };

// Deterministic under (seed, mode); never repeats an instance. With
// one_per_label, the first |labels| draws cover each label once (in task
// label order) and extras are drawn uniformly from the remainder.
std::vector<Demonstration> sample_demonstrations(
    const std::vector<QuestionInstance>& train, const TaskSpec& task, int d,
    long seed, SampleMode mode);

// Canonical JSONL record form, one instance per line.
void write_instances_jsonl(const std::string& path,
                           const std::vector<QuestionInstance>& instances);
std::vector<QuestionInstance> read_instances_jsonl(const std::string& path);

}  // namespace ric
