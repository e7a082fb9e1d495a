#pragma once

// Scoring: accuracy, macro-F1 over a configured class set, and the
// analytic Random / Majority baselines. All results are percentages in
// [0, 100], rounded only at report time.

#include <string>
#include <vector>

#include "ric/core.hpp"

namespace ric {

// 100 * correct / n; kAbstain never matches. Throws on empty or
// mismatched inputs.
double accuracy(const std::vector<std::string>& preds,
                const std::vector<std::string>& golds);

// Mean per-class F1 over `classes`, with the 0/0 -> 0 convention for
// degenerate precision, recall, and F1.
double macro_f1(const std::vector<std::string>& preds,
                const std::vector<std::string>& golds,
                const std::vector<std::string>& classes);

// Scores predictions under the task's configured metric.
double score(const std::vector<std::string>& preds,
             const std::vector<std::string>& golds, const TaskSpec& task);

// Uniform random prediction: 100 / |labels| for every metric kind.
double expected_random_score(const TaskSpec& task);

// Score of the constant prediction equal to the modal gold label, ties
// broken by task label order.
double majority_score(const std::vector<std::string>& golds,
                      const TaskSpec& task);

// Unweighted mean over per-task scores.
double aggregate(const std::vector<std::pair<std::string, double>>& per_task);

// Fixed 2-decimal rendering used by every report surface.
std::string format_score(double value);

}  // namespace ric
