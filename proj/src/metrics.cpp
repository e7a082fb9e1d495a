#include "ric/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace ric {

namespace {

void check_lengths(const std::vector<std::string>& preds,
                   const std::vector<std::string>& golds) {
  if (preds.size() != golds.size())
    throw std::invalid_argument("preds and golds differ in length");
}

}  // namespace

double accuracy(const std::vector<std::string>& preds,
                const std::vector<std::string>& golds) {
  check_lengths(preds, golds);
  if (preds.empty()) throw std::invalid_argument("accuracy over empty input");
  long correct = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i] != kAbstain && preds[i] == golds[i]) ++correct;
  return 100.0 * static_cast<double>(correct) / preds.size();
}

double macro_f1(const std::vector<std::string>& preds,
                const std::vector<std::string>& golds,
                const std::vector<std::string>& classes) {
  check_lengths(preds, golds);
  if (classes.empty()) throw std::invalid_argument("macro_f1 with no classes");
  double f1_sum = 0.0;
  for (const auto& cls : classes) {
    long tp = 0, fp = 0, fn = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
      const bool pred_is = preds[i] == cls && preds[i] != kAbstain;
      const bool gold_is = golds[i] == cls;
      if (pred_is && gold_is) ++tp;
      else if (pred_is) ++fp;
      else if (gold_is) ++fn;
    }
    const double precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
    const double recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
    const double f1 = (precision + recall) == 0.0
                          ? 0.0
                          : 2.0 * precision * recall / (precision + recall);
    f1_sum += f1;
  }
  return 100.0 * f1_sum / classes.size();
}

double score(const std::vector<std::string>& preds,
             const std::vector<std::string>& golds, const TaskSpec& task) {
  if (task.metric == MetricKind::accuracy) return accuracy(preds, golds);
  const auto& classes = task.f1_classes.empty() ? task.labels : task.f1_classes;
  return macro_f1(preds, golds, classes);
}

double expected_random_score(const TaskSpec& task) {
  return 100.0 / static_cast<double>(task.labels.size());
}

double majority_score(const std::vector<std::string>& golds,
                      const TaskSpec& task) {
  if (golds.empty()) throw std::invalid_argument("majority over empty golds");
  std::map<std::string, long> counts;
  for (const auto& g : golds) ++counts[g];
  // Ties break by label order in the task.
  std::string modal;
  long best = -1;
  for (const auto& label : task.labels) {
    auto it = counts.find(label);
    const long n = it == counts.end() ? 0 : it->second;
    if (n > best) {
      best = n;
      modal = label;
    }
  }
  const std::vector<std::string> preds(golds.size(), modal);
  return score(preds, golds, task);
}

double aggregate(const std::vector<std::pair<std::string, double>>& per_task) {
  if (per_task.empty()) throw std::invalid_argument("aggregate over empty list");
  double sum = 0.0;
  for (const auto& [id, value] : per_task) sum += value;
  return sum / per_task.size();
}

std::string format_score(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

}  // namespace ric
