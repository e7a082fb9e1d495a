#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "ric/core.hpp"
#include "ric/metrics.hpp"

using namespace ric;

namespace {

// Independent brute-force oracle: explicit confusion-matrix enumeration,
// written against the metric definitions rather than the implementation.
double oracle_accuracy(const std::vector<std::string>& preds,
                       const std::vector<std::string>& golds) {
  int correct = 0;
  for (size_t i = 0; i < preds.size(); ++i)
    if (preds[i] == golds[i] && preds[i] != kAbstain) ++correct;
  return 100.0 * correct / preds.size();
}

double oracle_macro_f1(const std::vector<std::string>& preds,
                       const std::vector<std::string>& golds,
                       const std::vector<std::string>& classes) {
  double total = 0.0;
  for (const auto& c : classes) {
    int tp = 0, fp = 0, fn = 0, tn = 0;
    for (size_t i = 0; i < preds.size(); ++i) {
      const bool p = preds[i] == c && preds[i] != kAbstain;
      const bool g = golds[i] == c;
      if (p && g) ++tp;
      if (p && !g) ++fp;
      if (!p && g) ++fn;
      if (!p && !g) ++tn;
    }
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    if (tp + fp > 0) precision = double(tp) / (tp + fp);
    if (tp + fn > 0) recall = double(tp) / (tp + fn);
    if (precision + recall > 0) f1 = 2 * precision * recall / (precision + recall);
    total += f1;
  }
  return 100.0 * total / classes.size();
}

TaskSpec stance_task() {
  TaskSpec t;
  t.id = "stance";
  t.labels = {"favor", "against"};
  t.metric = MetricKind::macro_f1;
  t.f1_classes = {"favor", "against"};
  return t;
}

}  // namespace

TEST_CASE("accuracy basics") {
  CHECK(accuracy({"T", "F", "T"}, {"T", "T", "T"}) == doctest::Approx(100.0 * 2 / 3));
  CHECK(accuracy({"T", "T"}, {"T", "T"}) == 100.0);
  CHECK(accuracy({kAbstain}, {"T"}) == 0.0);
  CHECK_THROWS_AS(accuracy({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(accuracy({"T"}, {"T", "F"}), std::invalid_argument);
}

TEST_CASE("macro_f1 hand-computed example") {
  // favor: tp=2 fp=1 fn=1 -> p=2/3 r=2/3 f1=2/3; against: no tp -> 0.
  // Hand value re-checked by the oracle below.
  const std::vector<std::string> preds = {"favor", "against", "favor"};
  const std::vector<std::string> golds = {"favor", "favor", "favor"};
  const std::vector<std::string> classes = {"favor", "against"};
  const double expected = oracle_macro_f1(preds, golds, classes);
  CHECK(expected == doctest::Approx(40.0));
  CHECK(macro_f1(preds, golds, classes) == doctest::Approx(expected));
}

TEST_CASE("macro_f1 degenerate conventions") {
  CHECK(macro_f1({"a", "a"}, {"a", "a"}, {"a", "b"}) == doctest::Approx(50.0));
  CHECK(macro_f1({"a"}, {"a"}, {"a"}) == doctest::Approx(100.0));
  // Class absent from preds and golds scores 0 by the 0/0 convention.
  CHECK(macro_f1({"a"}, {"a"}, {"c"}) == 0.0);
}

TEST_CASE("metrics agree with the brute-force oracle on random instances") {
  std::mt19937 rng(2024);
  const std::vector<std::string> alphabet = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + int(rng() % 20);
    const int k = 1 + int(rng() % 4);
    std::vector<std::string> classes(alphabet.begin(), alphabet.begin() + k);
    std::vector<std::string> preds, golds;
    for (int i = 0; i < n; ++i) {
      golds.push_back(classes[rng() % k]);
      // Mix in abstentions and out-of-class predictions.
      const int roll = int(rng() % 10);
      if (roll == 0) preds.push_back(kAbstain);
      else preds.push_back(alphabet[rng() % 4]);
    }
    // Degenerate variants on some trials.
    if (trial % 17 == 0) preds.assign(n, golds[0]);       // constant predictor
    if (trial % 23 == 0) preds.assign(n, kAbstain);       // all-ABSTAIN
    if (trial % 29 == 0) golds.assign(n, classes[0]);     // single-class golds
    CHECK(accuracy(preds, golds) == doctest::Approx(oracle_accuracy(preds, golds)));
    CHECK(macro_f1(preds, golds, classes) ==
          doctest::Approx(oracle_macro_f1(preds, golds, classes)));
  }
}

TEST_CASE("permutation invariance") {
  std::mt19937 rng(5);
  std::vector<std::string> preds = {"a", "b", kAbstain, "a", "c", "b"};
  std::vector<std::string> golds = {"a", "a", "c", "b", "c", "b"};
  const std::vector<std::string> classes = {"a", "b", "c"};
  const double acc = accuracy(preds, golds);
  const double f1 = macro_f1(preds, golds, classes);
  std::vector<size_t> order = {0, 1, 2, 3, 4, 5};
  for (int i = 0; i < 20; ++i) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::string> p2, g2;
    for (size_t idx : order) {
      p2.push_back(preds[idx]);
      g2.push_back(golds[idx]);
    }
    CHECK(accuracy(p2, g2) == doctest::Approx(acc));
    CHECK(macro_f1(p2, g2, classes) == doctest::Approx(f1));
  }
}

TEST_CASE("expected_random_score is 100 over the label count") {
  TaskSpec two = stance_task();
  CHECK(expected_random_score(two) == 50.0);
  TaskSpec four;
  four.id = "seq";
  four.labels = {"a", "b", "c", "d"};
  CHECK(expected_random_score(four) == 25.0);
}

TEST_CASE("majority_score") {
  TaskSpec acc_task;
  acc_task.id = "m";
  acc_task.labels = {"T", "F"};
  CHECK(majority_score({"T", "T", "F"}, acc_task) == doctest::Approx(100.0 * 2 / 3));
  // Tie breaks to the first label in task order.
  CHECK(majority_score({"T", "F"}, acc_task) == doctest::Approx(50.0));

  // All-one-class golds under two-class macro F1: the constant modal
  // prediction gets F1=1 on its class and 0 on the other -> 50.00.
  TaskSpec f1_task = stance_task();
  CHECK(majority_score({"favor", "favor", "favor"}, f1_task) ==
        doctest::Approx(50.0));
  CHECK_THROWS_AS(majority_score({}, acc_task), std::invalid_argument);
}

TEST_CASE("aggregate") {
  CHECK(aggregate({{"a", 50.0}, {"b", 25.0}}) == doctest::Approx(37.5));
  CHECK(aggregate({{"solo", 61.2}}) == doctest::Approx(61.2));
  CHECK_THROWS_AS(aggregate({}), std::invalid_argument);
}

TEST_CASE("score dispatches on the task metric") {
  TaskSpec f1_task = stance_task();
  const std::vector<std::string> preds = {"favor", "against", "favor"};
  const std::vector<std::string> golds = {"favor", "favor", "favor"};
  CHECK(score(preds, golds, f1_task) == doctest::Approx(40.0));
  TaskSpec acc_task = f1_task;
  acc_task.metric = MetricKind::accuracy;
  CHECK(score(preds, golds, acc_task) == doctest::Approx(100.0 * 2 / 3));
}

TEST_CASE("format_score renders two decimals") {
  CHECK(format_score(40.9722) == "40.97");
  CHECK(format_score(50.0) == "50.00");
  CHECK(format_score(0.0) == "0.00");
}
