#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ric/core.hpp"

using namespace ric;

namespace {

TaskSpec metaphor_task() {
  TaskSpec t;
  t.id = "metaphor";
  t.description = "Metaphor Recognition:";
  t.labels = {"True", "False"};
  t.answer_format = AnswerFormat::boolean;
  return t;
}

TaskSpec semeval_task() {
  TaskSpec t;
  t.id = "semeval";
  t.description = "Stance:";
  t.labels = {"favor", "against"};
  t.aliases = {{"favour", "favor"}, {"FAVOR", "favor"}, {"AGAINST", "against"}};
  t.metric = MetricKind::macro_f1;
  t.f1_classes = {"favor", "against"};
  return t;
}

}  // namespace

TEST_CASE("canonicalize_label folds case and punctuation") {
  const auto task = metaphor_task();
  CHECK(canonicalize_label("TRUE.", task) == "True");
  CHECK(canonicalize_label("  'false'! ", task) == "False");
  CHECK(canonicalize_label("maybe", task) == std::nullopt);
  CHECK(canonicalize_label("", task) == std::nullopt);
}

TEST_CASE("canonicalize_label resolves option letters") {
  TaskSpec task;
  task.id = "opt";
  task.labels = {"Alex could not meet", "We could not meet", "Ambiguous"};
  task.answer_format = AnswerFormat::option_letter;
  std::vector<std::pair<std::string, std::string>> options = {
      {"a", "Alex could not meet"},
      {"b", "We could not meet"},
      {"c", "Ambiguous"}};
  CHECK(canonicalize_label("(b)", task, options) == "We could not meet");
  CHECK(canonicalize_label("C", task, options) == "Ambiguous");
  CHECK(canonicalize_label("(z)", task, options) == std::nullopt);
}

TEST_CASE("canonicalize_label resolves aliases") {
  const auto task = semeval_task();
  CHECK(canonicalize_label("favour", task) == "favor");
  CHECK(canonicalize_label("AGAINST", task) == "against");
}

TEST_CASE("canonicalize_label is idempotent and closed over labels") {
  const auto task = semeval_task();
  std::mt19937 rng(7);
  const std::vector<std::string> surfaces = {"favour", "FAVOR.", "(against)",
                                             "favor!", "'AGAINST'", "none",
                                             "xyzzy", "fav"};
  for (int i = 0; i < 200; ++i) {
    const auto& raw = surfaces[rng() % surfaces.size()];
    auto first = canonicalize_label(raw, task);
    if (!first) continue;
    CHECK(std::find(task.labels.begin(), task.labels.end(), *first) !=
          task.labels.end());
    CHECK(canonicalize_label(*first, task) == first);
  }
}

TEST_CASE("TaskSpec invariants are enforced") {
  TaskSpec t = semeval_task();
  CHECK_NOTHROW(t.validate());
  t.aliases["bogus"] = "not a label";
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);

  TaskSpec dup = metaphor_task();
  dup.labels = {"True", "True"};
  CHECK_THROWS_AS(dup.validate(), std::invalid_argument);

  TaskSpec empty;
  empty.id = "empty";
  CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

  TaskSpec bad_f1 = semeval_task();
  bad_f1.f1_classes = {"neutral"};
  CHECK_THROWS_AS(bad_f1.validate(), std::invalid_argument);
}

TEST_CASE("core types round-trip through JSON") {
  const auto task = semeval_task();
  CHECK(json(task).get<TaskSpec>() == task);

  QuestionInstance q;
  q.task_id = "opt";
  q.question = "Which one?";
  q.options = {{"a", "first"}, {"b", "second"}};
  q.gold = "first";
  CHECK(json(q).get<QuestionInstance>() == q);

  QuestionInstance plain;
  plain.task_id = "metaphor";
  plain.question = "Is it?";
  plain.gold = "True";
  const json j = plain;
  CHECK(j.at("options").is_null());
  CHECK(j.get<QuestionInstance>() == plain);

  StructuredResponse r;
  r.keywords = {"a", "b"};
  r.scenario = {{"Sarah", "Hello."}, {"Amy", "Hi."}};
  r.reasoning = "Because.";
  r.answer = "favor";
  CHECK(json(r).get<StructuredResponse>() == r);

  StrategyKnobs k;
  k.keyword_count = 3;
  k.demo_count = 2;
  k.disable_dialogue = true;
  k.seed = 42;
  CHECK(json(k).get<StrategyKnobs>() == k);
}

TEST_CASE("strategy names round-trip") {
  for (auto s : {Strategy::direct, Strategy::zero_shot_cot,
                 Strategy::recite_answer, Strategy::icl,
                 Strategy::few_shot_cot, Strategy::ric_unified,
                 Strategy::ric_staged})
    CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_FALSE(strategy_from_string("nope").has_value());
}

TEST_CASE("default temperature is exactly zero") {
  ModelConfig cfg;
  CHECK(cfg.temperature == 0.0);
  CHECK_THROWS(json{{"model_name", "m"}, {"temperature", -1.0}}.get<ModelConfig>());
}
