#pragma once

// Core domain types shared by every module: tasks, questions, prompts,
// parsed responses, and label canonicalization. All types are immutable
// value objects; equality is structural.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ric {

using json = nlohmann::json;

// Sentinel answer used when no task label can be extracted from a
// completion. Scored as incorrect, tallied separately from labels.
inline constexpr const char* kAbstain = "ABSTAIN";

enum class AnswerFormat { boolean, option_letter, label_word };
enum class MetricKind { accuracy, macro_f1 };

enum class Strategy {
  direct,
  zero_shot_cot,
  recite_answer,
  icl,
  few_shot_cot,
  ric_unified,
  ric_staged,
};

std::string to_string(Strategy s);
std::optional<Strategy> strategy_from_string(const std::string& name);
std::string to_string(AnswerFormat f);
std::optional<AnswerFormat> answer_format_from_string(const std::string& name);
std::string to_string(MetricKind m);
std::optional<MetricKind> metric_from_string(const std::string& name);

// A subjective task: framing text, label set, answer format, metric.
struct TaskSpec {
  std::string id;
  std::string description;               // task framing shown before the question
  std::vector<std::string> labels;       // canonical labels, order is significant
  std::map<std::string, std::string> aliases;  // surface form -> canonical label
  AnswerFormat answer_format = AnswerFormat::label_word;
  MetricKind metric = MetricKind::accuracy;
  std::vector<std::string> f1_classes;   // subset of labels F1 is averaged over; empty = all

  // Throws std::invalid_argument on a violated invariant.
  void validate() const;

  bool operator==(const TaskSpec&) const = default;
};

// One test item.
struct QuestionInstance {
  std::string task_id;
  std::string question;
  // Ordered (letter, text) pairs; empty unless the task is option_letter.
  std::vector<std::pair<std::string, std::string>> options;
  std::string gold;  // canonical label

  bool operator==(const QuestionInstance&) const = default;
};

// One utterance of a simulated dialogue.
struct Utterance {
  std::string speaker;
  std::string text;

  bool operator==(const Utterance&) const = default;
};

// Parsed completion: keywords, scenario utterances, reasoning, answer.
struct StructuredResponse {
  std::vector<std::string> keywords;
  std::vector<Utterance> scenario;
  std::string reasoning;
  std::string answer = kAbstain;  // canonical label or kAbstain

  bool operator==(const StructuredResponse&) const = default;
};

// A solved exemplar placed before the test question.
struct Demonstration {
  QuestionInstance question;
  std::optional<std::string> rationale;           // few-shot CoT
  std::optional<StructuredResponse> structured;   // few-shot RiC

  bool operator==(const Demonstration&) const = default;
};

// Per-strategy knob settings.
struct StrategyKnobs {
  std::optional<int> keyword_count;  // require exactly n keywords
  std::optional<int> turn_count;     // require an m-turn dialogue
  int demo_count = 0;
  bool disable_keywords = false;     // RiC w/o KE
  bool disable_dialogue = false;     // RiC w/o DS
  long seed = 0;

  bool operator==(const StrategyKnobs&) const = default;
};

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

// Ordered chat messages produced by a strategy, plus provenance.
struct PromptBundle {
  Strategy strategy = Strategy::direct;
  std::vector<ChatMessage> messages;
  StrategyKnobs knobs;

  bool operator==(const PromptBundle&) const = default;
};

struct ModelConfig {
  std::string model_name;
  std::string endpoint;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::string api_key_env;

  bool operator==(const ModelConfig&) const = default;
};

// Returns the canonical label when `raw`, case-folded and stripped of
// surrounding punctuation, equals a label, an alias, or one of the given
// option letters. Total: returns nullopt on no match.
std::optional<std::string> canonicalize_label(
    const std::string& raw, const TaskSpec& task,
    const std::vector<std::pair<std::string, std::string>>& options = {});

// Lowercases and strips the punctuation set {. , ! ? ( ) " '} plus
// whitespace from both ends.
std::string fold_label_surface(const std::string& raw);

// JSON (de)serialization for the canonical dataset record and TaskSpec
// document formats.
void to_json(json& j, const TaskSpec& t);
void from_json(const json& j, TaskSpec& t);
void to_json(json& j, const QuestionInstance& q);
void from_json(const json& j, QuestionInstance& q);
void to_json(json& j, const Utterance& u);
void from_json(const json& j, Utterance& u);
void to_json(json& j, const StructuredResponse& r);
void from_json(const json& j, StructuredResponse& r);
void to_json(json& j, const StrategyKnobs& k);
void from_json(const json& j, StrategyKnobs& k);
void to_json(json& j, const ChatMessage& m);
void from_json(const json& j, ChatMessage& m);
void to_json(json& j, const ModelConfig& m);
void from_json(const json& j, ModelConfig& m);

}  // namespace ric
