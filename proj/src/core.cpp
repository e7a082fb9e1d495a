#include "ric/core.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>

namespace ric {

namespace {

const std::vector<std::pair<Strategy, std::string>> kStrategyNames = {
    {Strategy::direct, "direct"},
    {Strategy::zero_shot_cot, "zero_shot_cot"},
    {Strategy::recite_answer, "recite_answer"},
    {Strategy::icl, "icl"},
    {Strategy::few_shot_cot, "few_shot_cot"},
    {Strategy::ric_unified, "ric_unified"},
    {Strategy::ric_staged, "ric_staged"},
};

bool is_edge_punct(char c) {
  switch (c) {
    case '.': case ',': case '!': case '?':
    case '(': case ')': case '"': case '\'':
      return true;
    default:
      return std::isspace(static_cast<unsigned char>(c)) != 0;
  }
}

}  // namespace

std::string to_string(Strategy s) {
  for (const auto& [v, n] : kStrategyNames)
    if (v == s) return n;
  return "unknown";
}

std::optional<Strategy> strategy_from_string(const std::string& name) {
  for (const auto& [v, n] : kStrategyNames)
    if (n == name) return v;
  return std::nullopt;
}

std::string to_string(AnswerFormat f) {
  switch (f) {
    case AnswerFormat::boolean: return "boolean";
    case AnswerFormat::option_letter: return "option_letter";
    case AnswerFormat::label_word: return "label_word";
  }
  return "label_word";
}

std::optional<AnswerFormat> answer_format_from_string(const std::string& name) {
  if (name == "boolean") return AnswerFormat::boolean;
  if (name == "option_letter") return AnswerFormat::option_letter;
  if (name == "label_word") return AnswerFormat::label_word;
  return std::nullopt;
}

std::string to_string(MetricKind m) {
  return m == MetricKind::accuracy ? "accuracy" : "macro_f1";
}

std::optional<MetricKind> metric_from_string(const std::string& name) {
  if (name == "accuracy") return MetricKind::accuracy;
  if (name == "macro_f1") return MetricKind::macro_f1;
  return std::nullopt;
}

void TaskSpec::validate() const {
  if (labels.empty())
    throw std::invalid_argument("task '" + id + "': labels must be nonempty");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size())
    throw std::invalid_argument("task '" + id + "': labels must be distinct");
  for (const auto& [surface, canon] : aliases) {
    if (!seen.count(canon))
      throw std::invalid_argument("task '" + id + "': alias '" + surface +
                                  "' maps to unknown label '" + canon + "'");
  }
  for (const auto& c : f1_classes) {
    if (!seen.count(c))
      throw std::invalid_argument("task '" + id + "': f1_class '" + c +
                                  "' is not a label");
  }
}

std::string fold_label_surface(const std::string& raw) {
  size_t begin = 0, end = raw.size();
  while (begin < end && is_edge_punct(raw[begin])) ++begin;
  while (end > begin && is_edge_punct(raw[end - 1])) --end;
  std::string out = raw.substr(begin, end - begin);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<std::string> canonicalize_label(
    const std::string& raw, const TaskSpec& task,
    const std::vector<std::pair<std::string, std::string>>& options) {
  const std::string folded = fold_label_surface(raw);
  if (folded.empty()) return std::nullopt;
  for (const auto& label : task.labels)
    if (fold_label_surface(label) == folded) return label;
  for (const auto& [surface, canon] : task.aliases)
    if (fold_label_surface(surface) == folded) return canon;
  for (const auto& [letter, text] : options) {
    if (fold_label_surface(letter) == folded) {
      // The option text itself may be a label or alias of the task.
      if (auto canon = canonicalize_label(text, task)) return canon;
      return text;
    }
  }
  return std::nullopt;
}

void to_json(json& j, const TaskSpec& t) {
  j = json{{"id", t.id},
           {"description", t.description},
           {"labels", t.labels},
           {"aliases", t.aliases},
           {"answer_format", to_string(t.answer_format)},
           {"metric", to_string(t.metric)},
           {"f1_classes", t.f1_classes}};
}

void from_json(const json& j, TaskSpec& t) {
  j.at("id").get_to(t.id);
  j.at("description").get_to(t.description);
  j.at("labels").get_to(t.labels);
  if (j.contains("aliases")) j.at("aliases").get_to(t.aliases);
  if (j.contains("answer_format")) {
    auto f = answer_format_from_string(j.at("answer_format").get<std::string>());
    if (!f) throw std::invalid_argument("unknown answer_format");
    t.answer_format = *f;
  }
  if (j.contains("metric")) {
    auto m = metric_from_string(j.at("metric").get<std::string>());
    if (!m) throw std::invalid_argument("unknown metric");
    t.metric = *m;
  }
  if (j.contains("f1_classes")) j.at("f1_classes").get_to(t.f1_classes);
  t.validate();
}

void to_json(json& j, const QuestionInstance& q) {
  j = json{{"task_id", q.task_id}, {"question", q.question}, {"gold", q.gold}};
  if (q.options.empty()) {
    j["options"] = nullptr;
  } else {
    json opts = json::array();
    for (const auto& [letter, text] : q.options)
      opts.push_back(json::array({letter, text}));
    j["options"] = opts;
  }
}

void from_json(const json& j, QuestionInstance& q) {
  j.at("task_id").get_to(q.task_id);
  j.at("question").get_to(q.question);
  j.at("gold").get_to(q.gold);
  q.options.clear();
  if (j.contains("options") && !j.at("options").is_null()) {
    for (const auto& pair : j.at("options"))
      q.options.emplace_back(pair.at(0).get<std::string>(),
                             pair.at(1).get<std::string>());
  }
}

void to_json(json& j, const Utterance& u) {
  j = json{{"speaker", u.speaker}, {"text", u.text}};
}

void from_json(const json& j, Utterance& u) {
  j.at("speaker").get_to(u.speaker);
  j.at("text").get_to(u.text);
}

void to_json(json& j, const StructuredResponse& r) {
  j = json{{"keywords", r.keywords},
           {"scenario", r.scenario},
           {"reasoning", r.reasoning},
           {"answer", r.answer}};
}

void from_json(const json& j, StructuredResponse& r) {
  j.at("keywords").get_to(r.keywords);
  j.at("scenario").get_to(r.scenario);
  j.at("reasoning").get_to(r.reasoning);
  j.at("answer").get_to(r.answer);
}

void to_json(json& j, const StrategyKnobs& k) {
  j = json::object();
  if (k.keyword_count) j["keyword_count"] = *k.keyword_count;
  if (k.turn_count) j["turn_count"] = *k.turn_count;
  j["demo_count"] = k.demo_count;
  j["disable_keywords"] = k.disable_keywords;
  j["disable_dialogue"] = k.disable_dialogue;
  j["seed"] = k.seed;
}

void from_json(const json& j, StrategyKnobs& k) {
  k = StrategyKnobs{};
  if (j.contains("keyword_count")) k.keyword_count = j.at("keyword_count").get<int>();
  if (j.contains("turn_count")) k.turn_count = j.at("turn_count").get<int>();
  if (j.contains("demo_count")) j.at("demo_count").get_to(k.demo_count);
  if (j.contains("disable_keywords")) j.at("disable_keywords").get_to(k.disable_keywords);
  if (j.contains("disable_dialogue")) j.at("disable_dialogue").get_to(k.disable_dialogue);
  if (j.contains("seed")) j.at("seed").get_to(k.seed);
}

void to_json(json& j, const ChatMessage& m) {
  j = json{{"role", m.role}, {"content", m.content}};
}

void from_json(const json& j, ChatMessage& m) {
  j.at("role").get_to(m.role);
  j.at("content").get_to(m.content);
}

void to_json(json& j, const ModelConfig& m) {
  j = json{{"model_name", m.model_name},
           {"endpoint", m.endpoint},
           {"temperature", m.temperature},
           {"max_tokens", m.max_tokens},
           {"api_key_env", m.api_key_env}};
}

void from_json(const json& j, ModelConfig& m) {
  j.at("model_name").get_to(m.model_name);
  if (j.contains("endpoint")) j.at("endpoint").get_to(m.endpoint);
  if (j.contains("temperature")) j.at("temperature").get_to(m.temperature);
  if (j.contains("max_tokens")) j.at("max_tokens").get_to(m.max_tokens);
  if (j.contains("api_key_env")) j.at("api_key_env").get_to(m.api_key_env);
  if (m.temperature < 0)
    throw std::invalid_argument("temperature must be >= 0");
}

}  // namespace ric
