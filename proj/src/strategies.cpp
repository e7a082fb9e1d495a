#include "ric/strategies.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ric/toml.hpp"

namespace ric {

namespace {

std::string render_question(const QuestionInstance& q) {
  if (q.question.empty())
    throw std::invalid_argument("question text must not be empty (task '" +
                                q.task_id + "')");
  std::string out = q.question;
  for (const auto& [letter, text] : q.options)
    out += "\n(" + letter + ") " + text;
  return out;
}

std::string join_with_or(const std::vector<std::string>& items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " or " : ", ";
    out += items[i];
  }
  return out;
}

// "First, extract keywords ..." -> "First, extract 3 keywords ..."
std::string with_keyword_count(const std::string& p1, int n) {
  const std::string needle = "keywords";
  auto pos = p1.find(needle);
  if (pos == std::string::npos)
    return p1 + " Extract exactly " + std::to_string(n) + " keywords.";
  return p1.substr(0, pos) + std::to_string(n) + " " + p1.substr(pos);
}

// "... in the form of dialogue." -> "... in the form of dialogue with 2 turns."
std::string with_turn_count(const std::string& p2, int m) {
  const std::string req =
      " with " + std::to_string(m) + (m == 1 ? " turn" : " turns");
  const std::string needle = "dialogue";
  auto pos = p2.rfind(needle);
  if (pos == std::string::npos)
    return p2 + " The dialogue should contain" + req + ".";
  return p2.substr(0, pos + needle.size()) + req +
         p2.substr(pos + needle.size());
}

std::string render_keywords_line(const std::vector<std::string>& keywords) {
  std::string out;
  for (size_t i = 0; i < keywords.size(); ++i) {
    if (i > 0) out += ", ";
    out += keywords[i];
  }
  return out + ".";
}

std::string render_scenario_lines(const std::vector<Utterance>& scenario) {
  std::string out;
  for (size_t i = 0; i < scenario.size(); ++i) {
    if (i > 0) out += "\n";
    out += scenario[i].speaker + ": " + scenario[i].text;
  }
  return out;
}

PromptBundle assemble(Strategy strategy,
                      const std::vector<std::string>& segments,
                      const StrategyKnobs& knobs,
                      const PromptTemplateSet& templates) {
  std::string content;
  for (size_t i = 0; i < segments.size(); ++i) {
    if (i > 0) content += templates.separator;
    content += segments[i];
  }
  PromptBundle bundle;
  bundle.strategy = strategy;
  bundle.knobs = knobs;
  if (templates.system_message)
    bundle.messages.push_back({"system", *templates.system_message});
  bundle.messages.push_back({"user", content});
  return bundle;
}

// One few-shot RiC exemplar: the demo question followed by the full
// Keywords/Scenario/Reasoning response it should elicit.
std::string render_ric_demo(const Demonstration& demo,
                            const StrategyKnobs& knobs) {
  if (!demo.structured)
    throw std::invalid_argument(
        "ric few-shot demonstrations must carry a structured exemplar");
  const StructuredResponse& s = *demo.structured;
  std::string out = render_question(demo.question);
  if (!knobs.disable_keywords)
    out += "\nKeywords:\n" + render_keywords_line(s.keywords);
  if (!knobs.disable_dialogue)
    out += "\nScenario:\n" + render_scenario_lines(s.scenario);
  out += "\nReasoning:\n";
  out += s.reasoning.empty() ? "The answer is " + s.answer + "." : s.reasoning;
  return out;
}

}  // namespace

void PromptTemplateSet::validate() const {
  if (p1.empty() || p2.empty() || p3.empty())
    throw std::invalid_argument("template triggers p1, p2, p3 must be nonempty");
}

PromptTemplateSet PromptTemplateSet::load(const std::string& path) {
  json doc = load_config_file(path);
  PromptTemplateSet t;
  auto get = [&](const char* key, std::string& field) {
    if (doc.contains(key)) doc.at(key).get_to(field);
  };
  get("p1", t.p1);
  get("p2", t.p2);
  get("p3", t.p3);
  get("recite_trigger", t.recite_trigger);
  get("cot_trigger", t.cot_trigger);
  get("separator", t.separator);
  get("answer_instruction", t.answer_instruction);
  if (doc.contains("system_message"))
    t.system_message = doc.at("system_message").get<std::string>();
  t.validate();
  return t;
}

std::string answer_instruction_for(const TaskSpec& task,
                                   const QuestionInstance& q,
                                   const PromptTemplateSet& templates) {
  if (!templates.answer_instruction.empty()) return templates.answer_instruction;
  if (task.answer_format == AnswerFormat::option_letter && !q.options.empty()) {
    std::vector<std::string> letters;
    letters.reserve(q.options.size());
    for (const auto& [letter, text] : q.options)
      letters.push_back("(" + letter + ")");
    return "Select from " + join_with_or(letters) + ".";
  }
  return "Select from " + join_with_or(task.labels) + ".";
}

PromptBundle build_ric_unified(const TaskSpec& task, const QuestionInstance& q,
                               const std::vector<Demonstration>& demos,
                               const StrategyKnobs& knobs,
                               const PromptTemplateSet& templates) {
  templates.validate();
  if (knobs.disable_keywords && knobs.disable_dialogue)
    throw std::invalid_argument(
        "disabling both keyword extraction and dialogue simulation "
        "degenerates to the direct strategy; request 'direct' instead");
  std::vector<std::string> segments;
  segments.push_back(task.description);
  for (const auto& demo : demos) segments.push_back(render_ric_demo(demo, knobs));
  segments.push_back(render_question(q));
  if (!knobs.disable_keywords) {
    segments.push_back(knobs.keyword_count
                           ? with_keyword_count(templates.p1, *knobs.keyword_count)
                           : templates.p1);
  }
  if (!knobs.disable_dialogue) {
    segments.push_back(knobs.turn_count
                           ? with_turn_count(templates.p2, *knobs.turn_count)
                           : templates.p2);
  }
  segments.push_back(templates.p3 + " " +
                     answer_instruction_for(task, q, templates));
  return assemble(Strategy::ric_unified, segments, knobs, templates);
}

PromptBundle build_ric_staged_step(int step, const TaskSpec& task,
                                   const QuestionInstance& q,
                                   const StructuredResponse& prior,
                                   const PromptTemplateSet& templates) {
  templates.validate();
  std::vector<std::string> segments = {task.description, render_question(q)};
  StrategyKnobs knobs;
  switch (step) {
    case 1:
      segments.push_back(templates.p1);
      break;
    case 2:
      if (prior.keywords.empty())
        throw std::invalid_argument(
            "staged step 2 requires keywords from step 1");
      segments.push_back("Keywords: " + render_keywords_line(prior.keywords));
      segments.push_back(templates.p2);
      break;
    case 3:
      if (prior.scenario.empty())
        throw std::invalid_argument(
            "staged step 3 requires a scenario from step 2");
      segments.push_back("Scenario:\n" + render_scenario_lines(prior.scenario));
      segments.push_back(templates.p3 + " " +
                         answer_instruction_for(task, q, templates));
      break;
    default:
      throw std::invalid_argument("staged step must be 1, 2 or 3");
  }
  return assemble(Strategy::ric_staged, segments, knobs, templates);
}

PromptBundle build_direct(const TaskSpec& task, const QuestionInstance& q,
                          const PromptTemplateSet& templates) {
  std::vector<std::string> segments = {
      task.description, render_question(q),
      answer_instruction_for(task, q, templates)};
  return assemble(Strategy::direct, segments, StrategyKnobs{}, templates);
}

PromptBundle build_zero_shot_cot(const TaskSpec& task,
                                 const QuestionInstance& q,
                                 const PromptTemplateSet& templates) {
  std::vector<std::string> segments = {
      task.description, render_question(q), templates.cot_trigger,
      answer_instruction_for(task, q, templates)};
  auto bundle = assemble(Strategy::zero_shot_cot, segments, StrategyKnobs{},
                         templates);
  return bundle;
}

PromptBundle build_recite_answer(const TaskSpec& task,
                                 const QuestionInstance& q,
                                 const PromptTemplateSet& templates) {
  std::vector<std::string> segments = {
      task.description, render_question(q), templates.recite_trigger,
      answer_instruction_for(task, q, templates)};
  return assemble(Strategy::recite_answer, segments, StrategyKnobs{},
                  templates);
}

PromptBundle build_icl(const TaskSpec& task, const QuestionInstance& q,
                       const std::vector<Demonstration>& demos,
                       const PromptTemplateSet& templates) {
  if (demos.empty())
    throw std::invalid_argument("icl requires at least one demonstration");
  std::vector<std::string> segments = {task.description};
  for (const auto& demo : demos)
    segments.push_back(render_question(demo.question) + "\nAnswer: " +
                       demo.question.gold);
  segments.push_back(render_question(q));
  segments.push_back(answer_instruction_for(task, q, templates));
  StrategyKnobs knobs;
  knobs.demo_count = static_cast<int>(demos.size());
  return assemble(Strategy::icl, segments, knobs, templates);
}

PromptBundle build_few_shot_cot(const TaskSpec& task,
                                const QuestionInstance& q,
                                const std::vector<Demonstration>& demos,
                                const PromptTemplateSet& templates) {
  if (demos.empty())
    throw std::invalid_argument(
        "few_shot_cot requires at least one demonstration");
  std::vector<std::string> segments = {task.description};
  for (const auto& demo : demos) {
    if (!demo.rationale)
      throw std::invalid_argument(
          "few_shot_cot demonstrations must carry a rationale");
    segments.push_back(render_question(demo.question) + "\n" +
                       *demo.rationale + "\nAnswer: " + demo.question.gold);
  }
  segments.push_back(render_question(q));
  segments.push_back(answer_instruction_for(task, q, templates));
  StrategyKnobs knobs;
  knobs.demo_count = static_cast<int>(demos.size());
  return assemble(Strategy::few_shot_cot, segments, knobs, templates);
}

PromptBundle build_prompt(Strategy strategy, const TaskSpec& task,
                          const QuestionInstance& q,
                          const std::vector<Demonstration>& demos,
                          const StrategyKnobs& knobs,
                          const PromptTemplateSet& templates) {
  switch (strategy) {
    case Strategy::direct:
      return build_direct(task, q, templates);
    case Strategy::zero_shot_cot:
      return build_zero_shot_cot(task, q, templates);
    case Strategy::recite_answer:
      return build_recite_answer(task, q, templates);
    case Strategy::icl:
      return build_icl(task, q, demos, templates);
    case Strategy::few_shot_cot:
      return build_few_shot_cot(task, q, demos, templates);
    case Strategy::ric_unified:
      return build_ric_unified(task, q, demos, knobs, templates);
    case Strategy::ric_staged:
      throw std::invalid_argument(
          "ric_staged is multi-call; drive it through the runner");
  }
  throw std::invalid_argument("unknown strategy");
}

}  // namespace ric
