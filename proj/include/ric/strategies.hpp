#pragma once

// Prompt construction for every supported strategy: the three-stage
// keyword/dialogue/reasoning method (unified and staged), its ablations,
// and the zero-/few-shot baselines.

#include <optional>
#include <string>
#include <vector>

#include "ric/core.hpp"

namespace ric {

// Trigger sentences and layout glue. Defaults are the canonical wording;
// every field is overridable from a template file.
struct PromptTemplateSet {
  std::string p1 = "First, extract keywords from the question.";
  std::string p2 =
      "Then, according to the keywords, construct a scenario for the "
      "question in the form of dialogue.";
  std::string p3 =
      "Finally, according to the question and conversation, reason and give "
      "the final answer.";
  std::string recite_trigger =
      "First, recite relevant knowledge or passages for the question. Then, "
      "according to the recitation, give the final answer.";
  std::string cot_trigger = "Let's think step by step.";
  std::string separator = "\n\n";  // blank line between segments
  // Optional fixed answer instruction; when empty one is derived from the
  // task's answer format and the question's options.
  std::string answer_instruction;
  std::optional<std::string> system_message;

  void validate() const;

  // Loads overrides from a JSON or TOML file keyed by the field names above.
  static PromptTemplateSet load(const std::string& path);

  bool operator==(const PromptTemplateSet&) const = default;
};

// "Select from True or False." / "Select from (a), (b) or (c)." etc.
std::string answer_instruction_for(
    const TaskSpec& task, const QuestionInstance& q,
    const PromptTemplateSet& templates);

// Single-call prompt: T + Q + P1 + P2 + P3, with optional few-shot
// exemplars carrying the full Keywords/Scenario/Reasoning structure.
// disable_keywords drops the P1 segment, disable_dialogue drops P2;
// both together degenerate to the direct strategy and are rejected.
PromptBundle build_ric_unified(const TaskSpec& task, const QuestionInstance& q,
                               const std::vector<Demonstration>& demos,
                               const StrategyKnobs& knobs,
                               const PromptTemplateSet& templates);

// One of the three staged calls. Step 2 requires prior.keywords, step 3
// requires prior.scenario; the keywords do not reappear in step 3.
PromptBundle build_ric_staged_step(int step, const TaskSpec& task,
                                   const QuestionInstance& q,
                                   const StructuredResponse& prior,
                                   const PromptTemplateSet& templates);

PromptBundle build_direct(const TaskSpec& task, const QuestionInstance& q,
                          const PromptTemplateSet& templates);

PromptBundle build_zero_shot_cot(const TaskSpec& task,
                                 const QuestionInstance& q,
                                 const PromptTemplateSet& templates);

PromptBundle build_recite_answer(const TaskSpec& task,
                                 const QuestionInstance& q,
                                 const PromptTemplateSet& templates);

PromptBundle build_icl(const TaskSpec& task, const QuestionInstance& q,
                       const std::vector<Demonstration>& demos,
                       const PromptTemplateSet& templates);

PromptBundle build_few_shot_cot(const TaskSpec& task,
                                const QuestionInstance& q,
                                const std::vector<Demonstration>& demos,
                                const PromptTemplateSet& templates);

// Dispatch by strategy enum; demos ignored by zero-shot strategies.
// ric_staged is multi-call and handled by the runner, not here.
PromptBundle build_prompt(Strategy strategy, const TaskSpec& task,
                          const QuestionInstance& q,
                          const std::vector<Demonstration>& demos,
                          const StrategyKnobs& knobs,
                          const PromptTemplateSet& templates);

}  // namespace ric
