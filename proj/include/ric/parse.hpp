#pragma once

// Decomposes raw completions into structured form (keywords, scenario,
// reasoning, answer) and computes corpus-level statistics.

#include <optional>
#include <string>
#include <vector>

#include "ric/core.hpp"

namespace ric {

// Raw spans following the "Keywords:" / "Scenario:" / "Reasoning:" headers
// (case-insensitive, optional markdown wrappers, any order). Blocks are
// kept verbatim so header + block concatenation is lossless. Text before
// the first header becomes the reasoning block when no Reasoning header
// exists, otherwise it is preserved in `discarded_preamble`.
struct Sections {
  std::optional<std::string> keywords;
  std::optional<std::string> scenario;
  std::optional<std::string> reasoning;
  std::string discarded_preamble;
};

Sections split_sections(const std::string& text);

// Splits on commas and newlines; trims whitespace and terminal periods.
std::vector<std::string> extract_keywords(const std::string& block);

// Lines shaped "Name: text" (name <= 40 chars, no sentence punctuation)
// start an utterance; anything else continues the previous one.
std::vector<Utterance> parse_scenario(const std::string& block);

// One turn = one adjacent exchange between distinct speakers:
// floor(alternations / 2), raised to 1 when at least two utterances exist.
int count_dialogue_turns(const std::vector<Utterance>& utterances);

// Cue patterns in priority order ("the answer is X", "final answer: X",
// standalone "(x)"), then the last label/alias occurrence anywhere in the
// text. Returns kAbstain when nothing canonicalizes.
std::string extract_answer(
    const std::string& text, const TaskSpec& task,
    const std::vector<std::pair<std::string, std::string>>& options = {});

// Full pipeline: sections -> keywords/scenario/reasoning -> answer.
StructuredResponse parse_completion(
    const std::string& text, const TaskSpec& task,
    const std::vector<std::pair<std::string, std::string>>& options = {});

struct CorpusStatistics {
  std::optional<double> mean_keyword_count;  // over responses with keywords
  std::optional<double> mean_turn_count;     // over responses with a scenario
  double abstain_rate = 0.0;
  long responses_without_keywords = 0;
  long responses_without_scenario = 0;
};

CorpusStatistics corpus_statistics(const std::vector<StructuredResponse>& responses);

}  // namespace ric
