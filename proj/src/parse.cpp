#include "ric/parse.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace ric {

namespace {

struct HeaderHit {
  size_t line_begin;   // offset of the header line
  size_t block_begin;  // offset just past the header (colon and wrappers)
  int which;           // 0 keywords, 1 scenario, 2 reasoning
};

// Matches a section header at the start of a line: optional markdown
// wrappers around "Keywords:" / "Scenario:" / "Reasoning:"; content may
// follow on the same line.
const std::regex kHeaderRe(
    R"(^[ \t]*[*#_]*[ \t]*(keywords|scenario|reasoning)[ \t]*:[*_]*)",
    std::regex::icase);

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Sections split_sections(const std::string& text) {
  std::vector<HeaderHit> hits;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    const std::string line =
        text.substr(pos, eol == std::string::npos ? std::string::npos
                                                  : eol - pos);
    std::smatch m;
    if (std::regex_search(line, m, kHeaderRe) && m.position(0) == 0) {
      const std::string name = lower(m[1].str());
      HeaderHit hit;
      hit.line_begin = pos;
      hit.block_begin = pos + m.length(0);
      hit.which = name == "keywords" ? 0 : name == "scenario" ? 1 : 2;
      hits.push_back(hit);
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }

  Sections out;
  std::optional<std::string>* slots[3] = {&out.keywords, &out.scenario,
                                          &out.reasoning};
  for (size_t i = 0; i < hits.size(); ++i) {
    size_t end = (i + 1 < hits.size()) ? hits[i + 1].line_begin : text.size();
    std::string block = text.substr(hits[i].block_begin,
                                    end - hits[i].block_begin);
    // First header of each name wins; later duplicates are appended.
    auto& slot = *slots[hits[i].which];
    if (slot)
      *slot += block;
    else
      slot = block;
  }

  // No headers at all: every block stays absent and callers fall back to
  // whole-text answer extraction.
  if (!hits.empty() && hits.front().line_begin > 0) {
    const std::string preamble = text.substr(0, hits.front().line_begin);
    if (!out.reasoning)
      out.reasoning = preamble;
    else
      out.discarded_preamble = preamble;
  }
  return out;
}

std::vector<std::string> extract_keywords(const std::string& block) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::string item = trim(current);
    while (!item.empty() && item.back() == '.') item.pop_back();
    item = trim(item);
    if (!item.empty()) out.push_back(item);
    current.clear();
  };
  for (char c : block) {
    if (c == ',' || c == '\n')
      flush();
    else
      current += c;
  }
  flush();
  return out;
}

std::vector<Utterance> parse_scenario(const std::string& block) {
  std::vector<Utterance> out;
  size_t pos = 0;
  while (pos <= block.size()) {
    size_t eol = block.find('\n', pos);
    std::string line = block.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos);
    const std::string trimmed = trim(line);
    bool is_new_utterance = false;
    std::string speaker, text;
    // A speaker colon is followed by whitespace or ends the line; this
    // skips the scheme colon of URLs.
    size_t colon = std::string::npos;
    for (size_t i = 0; i < trimmed.size(); ++i) {
      if (trimmed[i] == ':' &&
          (i + 1 == trimmed.size() ||
           std::isspace(static_cast<unsigned char>(trimmed[i + 1])))) {
        colon = i;
        break;
      }
    }
    if (colon != std::string::npos && colon > 0 && colon <= 40) {
      speaker = trim(trimmed.substr(0, colon));
      // A speaker name carries no sentence punctuation or path separators.
      if (!speaker.empty() &&
          speaker.find_first_of(".!?\"/") == std::string::npos) {
        text = trim(trimmed.substr(colon + 1));
        is_new_utterance = true;
      }
    }
    if (is_new_utterance) {
      out.push_back({speaker, text});
    } else if (!trimmed.empty() && !out.empty()) {
      out.back().text += " " + trimmed;
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return out;
}

int count_dialogue_turns(const std::vector<Utterance>& utterances) {
  if (utterances.size() <= 1) return 0;
  int alternations = 0;
  for (size_t i = 1; i < utterances.size(); ++i)
    if (utterances[i].speaker != utterances[i - 1].speaker) ++alternations;
  return std::max(1, alternations / 2);
}

std::string extract_answer(
    const std::string& text, const TaskSpec& task,
    const std::vector<std::pair<std::string, std::string>>& options) {
  static const std::regex kAnswerIs(R"(the\s+answer\s+is\s*:?\s*([^\n.!?]+))",
                                    std::regex::icase);
  static const std::regex kFinalAnswer(R"(final\s+answer\s*(?:is)?\s*:?\s*([^\n.!?]+))",
                                       std::regex::icase);
  static const std::regex kOptionLetter(R"(\(([A-Za-z])\))");

  auto last_match_canonical =
      [&](const std::regex& re) -> std::optional<std::string> {
    std::optional<std::string> result;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
         it != std::sregex_iterator(); ++it) {
      if (auto canon = canonicalize_label((*it)[1].str(), task, options))
        result = canon;
    }
    return result;
  };

  if (auto hit = last_match_canonical(kAnswerIs)) return *hit;
  if (auto hit = last_match_canonical(kFinalAnswer)) return *hit;
  if (auto hit = last_match_canonical(kOptionLetter)) return *hit;

  // Fallback: last occurrence of any label or alias anywhere in the text.
  const std::string haystack = lower(text);
  std::optional<std::string> best;
  size_t best_pos = 0;
  auto consider = [&](const std::string& surface, const std::string& canon) {
    const std::string needle = lower(surface);
    if (needle.empty()) return;
    size_t from = 0, found;
    while ((found = haystack.find(needle, from)) != std::string::npos) {
      if (found + needle.size() >= best_pos) {
        best_pos = found + needle.size();
        best = canon;
      }
      from = found + 1;
    }
  };
  for (const auto& label : task.labels) consider(label, label);
  for (const auto& [surface, canon] : task.aliases) consider(surface, canon);
  return best ? *best : std::string(kAbstain);
}

StructuredResponse parse_completion(
    const std::string& text, const TaskSpec& task,
    const std::vector<std::pair<std::string, std::string>>& options) {
  const Sections sections = split_sections(text);
  StructuredResponse out;
  if (sections.keywords) out.keywords = extract_keywords(*sections.keywords);
  if (sections.scenario) out.scenario = parse_scenario(*sections.scenario);
  if (sections.reasoning) out.reasoning = trim(*sections.reasoning);
  // Answer extraction prefers the reasoning block, then the whole text.
  out.answer = sections.reasoning
                   ? extract_answer(*sections.reasoning, task, options)
                   : std::string(kAbstain);
  if (out.answer == kAbstain) out.answer = extract_answer(text, task, options);
  return out;
}

CorpusStatistics corpus_statistics(
    const std::vector<StructuredResponse>& responses) {
  CorpusStatistics stats;
  long keyword_sum = 0, keyword_n = 0;
  long turn_sum = 0, turn_n = 0;
  long abstains = 0;
  for (const auto& r : responses) {
    if (r.keywords.empty()) {
      ++stats.responses_without_keywords;
    } else {
      keyword_sum += static_cast<long>(r.keywords.size());
      ++keyword_n;
    }
    if (r.scenario.empty()) {
      ++stats.responses_without_scenario;
    } else {
      turn_sum += count_dialogue_turns(r.scenario);
      ++turn_n;
    }
    if (r.answer == kAbstain) ++abstains;
  }
  if (keyword_n > 0)
    stats.mean_keyword_count = static_cast<double>(keyword_sum) / keyword_n;
  if (turn_n > 0)
    stats.mean_turn_count = static_cast<double>(turn_sum) / turn_n;
  stats.abstain_rate =
      responses.empty() ? 0.0 : static_cast<double>(abstains) / responses.size();
  return stats;
}

}  // namespace ric
