#include "ric/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ric {

namespace {

// BIG-bench label order follows first appearance in the file, so the JSON
// object order must be preserved while parsing.
using ojson = nlohmann::ordered_json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string file_stem(const std::string& path) {
  auto slash = path.find_last_of("/\\");
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

std::vector<std::string> split_tsv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == '\t') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell += c;
    }
  }
  cells.push_back(cell);
  return cells;
}

// Option letters a, b, c, ... aa, ab after 26.
std::string option_letter(size_t index) {
  std::string out;
  do {
    out.insert(out.begin(), static_cast<char>('a' + index % 26));
    index = index / 26;
  } while (index-- > 0);
  return out;
}

}  // namespace

LoadedTask load_bigbench_task(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open BIG-bench task file: " + path);
  ojson doc;
  try {
    doc = ojson::parse(in);
  } catch (const ojson::exception& e) {
    throw std::runtime_error("malformed BIG-bench JSON in " + path + ": " +
                             e.what());
  }
  if (!doc.contains("examples") || !doc["examples"].is_array() ||
      doc["examples"].empty())
    throw std::runtime_error("BIG-bench task has no examples: " + path);

  LoadedTask out;
  out.task.id = doc.contains("name") ? doc["name"].get<std::string>()
                                     : file_stem(path);
  out.task.description = doc.contains("task_prefix")
                             ? doc["task_prefix"].get<std::string>()
                             : (doc.contains("description")
                                    ? doc["description"].get<std::string>()
                                    : "");
  out.task.metric = MetricKind::accuracy;

  std::vector<std::string> label_order;  // first appearance
  bool per_example_labels = false;
  size_t index = 0;
  for (const auto& ex : doc["examples"]) {
    if (!ex.contains("input") || !ex.contains("target_scores"))
      throw std::runtime_error("example " + std::to_string(index) +
                               " lacks input or target_scores in " + path);
    std::string gold;
    double best = 0.0;
    bool tie = false, first = true;
    std::vector<std::string> keys;
    for (const auto& [key, value] : ex["target_scores"].items()) {
      keys.push_back(key);
      const double v = value.get<double>();
      if (first || v > best) {
        best = v;
        gold = key;
        tie = false;
        first = false;
      } else if (v == best) {
        tie = true;
      }
      if (std::find(label_order.begin(), label_order.end(), key) ==
          label_order.end())
        label_order.push_back(key);
    }
    if (tie)
      throw std::runtime_error("example " + std::to_string(index) +
                               " has tied maximum target scores in " + path);
    if (!out.instances.empty() && keys.size() != label_order.size())
      per_example_labels = true;

    QuestionInstance q;
    q.task_id = out.task.id;
    q.question = ex["input"].get<std::string>();
    q.gold = gold;
    out.instances.push_back(std::move(q));
    ++index;
  }
  out.task.labels = label_order;

  // When the candidate set varies per example the task is multiple choice:
  // attach lettered options and switch the answer format.
  per_example_labels =
      per_example_labels ||
      doc["examples"].front()["target_scores"].size() != label_order.size();
  if (per_example_labels) {
    out.task.answer_format = AnswerFormat::option_letter;
    size_t i = 0;
    for (const auto& ex : doc["examples"]) {
      size_t letter = 0;
      for (const auto& [key, value] : ex["target_scores"].items())
        out.instances[i].options.emplace_back(option_letter(letter++), key);
      ++i;
    }
  } else {
    const bool boolean_task =
        label_order.size() == 2 &&
        ((lower(label_order[0]) == "true" && lower(label_order[1]) == "false") ||
         (lower(label_order[0]) == "false" && lower(label_order[1]) == "true"));
    out.task.answer_format =
        boolean_task ? AnswerFormat::boolean : AnswerFormat::label_word;
  }
  out.task.validate();
  return out;
}

LoadedTask load_stance_tsv(const std::string& path, const std::string& target) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stance TSV: " + path);
  std::string header_line;
  if (!std::getline(in, header_line))
    throw std::runtime_error("empty stance TSV: " + path);
  const auto header = split_tsv_line(header_line);
  int target_col = -1, tweet_col = -1, stance_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower(header[i]);
    if (name == "target") target_col = static_cast<int>(i);
    else if (name == "tweet") tweet_col = static_cast<int>(i);
    else if (name == "stance") stance_col = static_cast<int>(i);
  }
  if (target_col < 0 || tweet_col < 0 || stance_col < 0)
    throw std::runtime_error(
        "stance TSV must have Target, Tweet and Stance columns: " + path);

  LoadedTask out;
  out.task.id = "semeval_" + lower(target);
  std::replace(out.task.id.begin(), out.task.id.end(), ' ', '_');
  out.task.description = "What is the attitude toward \"" + target +
                         "\" in the tweet?";
  out.task.labels = {"favor", "against"};
  out.task.aliases = {{"FAVOR", "favor"},
                      {"AGAINST", "against"},
                      {"favour", "favor"},
                      {"in favor", "favor"},
                      {"opposed", "against"}};
  out.task.answer_format = AnswerFormat::label_word;
  out.task.metric = MetricKind::macro_f1;
  out.task.f1_classes = {"favor", "against"};

  std::string line;
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_tsv_line(line);
    if (cells.size() <= static_cast<size_t>(std::max({target_col, tweet_col,
                                                      stance_col})))
      throw std::runtime_error("stance TSV row " + std::to_string(row) +
                               " has too few columns");
    if (cells[target_col] != target) {
      ++out.dropped_rows;
      continue;
    }
    const std::string stance = lower(cells[stance_col]);
    if (stance == "none") {
      ++out.dropped_rows;
      continue;
    }
    if (stance != "favor" && stance != "against")
      throw std::runtime_error("unknown stance value '" + cells[stance_col] +
                               "' at row " + std::to_string(row));
    QuestionInstance q;
    q.task_id = out.task.id;
    q.question = "What is the attitude toward \"" + target +
                 "\" in the tweet \"" + cells[tweet_col] + "\"?";
    q.gold = stance;
    out.instances.push_back(std::move(q));
  }
  out.task.validate();
  return out;
}

LoadedTask load_nli_pairs(const std::string& path, NliSchema schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open NLI file: " + path);
  std::string header_line;
  if (!std::getline(in, header_line))
    throw std::runtime_error("empty NLI file: " + path);
  const auto header = split_tsv_line(header_line);
  int premise_col = -1, hypothesis_col = -1, label_col = -1,
      explanation_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower(header[i]);
    if (name == "premise") premise_col = static_cast<int>(i);
    else if (name == "hypothesis") hypothesis_col = static_cast<int>(i);
    else if (name == "label") label_col = static_cast<int>(i);
    else if (name == "explanation") explanation_col = static_cast<int>(i);
  }
  if (premise_col < 0 || hypothesis_col < 0 || label_col < 0)
    throw std::runtime_error(
        "NLI file must have premise, hypothesis and label columns: " + path);
  if (schema == NliSchema::e_socnorm && explanation_col < 0)
    throw std::runtime_error(
        "e_socnorm schema requires an explanation column: " + path);

  LoadedTask out;
  switch (schema) {
    case NliSchema::socnorm: out.task.id = "socnorm"; break;
    case NliSchema::e_socnorm: out.task.id = "e_socnorm"; break;
    case NliSchema::cali: out.task.id = "cali"; break;
  }
  out.task.description =
      "Determine whether the premise entails, contradicts, or has no "
      "relation to the hypothesis.";
  out.task.labels = {"entailment", "contradiction", "neutral"};
  out.task.aliases = {{"entail", "entailment"},
                      {"entails", "entailment"},
                      {"contradict", "contradiction"},
                      {"contradicts", "contradiction"},
                      {"no relation", "neutral"},
                      {"no_relation", "neutral"},
                      {"has no relation", "neutral"}};
  out.task.answer_format = AnswerFormat::label_word;
  out.task.metric =
      schema == NliSchema::cali ? MetricKind::accuracy : MetricKind::macro_f1;

  std::string line;
  size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_tsv_line(line);
    int max_col = std::max({premise_col, hypothesis_col, label_col,
                            explanation_col});
    if (cells.size() <= static_cast<size_t>(max_col))
      throw std::runtime_error("NLI row " + std::to_string(row) +
                               " has too few columns");
    auto canon = canonicalize_label(cells[label_col], out.task);
    if (!canon)
      throw std::runtime_error("unknown NLI label '" + cells[label_col] +
                               "' at row " + std::to_string(row));
    QuestionInstance q;
    q.task_id = out.task.id;
    q.question = "Premise: " + cells[premise_col] + "\nHypothesis: " +
                 cells[hypothesis_col];
    if (schema == NliSchema::e_socnorm) {
      if (cells[explanation_col].empty())
        throw std::runtime_error("missing explanation at row " +
                                 std::to_string(row));
      q.question += "\nExplanation: " + cells[explanation_col];
    }
    q.gold = *canon;
    out.instances.push_back(std::move(q));
  }
  out.task.validate();
  return out;
}

std::vector<Demonstration> sample_demonstrations(
    const std::vector<QuestionInstance>& train, const TaskSpec& task, int d,
    long seed, SampleMode mode) {
  if (d < 1) throw std::invalid_argument("demo count must be >= 1");
  if (static_cast<size_t>(d) > train.size())
    throw std::invalid_argument("demo count exceeds training set size");

  std::mt19937_64 rng(static_cast<unsigned long long>(seed));
  std::vector<size_t> remaining(train.size());
  for (size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

  auto draw_from = [&](std::vector<size_t>& pool) {
    std::uniform_int_distribution<size_t> dist(0, pool.size() - 1);
    size_t pick = pool[dist(rng)];
    remaining.erase(std::find(remaining.begin(), remaining.end(), pick));
    return pick;
  };

  std::vector<size_t> chosen;
  if (mode == SampleMode::one_per_label) {
    const size_t covered = std::min<size_t>(d, task.labels.size());
    for (size_t li = 0; li < covered; ++li) {
      std::vector<size_t> pool;
      for (size_t i : remaining)
        if (train[i].gold == task.labels[li]) pool.push_back(i);
      if (pool.empty())
        throw std::invalid_argument("label '" + task.labels[li] +
                                    "' has no training examples");
      chosen.push_back(draw_from(pool));
    }
  }
  while (chosen.size() < static_cast<size_t>(d)) {
    std::vector<size_t> pool = remaining;
    chosen.push_back(draw_from(pool));
  }

  std::vector<Demonstration> out;
  out.reserve(chosen.size());
  for (size_t idx : chosen) out.push_back(Demonstration{train[idx], {}, {}});
  return out;
}

void write_instances_jsonl(const std::string& path,
                           const std::vector<QuestionInstance>& instances) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& q : instances) out << json(q).dump() << "\n";
}

std::vector<QuestionInstance> read_instances_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<QuestionInstance> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(json::parse(line).get<QuestionInstance>());
  }
  return out;
}

}  // namespace ric
