#include "ric/backend.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <httplib.h>

namespace ric {

namespace fs = std::filesystem;

void to_json(json& j, const RawCompletion& c) {
  j = json{{"text", c.text}, {"model_name", c.model_name}, {"cached", c.cached}};
  j["prompt_tokens"] = c.prompt_tokens ? json(*c.prompt_tokens) : json(nullptr);
  j["completion_tokens"] =
      c.completion_tokens ? json(*c.completion_tokens) : json(nullptr);
}

void from_json(const json& j, RawCompletion& c) {
  j.at("text").get_to(c.text);
  j.at("model_name").get_to(c.model_name);
  if (j.contains("cached")) j.at("cached").get_to(c.cached);
  c.prompt_tokens.reset();
  c.completion_tokens.reset();
  if (j.contains("prompt_tokens") && !j.at("prompt_tokens").is_null())
    c.prompt_tokens = j.at("prompt_tokens").get<long>();
  if (j.contains("completion_tokens") && !j.at("completion_tokens").is_null())
    c.completion_tokens = j.at("completion_tokens").get<long>();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(),
                  nullptr))
    throw std::runtime_error("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

std::string cache_key(const PromptBundle& bundle, const ModelConfig& cfg) {
  // Canonical JSON rendering keeps the digest stable across rebuilds.
  json key = json{{"model", cfg.model_name},
                  {"temperature", cfg.temperature},
                  {"max_tokens", cfg.max_tokens},
                  {"messages", bundle.messages}};
  return sha256_hex(key.dump());
}

MockBackend::MockBackend(std::vector<MockRule> rules)
    : rules_(std::move(rules)) {
  if (rules_.empty())
    throw std::invalid_argument("mock backend requires at least one rule");
  if (!rules_.back().contains.empty())
    throw std::invalid_argument(
        "mock backend requires a final catch-all rule (empty matcher)");
}

std::unique_ptr<MockBackend> MockBackend::from_script(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mock script: " + path);
  json doc = json::parse(in);
  std::vector<MockRule> rules;
  for (const auto& entry : doc) {
    MockRule rule;
    if (entry.contains("contains"))
      entry.at("contains").get_to(rule.contains);
    entry.at("response").get_to(rule.response);
    rules.push_back(std::move(rule));
  }
  return std::make_unique<MockBackend>(std::move(rules));
}

RawCompletion MockBackend::complete(const PromptBundle& bundle,
                                    const ModelConfig& cfg) {
  invocations_.fetch_add(1);
  std::string prompt;
  for (const auto& msg : bundle.messages) prompt += msg.content + "\n";
  for (const auto& rule : rules_) {
    if (rule.contains.empty() ||
        prompt.find(rule.contains) != std::string::npos) {
      RawCompletion out;
      out.text = rule.response;
      out.model_name = cfg.model_name.empty() ? "mock" : cfg.model_name;
      out.completion_tokens = heuristic_token_count(rule.response);
      out.prompt_tokens = heuristic_token_count(prompt);
      return out;
    }
  }
  throw std::logic_error("mock backend fell through its catch-all");
}

std::unique_ptr<MockBackend> mock_program(std::vector<MockRule> rules) {
  return std::make_unique<MockBackend>(std::move(rules));
}

HttpBackend::HttpBackend(RetryPolicy retry) : retry_(retry) {}

json HttpBackend::request_body(const PromptBundle& bundle,
                               const ModelConfig& cfg) {
  return json{{"model", cfg.model_name},
              {"messages", bundle.messages},
              {"temperature", cfg.temperature},
              {"max_tokens", cfg.max_tokens}};
}

RawCompletion HttpBackend::complete(const PromptBundle& bundle,
                                    const ModelConfig& cfg) {
  std::string api_key;
  if (!cfg.api_key_env.empty()) {
    const char* value = std::getenv(cfg.api_key_env.c_str());
    if (!value)
      throw std::runtime_error("API key environment variable not set: " +
                               cfg.api_key_env);
    api_key = value;
  }

  httplib::Client client(cfg.endpoint);
  client.set_connection_timeout(30);
  client.set_read_timeout(120);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

  const std::string body = request_body(bundle, cfg).dump();
  std::string last_error;
  int backoff_ms = retry_.initial_backoff_ms;
  for (int attempt = 1; attempt <= retry_.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
      backoff_ms *= 2;
    }
    auto res = client.Post("/chat/completions", headers, body,
                           "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
      // 4xx other than 429 will not improve on retry.
      if (res->status >= 400 && res->status < 500 && res->status != 429)
        throw std::runtime_error(last_error);
      continue;
    }
    json doc;
    try {
      doc = json::parse(res->body);
      RawCompletion out;
      out.text = doc.at("choices").at(0).at("message").at("content")
                     .get<std::string>();
      out.model_name =
          doc.contains("model") ? doc["model"].get<std::string>() : cfg.model_name;
      if (doc.contains("usage")) {
        const auto& usage = doc["usage"];
        if (usage.contains("prompt_tokens"))
          out.prompt_tokens = usage["prompt_tokens"].get<long>();
        if (usage.contains("completion_tokens"))
          out.completion_tokens = usage["completion_tokens"].get<long>();
      }
      return out;
    } catch (const json::exception& e) {
      throw std::runtime_error(std::string("malformed response body: ") +
                               e.what() + "\n" + res->body);
    }
  }
  throw std::runtime_error("backend request failed after " +
                           std::to_string(retry_.max_attempts) +
                           " attempts; last error: " + last_error);
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
}

std::optional<RawCompletion> ResponseCache::get(
    const std::string& digest) const {
  std::ifstream in(dir_ / (digest + ".json"));
  if (!in) return std::nullopt;
  try {
    return json::parse(in).get<RawCompletion>();
  } catch (const json::exception&) {
    return std::nullopt;  // corrupt entry behaves as a miss
  }
}

void ResponseCache::put(const std::string& digest,
                        const RawCompletion& completion) {
  std::lock_guard<std::mutex> lock(write_mutex_);
  const fs::path final_path = dir_ / (digest + ".json");
  const fs::path tmp_path = dir_ / (digest + ".tmp");
  {
    std::ofstream out(tmp_path);
    out << json(completion).dump(2) << "\n";
  }
  fs::rename(tmp_path, final_path);
}

CachingClient::CachingClient(std::shared_ptr<ChatBackend> inner,
                             std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

RawCompletion CachingClient::complete(const PromptBundle& bundle,
                                      const ModelConfig& cfg) {
  const std::string digest = cache_key(bundle, cfg);
  if (auto hit = cache_->get(digest)) {
    hit->cached = true;
    return *hit;
  }
  if (!inner_)
    throw std::runtime_error("replay mode: cache miss for digest " + digest);
  backend_calls_.fetch_add(1);
  RawCompletion fresh = inner_->complete(bundle, cfg);
  fresh.cached = false;
  cache_->put(digest, fresh);
  return fresh;
}

long heuristic_token_count(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  long count = 0;
  while (in >> word) ++count;
  return count;
}

UsageTotals usage_totals(const std::vector<RawCompletion>& completions) {
  UsageTotals totals;
  long completion_sum = 0;
  for (const auto& c : completions) {
    if (c.prompt_tokens) totals.total_prompt_tokens += *c.prompt_tokens;
    long tokens;
    if (c.completion_tokens) {
      tokens = *c.completion_tokens;
    } else {
      tokens = heuristic_token_count(c.text);
      ++totals.approximate_records;
    }
    completion_sum += tokens;
  }
  totals.total_completion_tokens = completion_sum;
  totals.mean_completion_tokens =
      completions.empty()
          ? 0.0
          : static_cast<double>(completion_sum) / completions.size();
  return totals;
}

}  // namespace ric
