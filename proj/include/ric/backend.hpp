#pragma once

// Chat-completion backends: a live OpenAI-compatible HTTP client, a
// deterministic scripted mock, and a content-addressed on-disk cache
// wrapped around either. Also token-usage accounting.

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ric/core.hpp"

namespace ric {

struct RawCompletion {
  std::string text;
  std::optional<long> prompt_tokens;
  std::optional<long> completion_tokens;
  std::string model_name;
  bool cached = false;

  bool operator==(const RawCompletion&) const = default;
};

void to_json(json& j, const RawCompletion& c);
void from_json(const json& j, RawCompletion& c);

// SHA-256 hex digest over (model_name, temperature, max_tokens, full
// message sequence). Equal inputs give equal digests; any byte change in
// the messages changes the digest.
std::string cache_key(const PromptBundle& bundle, const ModelConfig& cfg);

// Hex SHA-256 of arbitrary bytes.
std::string sha256_hex(const std::string& bytes);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual RawCompletion complete(const PromptBundle& bundle,
                                 const ModelConfig& cfg) = 0;
};

// One scripted rule: the canned completion is returned when the prompt
// text contains `contains`; an empty matcher is a catch-all.
struct MockRule {
  std::string contains;
  std::string response;
};

// Deterministic scripted backend. First matching rule wins; construction
// requires a final catch-all rule. Never touches the network.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(std::vector<MockRule> rules);

  // Loads rules from a JSON array of {"contains"?, "response"} objects.
  static std::unique_ptr<MockBackend> from_script(const std::string& path);

  RawCompletion complete(const PromptBundle& bundle,
                         const ModelConfig& cfg) override;

  long invocation_count() const { return invocations_.load(); }

 private:
  std::vector<MockRule> rules_;
  std::atomic<long> invocations_{0};
};

std::unique_ptr<MockBackend> mock_program(std::vector<MockRule> rules);

struct RetryPolicy {
  int max_attempts = 3;
  int initial_backoff_ms = 250;  // doubles per attempt
};

// POSTs {endpoint}/chat/completions with the OpenAI chat schema and reads
// choices[0].message.content plus usage. API key comes from the
// environment variable named in the ModelConfig.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(RetryPolicy retry = {});

  RawCompletion complete(const PromptBundle& bundle,
                         const ModelConfig& cfg) override;

  static json request_body(const PromptBundle& bundle, const ModelConfig& cfg);

 private:
  RetryPolicy retry_;
};

// Content-addressed response cache: one file per digest under `dir`, body
// is the completion JSON. Writes are tmp+rename atomic.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<RawCompletion> get(const std::string& digest) const;
  void put(const std::string& digest, const RawCompletion& completion);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

// Cache-first wrapper: consults the cache before delegating; hits set
// cached = true and perform no backend call. A null inner backend gives
// replay mode, where a miss is an error.
class CachingClient : public ChatBackend {
 public:
  CachingClient(std::shared_ptr<ChatBackend> inner,
                std::shared_ptr<ResponseCache> cache);

  RawCompletion complete(const PromptBundle& bundle,
                         const ModelConfig& cfg) override;

  long backend_calls() const { return backend_calls_.load(); }

 private:
  std::shared_ptr<ChatBackend> inner_;
  std::shared_ptr<ResponseCache> cache_;
  std::atomic<long> backend_calls_{0};
};

struct UsageTotals {
  long total_prompt_tokens = 0;
  long total_completion_tokens = 0;
  double mean_completion_tokens = 0.0;
  long approximate_records = 0;  // records that fell back to the heuristic
};

// Whitespace-separated token count, the fallback when an endpoint reports
// no usage.
long heuristic_token_count(const std::string& text);

UsageTotals usage_totals(const std::vector<RawCompletion>& completions);

}  // namespace ric
