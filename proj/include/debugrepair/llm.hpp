#pragma once

#include "debugrepair/money.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace debugrepair {

struct ChatMessage {
  std::string role; // system | user | assistant
  std::string content;
  friend bool operator==(const ChatMessage &, const ChatMessage &) = default;
};

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  TokenUsage &operator+=(const TokenUsage &o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  friend bool operator==(const TokenUsage &, const TokenUsage &) = default;
};

struct ModelSpec {
  std::string model_name;
  Money input_price;  // per token
  Money output_price; // per token
  std::string endpoint; // base URL; empty -> LLM_BASE_URL
  std::string api_key_env = "LLM_API_KEY";
};

Money cost_of(const TokenUsage &usage, const ModelSpec &model);

struct ChatLimits {
  std::chrono::milliseconds timeout{120'000};
  int max_retries = 4;
  std::chrono::milliseconds initial_backoff{1'000};
  std::chrono::milliseconds max_backoff{30'000};
  double temperature = 0.0;
  int max_output_tokens = 4096;
};

struct ChatExchange {
  std::vector<ChatMessage> messages;
  std::string completion;
  TokenUsage usage;
  double latency_seconds = 0.0;
  std::string model_name;
  int retries = 0;
  bool usage_estimated = false;
};

// Fallback when a provider reports no usage: ceil(bytes / 4) per text plus
// 4 tokens of framing per message.
std::int64_t estimate_tokens(std::string_view text);
TokenUsage estimate_usage(const std::vector<ChatMessage> &messages, std::string_view completion);

class LlmClient {
public:
  virtual ~LlmClient() = default;
  // Throws LlmUnavailable once retries are exhausted and ContextOverflow
  // when the prompt does not fit the model.
  virtual ChatExchange chat(const std::vector<ChatMessage> &messages, const ModelSpec &model,
                            const ChatLimits &limits) = 0;
};

// Replays scripted completions in order. With `cycle`, the script repeats;
// otherwise running out throws LlmUnavailable. Usage is estimated.
class MockLlm final : public LlmClient {
public:
  explicit MockLlm(std::vector<std::string> script, bool cycle = false);

  ChatExchange chat(const std::vector<ChatMessage> &messages, const ModelSpec &model,
                    const ChatLimits &limits) override;

  std::size_t calls() const;
  std::vector<std::vector<ChatMessage>> requests() const;

private:
  std::vector<std::string> script_;
  bool cycle_;
  mutable std::mutex mutex_;
  std::size_t next_ = 0;
  std::vector<std::vector<ChatMessage>> requests_;
};

// Token bucket shared by concurrent callers.
class RateLimiter {
public:
  RateLimiter(double requests_per_second, double burst);
  void acquire();

private:
  std::mutex mutex_;
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

struct HttpRequest {
  std::string url; // full URL of the completions endpoint
  std::map<std::string, std::string> headers;
  std::string body;
  std::chrono::milliseconds timeout{0};
};

struct HttpResponse {
  int status = 0; // 0: transport failure
  std::string body;
  std::string error;
};

// OpenAI-compatible chat-completions client.
class HttpLlmClient final : public LlmClient {
public:
  using Transport = std::function<HttpResponse(const HttpRequest &)>;
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  // Empty transport: cpp-httplib. Empty sleeper: std::this_thread::sleep_for.
  explicit HttpLlmClient(Transport transport = {}, Sleeper sleeper = {},
                         RateLimiter *limiter = nullptr);

  ChatExchange chat(const std::vector<ChatMessage> &messages, const ModelSpec &model,
                    const ChatLimits &limits) override;

private:
  Transport transport_;
  Sleeper sleeper_;
  RateLimiter *limiter_;
};

HttpResponse httplib_transport(const HttpRequest &request);

// Drops the oldest assistant/user pair after the first `keep_prefix`
// messages (system + task). Returns false when nothing can be dropped.
bool drop_oldest_exchange(std::vector<ChatMessage> &messages, std::size_t keep_prefix = 2);

// chat() that shrinks the conversation on ContextOverflow until it fits.
ChatExchange chat_fitting(LlmClient &client, std::vector<ChatMessage> messages,
                          const ModelSpec &model, const ChatLimits &limits,
                          std::size_t keep_prefix = 2);

} // namespace debugrepair
