#include "debugrepair/llm.hpp"

#include "debugrepair/errors.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace debugrepair {

using nlohmann::json;

Money cost_of(const TokenUsage &usage, const ModelSpec &model) {
  return token_cost(usage.input_tokens, model.input_price, usage.output_tokens, model.output_price);
}

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

TokenUsage estimate_usage(const std::vector<ChatMessage> &messages, std::string_view completion) {
  TokenUsage usage;
  for (const auto &m : messages)
    usage.input_tokens += estimate_tokens(m.content) + 4;
  usage.output_tokens = estimate_tokens(completion);
  return usage;
}

MockLlm::MockLlm(std::vector<std::string> script, bool cycle)
    : script_(std::move(script)), cycle_(cycle) {}

ChatExchange MockLlm::chat(const std::vector<ChatMessage> &messages, const ModelSpec &model,
                           const ChatLimits &) {
  std::lock_guard lock(mutex_);
  requests_.push_back(messages);
  if (script_.empty() || (!cycle_ && next_ >= script_.size()))
    throw LlmUnavailable("mock script exhausted after " + std::to_string(next_) + " completions");
  const std::string &completion = script_[next_ % script_.size()];
  ++next_;
  ChatExchange ex;
  ex.messages = messages;
  ex.completion = completion;
  ex.usage = estimate_usage(messages, completion);
  ex.usage_estimated = true;
  ex.model_name = model.model_name;
  return ex;
}

std::size_t MockLlm::calls() const {
  std::lock_guard lock(mutex_);
  return next_;
}

std::vector<std::vector<ChatMessage>> MockLlm::requests() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

RateLimiter::RateLimiter(double requests_per_second, double burst)
    : rate_(requests_per_second), burst_(std::max(1.0, burst)), tokens_(burst_),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::unique_lock lock(mutex_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

HttpResponse httplib_transport(const HttpRequest &request) {
  const auto scheme_end = request.url.find("://");
  if (scheme_end == std::string::npos)
    return {0, "", "malformed URL " + request.url};
  const auto path_begin = request.url.find('/', scheme_end + 3);
  const std::string origin = request.url.substr(0, path_begin);
  const std::string path = path_begin == std::string::npos ? "/" : request.url.substr(path_begin);

  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout).count();
  client.set_connection_timeout(std::max<long>(1, std::min<long>(secs, 30)), 0);
  client.set_read_timeout(std::max<long>(1, secs), 0);
  client.set_write_timeout(std::max<long>(1, secs), 0);

  httplib::Headers headers;
  for (const auto &[k, v] : request.headers)
    if (k != "Content-Type")
      headers.emplace(k, v);
  auto res = client.Post(path, headers, request.body, "application/json");
  if (!res)
    return {0, "", httplib::to_string(res.error())};
  return {res->status, res->body, ""};
}

HttpLlmClient::HttpLlmClient(Transport transport, Sleeper sleeper, RateLimiter *limiter)
    : transport_(transport ? std::move(transport) : Transport(httplib_transport)),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      limiter_(limiter) {}

namespace {

bool looks_like_overflow(int status, const std::string &body) {
  if (status != 400 && status != 413)
    return false;
  std::string lower = body;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.find("context_length_exceeded") != std::string::npos ||
         lower.find("context length") != std::string::npos ||
         lower.find("context window") != std::string::npos ||
         lower.find("too many tokens") != std::string::npos;
}

std::string excerpt(const std::string &s, std::size_t n = 300) {
  return s.size() > n ? s.substr(0, n) + "..." : s;
}

} // namespace

ChatExchange HttpLlmClient::chat(const std::vector<ChatMessage> &messages, const ModelSpec &model,
                                 const ChatLimits &limits) {
  std::string base = model.endpoint;
  if (base.empty())
    if (const char *env = std::getenv("LLM_BASE_URL"))
      base = env;
  if (base.empty())
    throw LlmUnavailable("no endpoint configured for model '" + model.model_name +
                         "'; set LLM_BASE_URL");
  while (!base.empty() && base.back() == '/')
    base.pop_back();

  HttpRequest request;
  request.url = base + "/chat/completions";
  request.timeout = limits.timeout;
  request.headers["Content-Type"] = "application/json";
  if (const char *key = std::getenv(model.api_key_env.c_str()); key && *key)
    request.headers["Authorization"] = std::string("Bearer ") + key;

  json msgs = json::array();
  for (const auto &m : messages)
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  request.body = json{{"model", model.model_name},
                      {"messages", std::move(msgs)},
                      {"temperature", limits.temperature},
                      {"max_tokens", limits.max_output_tokens}}
                     .dump();

  std::string last_error;
  for (int attempt = 0;; ++attempt) {
    if (limiter_)
      limiter_->acquire();
    const auto started = std::chrono::steady_clock::now();
    const HttpResponse response = transport_(request);
    const double latency =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    if (response.status == 200) {
      try {
        const auto doc = json::parse(response.body);
        const auto &content = doc.at("choices").at(0).at("message").at("content");
        ChatExchange ex;
        ex.messages = messages;
        ex.completion = content.is_string() ? content.get<std::string>() : std::string();
        ex.latency_seconds = latency;
        ex.model_name = model.model_name;
        ex.retries = attempt;
        if (doc.contains("usage") && doc["usage"].is_object() &&
            doc["usage"].contains("prompt_tokens")) {
          ex.usage.input_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
          ex.usage.output_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
        } else {
          ex.usage = estimate_usage(messages, ex.completion);
          ex.usage_estimated = true;
        }
        return ex;
      } catch (const json::exception &e) {
        last_error = std::string("unreadable completion payload: ") + e.what();
      }
    } else if (looks_like_overflow(response.status, response.body)) {
      throw ContextOverflow("prompt exceeds the context window of '" + model.model_name +
                            "': " + excerpt(response.body));
    } else if (response.status == 0) {
      last_error = "transport error: " + response.error;
    } else if (response.status == 408 || response.status == 429 || response.status >= 500) {
      last_error = "HTTP " + std::to_string(response.status) + ": " + excerpt(response.body);
    } else {
      throw LlmUnavailable("HTTP " + std::to_string(response.status) + ": " +
                           excerpt(response.body));
    }

    if (attempt >= limits.max_retries)
      throw LlmUnavailable("giving up after " + std::to_string(attempt + 1) +
                           " attempts; last error: " + last_error);
    auto delay = limits.initial_backoff * (1LL << std::min(attempt, 20));
    sleeper_(std::min<std::chrono::milliseconds>(delay, limits.max_backoff));
  }
}

bool drop_oldest_exchange(std::vector<ChatMessage> &messages, std::size_t keep_prefix) {
  if (messages.size() < keep_prefix + 2)
    return false;
  const auto first = messages.begin() + static_cast<std::ptrdiff_t>(keep_prefix);
  messages.erase(first, first + 2);
  return true;
}

ChatExchange chat_fitting(LlmClient &client, std::vector<ChatMessage> messages,
                          const ModelSpec &model, const ChatLimits &limits,
                          std::size_t keep_prefix) {
  while (true) {
    try {
      return client.chat(messages, model, limits);
    } catch (const ContextOverflow &) {
      // Only whole assistant/user pairs are dropped; the last message
      // (the pending question) always stays.
      if (messages.size() < keep_prefix + 3 || !drop_oldest_exchange(messages, keep_prefix))
        throw;
    }
  }
}

} // namespace debugrepair
