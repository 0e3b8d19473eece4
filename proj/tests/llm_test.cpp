#include "debugrepair/errors.hpp"
#include "debugrepair/llm.hpp"

#include <httplib.h>
#include <json.hpp>

#include <gtest/gtest.h>

#include <thread>

using namespace debugrepair;
using namespace std::chrono_literals;
using nlohmann::json;

namespace {

ModelSpec local_model(std::string endpoint = "http://llm.invalid/v1") {
  ModelSpec m{"test-model", Money::parse("2e-6"), Money::parse("6e-6")};
  m.endpoint = std::move(endpoint);
  m.api_key_env = "DEBUGREPAIR_TEST_KEY";
  return m;
}

std::string completion_body(const std::string &text, bool with_usage = true) {
  json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
  if (with_usage)
    j["usage"] = {{"prompt_tokens", 120}, {"completion_tokens", 30}};
  return j.dump();
}

struct Scripted {
  std::vector<HttpResponse> responses;
  std::vector<HttpRequest> requests;
  std::vector<std::chrono::milliseconds> sleeps;

  HttpLlmClient client() {
    return HttpLlmClient(
        [this](const HttpRequest &r) {
          requests.push_back(r);
          const auto i = std::min(requests.size() - 1, responses.size() - 1);
          return responses[i];
        },
        [this](std::chrono::milliseconds d) { sleeps.push_back(d); });
  }
};

const std::vector<ChatMessage> kMessages = {{"system", "be brief"}, {"user", "hello"}};

} // namespace

TEST(Mock, ReplaysInOrderAndIsDeterministic) {
  MockLlm a({"one", "two"});
  MockLlm b({"one", "two"});
  const auto x1 = a.chat(kMessages, local_model(), {});
  const auto y1 = b.chat(kMessages, local_model(), {});
  EXPECT_EQ(x1.completion, "one");
  EXPECT_EQ(x1.usage, y1.usage);
  EXPECT_TRUE(x1.usage_estimated);
  EXPECT_EQ(a.chat(kMessages, local_model(), {}).completion, "two");
  EXPECT_THROW(a.chat(kMessages, local_model(), {}), LlmUnavailable);
  EXPECT_EQ(a.requests().size(), 3u);
}

TEST(Mock, CyclesWhenAsked) {
  MockLlm m({"a", "b"}, true);
  std::string seen;
  for (int i = 0; i < 5; ++i)
    seen += m.chat(kMessages, local_model(), {}).completion;
  EXPECT_EQ(seen, "ababa");
}

TEST(Estimate, BytesOverFourPlusFraming) {
  EXPECT_EQ(estimate_tokens(""), 0);
  EXPECT_EQ(estimate_tokens("abcd"), 1);
  EXPECT_EQ(estimate_tokens("abcde"), 2);
  const auto u = estimate_usage(kMessages, "12345678");
  EXPECT_EQ(u.input_tokens, (2 + 4) + (2 + 4));
  EXPECT_EQ(u.output_tokens, 2);
}

TEST(Http, SendsOpenAiShapedRequest) {
  ::setenv("DEBUGREPAIR_TEST_KEY", "secret", 1);
  Scripted s;
  s.responses = {{200, completion_body("hi"), ""}};
  auto client = s.client();
  ChatLimits limits;
  limits.max_output_tokens = 77;
  const auto ex = client.chat(kMessages, local_model("http://llm.invalid/v1/"), limits);
  EXPECT_EQ(ex.completion, "hi");
  EXPECT_EQ(ex.usage, (TokenUsage{120, 30}));
  EXPECT_FALSE(ex.usage_estimated);
  ASSERT_EQ(s.requests.size(), 1u);
  EXPECT_EQ(s.requests[0].url, "http://llm.invalid/v1/chat/completions");
  EXPECT_EQ(s.requests[0].headers.at("Authorization"), "Bearer secret");
  const auto body = json::parse(s.requests[0].body);
  EXPECT_EQ(body.at("model"), "test-model");
  EXPECT_EQ(body.at("max_tokens"), 77);
  EXPECT_EQ(body.at("messages").size(), 2u);
  EXPECT_EQ(body.at("messages")[1].at("content"), "hello");
  ::unsetenv("DEBUGREPAIR_TEST_KEY");
}

TEST(Http, RetriesTransientFailuresWithBackoff) {
  Scripted s;
  s.responses = {{503, "busy", ""}, {0, "", "connection refused"}, {429, "slow down", ""},
                 {200, completion_body("ok"), ""}};
  auto client = s.client();
  ChatLimits limits;
  limits.initial_backoff = 100ms;
  limits.max_backoff = 250ms;
  const auto ex = client.chat(kMessages, local_model(), limits);
  EXPECT_EQ(ex.completion, "ok");
  EXPECT_EQ(ex.retries, 3);
  EXPECT_EQ(s.sleeps, (std::vector<std::chrono::milliseconds>{100ms, 200ms, 250ms}));
}

TEST(Http, ExhaustedRetriesAreUnavailable) {
  Scripted s;
  s.responses = {{500, "down", ""}};
  auto client = s.client();
  ChatLimits limits;
  limits.max_retries = 2;
  try {
    client.chat(kMessages, local_model(), limits);
    FAIL();
  } catch (const LlmUnavailable &e) {
    EXPECT_NE(std::string(e.what()).find("3 attempts"), std::string::npos);
  }
  EXPECT_EQ(s.requests.size(), 3u);
}

TEST(Http, ClientErrorsAreNotRetried) {
  Scripted s;
  s.responses = {{401, "bad key", ""}};
  auto client = s.client();
  EXPECT_THROW(client.chat(kMessages, local_model(), {}), LlmUnavailable);
  EXPECT_EQ(s.requests.size(), 1u);
}

TEST(Http, ContextOverflowIsDistinct) {
  Scripted s;
  s.responses = {{400, R"({"error":{"code":"context_length_exceeded"}})", ""}};
  auto client = s.client();
  EXPECT_THROW(client.chat(kMessages, local_model(), {}), ContextOverflow);
}

TEST(Http, MissingUsageIsEstimated) {
  Scripted s;
  s.responses = {{200, completion_body("abcdefgh", false), ""}};
  auto client = s.client();
  const auto ex = client.chat(kMessages, local_model(), {});
  EXPECT_TRUE(ex.usage_estimated);
  EXPECT_EQ(ex.usage, estimate_usage(kMessages, "abcdefgh"));
}

TEST(Http, MalformedPayloadIsRetried) {
  Scripted s;
  s.responses = {{200, "{not json", ""}, {200, completion_body("fine"), ""}};
  auto client = s.client();
  ChatLimits limits;
  limits.initial_backoff = 1ms;
  EXPECT_EQ(client.chat(kMessages, local_model(), limits).completion, "fine");
}

TEST(Http, NoEndpointIsUnavailable) {
  ::unsetenv("LLM_BASE_URL");
  Scripted s;
  s.responses = {{200, completion_body("x"), ""}};
  auto client = s.client();
  ModelSpec m = local_model("");
  EXPECT_THROW(client.chat(kMessages, m, {}), LlmUnavailable);
  EXPECT_TRUE(s.requests.empty());
}

TEST(Http, RealTransportAgainstLocalServer) {
  httplib::Server server;
  std::string seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request &req, httplib::Response &res) {
    seen_body = req.body;
    res.set_content(completion_body("from server"), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpLlmClient client;
  const auto ex =
      client.chat(kMessages, local_model("http://127.0.0.1:" + std::to_string(port) + "/v1"), {});
  server.stop();
  t.join();
  EXPECT_EQ(ex.completion, "from server");
  EXPECT_EQ(json::parse(seen_body).at("messages")[0].at("content"), "be brief");
}

namespace {

// Overflows until the conversation is at most `fits` messages long.
class SmallContext final : public LlmClient {
public:
  explicit SmallContext(std::size_t fits) : fits_(fits) {}
  std::vector<std::size_t> sizes;
  ChatExchange chat(const std::vector<ChatMessage> &messages, const ModelSpec &,
                    const ChatLimits &) override {
    sizes.push_back(messages.size());
    if (messages.size() > fits_)
      throw ContextOverflow("too long");
    ChatExchange ex;
    ex.messages = messages;
    ex.completion = "ok";
    return ex;
  }

private:
  std::size_t fits_;
};

} // namespace

TEST(Fitting, DropsOldestPairsKeepingPrefixAndQuestion) {
  std::vector<ChatMessage> msgs = {{"system", "s"}, {"user", "task"}, {"assistant", "a1"},
                                   {"user", "o1"},  {"assistant", "a2"}, {"user", "o2"},
                                   {"user", "question"}};
  SmallContext llm(5);
  const auto ex = chat_fitting(llm, msgs, local_model(), {});
  EXPECT_EQ(llm.sizes, (std::vector<std::size_t>{7, 5}));
  ASSERT_EQ(ex.messages.size(), 5u);
  EXPECT_EQ(ex.messages[2].content, "a2");
  EXPECT_EQ(ex.messages.back().content, "question");
}

TEST(Fitting, GivesUpWhenNothingCanBeDropped) {
  SmallContext llm(1);
  EXPECT_THROW(chat_fitting(llm, {{"system", "s"}, {"user", "task"}, {"user", "q"}},
                            local_model(), {}),
               ContextOverflow);
}

TEST(RateLimit, SpacesRequestsBeyondBurst) {
  RateLimiter limiter(20.0, 2.0);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 6; ++i)
    limiter.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  // Two free, four more at 50 ms each.
  EXPECT_GE(elapsed, 180ms);
  EXPECT_LT(elapsed, 2s);
}
