/*
 * Copyright 2026 The reljudge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "reljudge/http_backend.h"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <gtest/gtest.h>

#include "httplib.h"
#include "reljudge/util.h"
#include "test_util.h"

namespace reljudge {
namespace {

using namespace std::chrono_literals;

// OpenAI-shaped test server. Each path prefix selects a behavior.
class FakeServer {
 public:
  FakeServer() {
    const std::string with_lp = ReadFile(testing::DataPath("fixtures/chat_logprobs.json"));
    const std::string no_lp = ReadFile(testing::DataPath("fixtures/chat_no_logprobs.json"));
    const std::string malformed = ReadFile(testing::DataPath("fixtures/chat_malformed.json"));

    auto json_reply = [](const std::string& body) {
      return [body](const httplib::Request&, httplib::Response& res) {
        res.set_content(body, "application/json");
      };
    };
    server_.Post("/logprobs/v1/chat/completions", json_reply(with_lp));
    server_.Post("/nologprobs/v1/chat/completions", json_reply(no_lp));
    server_.Post("/malformed/v1/chat/completions", json_reply(malformed));
    server_.Post("/ratelimit/v1/chat/completions",
                 [this](const httplib::Request&, httplib::Response& res) {
                   ++hits_;
                   res.status = 429;
                   res.set_content("{\"error\":\"slow down\"}", "application/json");
                 });
    server_.Post("/badrequest/v1/chat/completions",
                 [this](const httplib::Request&, httplib::Response& res) {
                   ++hits_;
                   res.status = 400;
                 });
    server_.Post("/flaky/v1/chat/completions",
                 [this, no_lp](const httplib::Request&, httplib::Response& res) {
                   if (++hits_ <= 2) {
                     res.status = 503;
                     return;
                   }
                   res.set_content(no_lp, "application/json");
                 });
    server_.Post("/echo/v1/chat/completions",
                 [this, no_lp](const httplib::Request& req, httplib::Response& res) {
                   std::lock_guard lock(mu_);
                   last_body_ = req.body;
                   last_auth_ = req.get_header_value("Authorization");
                   res.set_content(no_lp, "application/json");
                 });
    server_.Post("/slow/v1/chat/completions",
                 [this, no_lp](const httplib::Request&, httplib::Response& res) {
                   const int now = ++active_;
                   int prev = peak_.load();
                   while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
                   }
                   std::this_thread::sleep_for(60ms);
                   --active_;
                   res.set_content(no_lp, "application/json");
                 });
    server_.Post("/hang/v1/chat/completions",
                 [](const httplib::Request&, httplib::Response& res) {
                   std::this_thread::sleep_for(1500ms);
                   res.status = 200;
                 });
    server_.new_task_queue = [] { return new httplib::ThreadPool(16); };
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string Url(const std::string& prefix) const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/" + prefix;
  }
  int hits() const { return hits_; }
  int peak() const { return peak_; }
  std::string last_body() {
    std::lock_guard lock(mu_);
    return last_body_;
  }
  std::string last_auth() {
    std::lock_guard lock(mu_);
    return last_auth_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::atomic<int> active_{0};
  std::atomic<int> peak_{0};
  std::mutex mu_;
  std::string last_body_;
  std::string last_auth_;
};

HttpBackendConfig Config(const FakeServer& s, const std::string& prefix) {
  HttpBackendConfig c;
  c.base_url = s.Url(prefix);
  c.api_key_env = "RELJUDGE_TEST_API_KEY";
  c.timeout = 5000ms;
  return c;
}

std::vector<Message> Chat() {
  return {{Role::kSystem, "You judge relevance."}, {Role::kUser, "[query]: ski"}};
}

struct RecordingSleeper {
  std::shared_ptr<std::vector<std::chrono::milliseconds>> delays =
      std::make_shared<std::vector<std::chrono::milliseconds>>();
  HttpBackend::Sleeper fn() {
    auto d = delays;
    return [d](std::chrono::milliseconds ms) { d->push_back(ms); };
  }
};

TEST(HttpBackend, ParsesLogprobs) {
  FakeServer server;
  HttpBackend backend(Config(server, "logprobs"));
  auto r = backend.Complete(Chat(), {});
  EXPECT_EQ(r.text, "<think>ski</think><intent>find ski resorts</intent>");
  ASSERT_TRUE(r.token_logprobs.has_value());
  EXPECT_EQ(r.token_count, 6u);
  EXPECT_EQ(r.token_logprobs->size(), 6u);
  EXPECT_EQ((*r.token_logprobs)[1].token, "ski");
  EXPECT_DOUBLE_EQ((*r.token_logprobs)[1].logprob, -0.73);
  for (const auto& t : *r.token_logprobs) EXPECT_LE(t.logprob, 0.0);
}

TEST(HttpBackend, MissingLogprobsUsesUsageCount) {
  FakeServer server;
  HttpBackend backend(Config(server, "nologprobs"));
  auto r = backend.Complete(Chat(), {});
  EXPECT_FALSE(r.token_logprobs.has_value());
  EXPECT_EQ(r.token_count, 17u);
  EXPECT_FALSE(r.text.empty());
}

TEST(HttpBackend, MalformedBodyIsNotRetried) {
  FakeServer server;
  RecordingSleeper sleeper;
  HttpBackend backend(Config(server, "malformed"), sleeper.fn());
  try {
    backend.Complete(Chat(), {});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kMalformedBody);
    EXPECT_FALSE(e.retriable());
  }
  EXPECT_EQ(backend.attempts_made(), 1);
  EXPECT_TRUE(sleeper.delays->empty());
}

TEST(HttpBackend, RateLimitRetriesThenFails) {
  FakeServer server;
  RecordingSleeper sleeper;
  HttpBackend backend(Config(server, "ratelimit"), sleeper.fn());
  try {
    backend.Complete(Chat(), {});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kRateLimited);
    EXPECT_EQ(e.status(), 429);
    EXPECT_TRUE(e.retriable());
  }
  EXPECT_EQ(server.hits(), 5);
  ASSERT_EQ(sleeper.delays->size(), 4u);
  // Exponential with +-20% jitter around 500, 1000, 2000, 4000 ms.
  for (std::size_t i = 0; i < 4; ++i) {
    const double base = 500.0 * (1 << i);
    EXPECT_GE((*sleeper.delays)[i].count(), base * 0.8 - 1);
    EXPECT_LE((*sleeper.delays)[i].count(), base * 1.2 + 1);
  }
}

TEST(HttpBackend, ClientErrorIsNotRetried) {
  FakeServer server;
  RecordingSleeper sleeper;
  HttpBackend backend(Config(server, "badrequest"), sleeper.fn());
  try {
    backend.Complete(Chat(), {});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kClientError);
    EXPECT_EQ(e.status(), 400);
  }
  EXPECT_EQ(server.hits(), 1);
}

TEST(HttpBackend, ServerErrorRecovers) {
  FakeServer server;
  RecordingSleeper sleeper;
  HttpBackend backend(Config(server, "flaky"), sleeper.fn());
  auto r = backend.Complete(Chat(), {});
  EXPECT_EQ(r.token_count, 17u);
  EXPECT_EQ(server.hits(), 3);
  EXPECT_EQ(sleeper.delays->size(), 2u);
}

TEST(HttpBackend, TransportErrorWhenNothingListens) {
  HttpBackendConfig c;
  c.base_url = "http://127.0.0.1:1";
  c.retry.max_attempts = 2;
  RecordingSleeper sleeper;
  HttpBackend backend(c, sleeper.fn());
  try {
    backend.Complete(Chat(), {});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kTransport);
  }
  EXPECT_EQ(backend.attempts_made(), 2);
}

TEST(HttpBackend, ReadTimeout) {
  FakeServer server;
  HttpBackendConfig c = Config(server, "hang");
  c.timeout = 200ms;
  c.retry.max_attempts = 1;
  HttpBackend backend(c);
  try {
    backend.Complete(Chat(), {});
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kTimeout);
  }
}

TEST(HttpBackend, RequestShapeAndAuth) {
  FakeServer server;
  ::setenv("RELJUDGE_TEST_API_KEY", "sk-test", 1);
  HttpBackendConfig c = Config(server, "echo");
  c.model = "judge-7b";
  HttpBackend backend(c);
  SamplingConfig s;
  s.temperature = 0.7;
  s.seed = 99;
  s.max_tokens = 256;
  backend.Complete(Chat(), s);
  EXPECT_EQ(server.last_auth(), "Bearer sk-test");
  auto body = nlohmann::json::parse(server.last_body());
  EXPECT_EQ(body["model"], "judge-7b");
  EXPECT_EQ(body["messages"].size(), 2u);
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][1]["content"], "[query]: ski");
  EXPECT_DOUBLE_EQ(body["temperature"].get<double>(), 0.7);
  EXPECT_EQ(body["max_tokens"], 256);
  EXPECT_EQ(body["logprobs"], true);
  EXPECT_EQ(body["seed"], 99u);

  ::unsetenv("RELJUDGE_TEST_API_KEY");
  backend.Complete(Chat(), s);
  EXPECT_EQ(server.last_auth(), "");
}

TEST(HttpBackend, InFlightBudget) {
  FakeServer server;
  HttpBackendConfig c = Config(server, "slow");
  c.max_in_flight = 3;
  HttpBackend backend(c);
  std::vector<std::thread> threads;
  for (int i = 0; i < 12; ++i) {
    threads.emplace_back([&] { backend.Complete(Chat(), {}); });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(backend.peak_in_flight(), 3);
  EXPECT_LE(server.peak(), 3);
  EXPECT_GE(server.peak(), 2);
}

TEST(HttpBackend, ConfigValidation) {
  HttpBackendConfig c;
  c.max_in_flight = 0;
  EXPECT_THROW(c.Validate(), InputError);
  c = {};
  c.retry.max_attempts = 0;
  EXPECT_THROW(c.Validate(), InputError);
  EXPECT_THROW(HttpBackend::ParseResponseBody("{\"choices\":[{\"message\":{\"content\":\"x\"},"
                                              "\"logprobs\":{\"content\":[{\"token\":\"x\",\"logprob\":0.5}]}}]}"),
               BackendError);
}

}  // namespace
}  // namespace reljudge
