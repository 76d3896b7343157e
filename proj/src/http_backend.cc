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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>

#include "httplib.h"
#include "reljudge/util.h"

namespace reljudge {

void RetryPolicy::Validate() const {
  if (max_attempts < 1) throw InputError("retry.max_attempts must be >= 1");
  if (initial_backoff.count() < 0 || max_backoff.count() < 0) {
    throw InputError("retry backoff must be non-negative");
  }
  if (!(multiplier >= 1.0)) throw InputError("retry.multiplier must be >= 1");
  if (!(jitter >= 0.0 && jitter < 1.0)) {
    throw InputError("retry.jitter must be in [0, 1)");
  }
}

std::chrono::milliseconds RetryPolicy::BaseDelay(int retry) const {
  const double scaled = static_cast<double>(initial_backoff.count()) *
                        std::pow(multiplier, retry);
  const double capped =
      std::min(scaled, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(capped));
}

void HttpBackendConfig::Validate() const {
  if (base_url.rfind("http://", 0) != 0 && base_url.rfind("https://", 0) != 0) {
    throw InputError("backend.base_url must start with http:// or https://");
  }
  if (model.empty()) throw InputError("backend.model must be non-empty");
  if (timeout.count() <= 0) throw InputError("backend.timeout must be > 0");
  if (max_in_flight < 1) throw InputError("backend.max_in_flight must be >= 1");
  retry.Validate();
}

// Holds one unit of the in-flight budget for the lifetime of a request.
class HttpBackend::InFlightSlot {
 public:
  explicit InFlightSlot(HttpBackend& backend) : backend_(backend) {
    std::unique_lock lock(backend_.mu_);
    backend_.slot_free_.wait(lock, [&] {
      return backend_.in_flight_ < backend_.config_.max_in_flight;
    });
    ++backend_.in_flight_;
    ++backend_.attempts_;
    backend_.peak_in_flight_ =
        std::max(backend_.peak_in_flight_, backend_.in_flight_);
  }
  ~InFlightSlot() {
    {
      std::lock_guard lock(backend_.mu_);
      --backend_.in_flight_;
    }
    backend_.slot_free_.notify_one();
  }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  HttpBackend& backend_;
};

HttpBackend::HttpBackend(HttpBackendConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
  config_.Validate();
  if (!sleeper_) {
    sleeper_ = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
  const std::size_t scheme_end = config_.base_url.find("://") + 3;
  const std::size_t path_start = config_.base_url.find('/', scheme_end);
  if (path_start == std::string::npos) {
    scheme_host_port_ = config_.base_url;
  } else {
    scheme_host_port_ = config_.base_url.substr(0, path_start);
    path_prefix_ = config_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') {
      path_prefix_.pop_back();
    }
  }
}

int HttpBackend::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_in_flight_;
}

int HttpBackend::attempts_made() const {
  std::lock_guard lock(mu_);
  return attempts_;
}

std::string HttpBackend::BuildRequestBody(const HttpBackendConfig& config,
                                          std::span<const Message> messages,
                                          const SamplingConfig& sampling) {
  nlohmann::json body = {
      {"model", config.model},
      {"messages", ToJson(messages)},
      {"temperature", sampling.temperature},
      {"max_tokens", sampling.max_tokens},
      {"logprobs", config.request_logprobs},
      {"seed", sampling.seed},
  };
  return body.dump();
}

CompletionResult HttpBackend::ParseResponseBody(std::string_view body) {
  auto malformed = [](const std::string& why) {
    return BackendError(BackendErrorKind::kMalformedBody,
                        "malformed completion response: " + why);
  };
  nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw malformed("not a JSON object");
  if (!j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    throw malformed("missing choices[0]");
  }
  const auto& choice = j["choices"][0];
  if (!choice.contains("message") || !choice["message"].is_object() ||
      !choice["message"].contains("content") ||
      !choice["message"]["content"].is_string()) {
    throw malformed("missing choices[0].message.content");
  }

  CompletionResult result;
  result.text = choice["message"]["content"].get<std::string>();

  if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
      choice["logprobs"].contains("content") &&
      choice["logprobs"]["content"].is_array()) {
    std::vector<TokenLogprob> tokens;
    for (const auto& item : choice["logprobs"]["content"]) {
      if (!item.is_object() || !item.contains("logprob") ||
          !item["logprob"].is_number()) {
        throw malformed("logprobs.content entry without numeric logprob");
      }
      double lp = item["logprob"].get<double>();
      if (!std::isfinite(lp) || lp > 1e-9) {
        throw malformed(fmt::format("invalid token logprob {}", lp));
      }
      tokens.push_back(TokenLogprob{item.value("token", std::string()),
                                    std::min(lp, 0.0)});
    }
    result.token_count = tokens.size();
    result.token_logprobs = std::move(tokens);
  } else if (j.contains("usage") && j["usage"].is_object() &&
             j["usage"].contains("completion_tokens") &&
             j["usage"]["completion_tokens"].is_number_integer()) {
    result.token_count = j["usage"]["completion_tokens"].get<std::size_t>();
  }
  return result;
}

CompletionResult HttpBackend::CompleteOnce(std::span<const Message> messages,
                                           const SamplingConfig& sampling) {
  if (messages.empty()) throw InputError("completion needs at least 1 message");
  sampling.Validate();
  const std::string body = BuildRequestBody(config_, messages, sampling);

  InFlightSlot slot(*this);
  httplib::Client client(scheme_host_port_);
  const auto secs =
      std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (!config_.api_key_env.empty()) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(path_prefix_ + "/v1/chat/completions", headers, body,
                         "application/json");
  if (!res) {
    const auto elapsed = std::chrono::steady_clock::now() - start;
    const auto err = res.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           (err == httplib::Error::Read &&
                            elapsed >= config_.timeout);
    throw BackendError(
        timed_out ? BackendErrorKind::kTimeout : BackendErrorKind::kTransport,
        fmt::format("request to {} failed: {}", scheme_host_port_,
                    httplib::to_string(err)));
  }
  const int status = res->status;
  if (status == 429) {
    throw BackendError(BackendErrorKind::kRateLimited, "HTTP 429 rate limited",
                       status);
  }
  if (status == 408) {
    throw BackendError(BackendErrorKind::kTimeout, "HTTP 408 request timeout",
                       status);
  }
  if (status >= 500) {
    throw BackendError(BackendErrorKind::kServerError,
                       fmt::format("HTTP {} from server", status), status);
  }
  if (status < 200 || status >= 300) {
    throw BackendError(BackendErrorKind::kClientError,
                       fmt::format("HTTP {}: {}", status, res->body), status);
  }
  return ParseResponseBody(res->body);
}

CompletionResult HttpBackend::Complete(std::span<const Message> messages,
                                       const SamplingConfig& sampling) {
  Rng jitter_rng(sampling.seed, 0x6a697474ULL);
  for (int attempt = 0;; ++attempt) {
    try {
      return CompleteOnce(messages, sampling);
    } catch (const BackendError& e) {
      if (!e.retriable() || attempt + 1 >= config_.retry.max_attempts) throw;
      const double factor =
          1.0 + config_.retry.jitter * (2.0 * jitter_rng.Uniform() - 1.0);
      const auto base = config_.retry.BaseDelay(attempt);
      sleeper_(std::chrono::milliseconds(static_cast<std::int64_t>(
          static_cast<double>(base.count()) * factor)));
    }
  }
}

}  // namespace reljudge
