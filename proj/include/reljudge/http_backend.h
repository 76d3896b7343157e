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

// Client for OpenAI-compatible chat-completions servers (vLLM, SGLang,
// llama.cpp server, hosted APIs). Only the request fields model, messages,
// temperature, max_tokens, logprobs and seed are sent.

#ifndef RELJUDGE_HTTP_BACKEND_H_
#define RELJUDGE_HTTP_BACKEND_H_

#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <string>

#include "reljudge/policy.h"

namespace reljudge {

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};
  double jitter = 0.2;  // delay is scaled by a uniform factor in [1-j, 1+j]

  void Validate() const;
  // Delay before retry number `retry` (0-based), before jitter.
  std::chrono::milliseconds BaseDelay(int retry) const;
};

struct HttpBackendConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model = "default";
  // Name of the environment variable holding the bearer token. If the
  // variable is unset no Authorization header is sent.
  std::string api_key_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{120000};
  int max_in_flight = 8;
  bool request_logprobs = true;
  RetryPolicy retry;

  void Validate() const;
};

class HttpBackend : public CompletionBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpBackend(HttpBackendConfig config, Sleeper sleeper = {});

  // Retries retriable failures per the configured policy; rethrows the last
  // error once attempts are exhausted or on a non-retriable error.
  CompletionResult Complete(std::span<const Message> messages,
                            const SamplingConfig& sampling) override;

  // One request, no retries.
  CompletionResult CompleteOnce(std::span<const Message> messages,
                                const SamplingConfig& sampling);

  int peak_in_flight() const;
  int attempts_made() const;

  static std::string BuildRequestBody(const HttpBackendConfig& config,
                                      std::span<const Message> messages,
                                      const SamplingConfig& sampling);
  // Throws BackendError(kMalformedBody) on an unexpected shape.
  static CompletionResult ParseResponseBody(std::string_view body);

 private:
  class InFlightSlot;

  HttpBackendConfig config_;
  Sleeper sleeper_;
  std::string scheme_host_port_;
  std::string path_prefix_;

  mutable std::mutex mu_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
  int peak_in_flight_ = 0;
  int attempts_ = 0;
};

}  // namespace reljudge

#endif  // RELJUDGE_HTTP_BACKEND_H_
