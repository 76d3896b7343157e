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

// Text-generation backends shared by rollout and training.

#ifndef RELJUDGE_POLICY_H_
#define RELJUDGE_POLICY_H_

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace reljudge {

enum class Role { kSystem, kUser, kAssistant };

std::string_view ToString(Role role);
Role RoleFromString(std::string_view name);

struct Message {
  Role role = Role::kUser;
  std::string content;
  bool operator==(const Message&) const = default;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;  // natural log, <= 0
  bool operator==(const TokenLogprob&) const = default;
};

struct CompletionResult {
  std::string text;
  // Absent when the backend cannot report per-token log-probabilities.
  std::optional<std::vector<TokenLogprob>> token_logprobs;
  std::size_t token_count = 0;
};

struct SamplingConfig {
  double temperature = 1.0;  // 0 selects the argmax
  std::uint64_t seed = 0;
  int max_tokens = 1024;

  void Validate() const;
};

enum class BackendErrorKind {
  kTransport,      // connection refused, reset, DNS
  kTimeout,        // connect/read/write timeout or HTTP 408
  kRateLimited,    // HTTP 429
  kServerError,    // HTTP 5xx
  kClientError,    // other HTTP 4xx
  kMalformedBody,  // response is not the expected JSON shape
};

std::string_view ToString(BackendErrorKind kind);
BackendErrorKind BackendErrorKindFromString(std::string_view name);
bool IsRetriable(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& message,
               int status = 0)
      : std::runtime_error(message), kind_(kind), status_(status) {}

  BackendErrorKind kind() const { return kind_; }
  int status() const { return status_; }
  bool retriable() const { return IsRetriable(kind_); }

 private:
  BackendErrorKind kind_;
  int status_;
};

// A policy the rollout driver can query. Implementations must be safe to call
// from several threads at once.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult Complete(std::span<const Message> messages,
                                    const SamplingConfig& sampling) = 0;
};

// Stable identifier of a conversation, used as the script-table key.
std::string MessageFingerprint(std::span<const Message> messages);

nlohmann::json ToJson(const Message& message);
Message MessageFromJson(const nlohmann::json& j);
nlohmann::json ToJson(std::span<const Message> messages);
std::vector<Message> MessagesFromJson(const nlohmann::json& j);

}  // namespace reljudge

#endif  // RELJUDGE_POLICY_H_
