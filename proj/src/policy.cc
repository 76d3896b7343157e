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

#include "reljudge/policy.h"

#include <cmath>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

std::string_view ToString(Role role) {
  switch (role) {
    case Role::kSystem:
      return "system";
    case Role::kUser:
      return "user";
    case Role::kAssistant:
      return "assistant";
  }
  return "";
}

Role RoleFromString(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  throw InputError(fmt::format("unknown message role '{}'", name));
}

void SamplingConfig::Validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw InputError("sampling temperature must be a finite value >= 0");
  }
  if (max_tokens <= 0) throw InputError("max_tokens must be positive");
}

std::string_view ToString(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kTransport:
      return "transport";
    case BackendErrorKind::kTimeout:
      return "timeout";
    case BackendErrorKind::kRateLimited:
      return "rate_limited";
    case BackendErrorKind::kServerError:
      return "server_error";
    case BackendErrorKind::kClientError:
      return "client_error";
    case BackendErrorKind::kMalformedBody:
      return "malformed_body";
  }
  return "";
}

BackendErrorKind BackendErrorKindFromString(std::string_view name) {
  for (auto kind :
       {BackendErrorKind::kTransport, BackendErrorKind::kTimeout,
        BackendErrorKind::kRateLimited, BackendErrorKind::kServerError,
        BackendErrorKind::kClientError, BackendErrorKind::kMalformedBody}) {
    if (ToString(kind) == name) return kind;
  }
  throw InputError(fmt::format("unknown backend error kind '{}'", name));
}

bool IsRetriable(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::kTransport:
    case BackendErrorKind::kTimeout:
    case BackendErrorKind::kRateLimited:
    case BackendErrorKind::kServerError:
      return true;
    case BackendErrorKind::kClientError:
    case BackendErrorKind::kMalformedBody:
      return false;
  }
  return false;
}

std::string MessageFingerprint(std::span<const Message> messages) {
  std::string canonical;
  for (const Message& m : messages) {
    canonical += ToString(m.role);
    canonical += '\x1f';
    canonical += m.content;
    canonical += '\x1e';
  }
  return HexDigest(StableHash(canonical));
}

nlohmann::json ToJson(const Message& message) {
  return {{"role", ToString(message.role)}, {"content", message.content}};
}

Message MessageFromJson(const nlohmann::json& j) {
  return Message{RoleFromString(j.at("role").get<std::string>()),
                 j.at("content").get<std::string>()};
}

nlohmann::json ToJson(std::span<const Message> messages) {
  nlohmann::json arr = nlohmann::json::array();
  for (const Message& m : messages) arr.push_back(ToJson(m));
  return arr;
}

std::vector<Message> MessagesFromJson(const nlohmann::json& j) {
  std::vector<Message> out;
  for (const auto& item : j) out.push_back(MessageFromJson(item));
  return out;
}

}  // namespace reljudge
