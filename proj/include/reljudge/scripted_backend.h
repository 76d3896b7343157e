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

#ifndef RELJUDGE_SCRIPTED_BACKEND_H_
#define RELJUDGE_SCRIPTED_BACKEND_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "reljudge/policy.h"

namespace reljudge {

// A canned reply, or a canned failure.
struct ScriptEntry {
  std::string text;
  std::optional<BackendErrorKind> error;
};

// Deterministic backend that answers from a table keyed by
// MessageFingerprint(). A key of the form "<fingerprint>#<seed>" takes
// precedence over the bare fingerprint, so scripts can vary per sample.
//
// Script files are JSON objects mapping key -> reply text, or key ->
// {"error": "<kind>"}. The key "*" sets the fallback reply.
class ScriptedBackend : public CompletionBackend {
 public:
  ScriptedBackend(std::map<std::string, ScriptEntry> table,
                  ScriptEntry fallback, double token_logprob = -1.0);

  static ScriptedBackend FromJson(const nlohmann::json& script);
  static ScriptedBackend FromFile(const std::filesystem::path& path);

  // Whitespace-delimited pieces of the reply become tokens, each with the
  // same synthetic log-probability.
  CompletionResult Complete(std::span<const Message> messages,
                            const SamplingConfig& sampling) override;

 private:
  std::map<std::string, ScriptEntry> table_;
  ScriptEntry fallback_;
  double token_logprob_;
};

}  // namespace reljudge

#endif  // RELJUDGE_SCRIPTED_BACKEND_H_
