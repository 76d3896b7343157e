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

#include "reljudge/scripted_backend.h"

#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

ScriptedBackend::ScriptedBackend(std::map<std::string, ScriptEntry> table,
                                 ScriptEntry fallback, double token_logprob)
    : table_(std::move(table)),
      fallback_(std::move(fallback)),
      token_logprob_(token_logprob) {
  if (!(token_logprob_ <= 0.0) || !std::isfinite(token_logprob_)) {
    throw InputError("scripted token_logprob must be finite and <= 0");
  }
}

namespace {
ScriptEntry EntryFromJson(const nlohmann::json& value, const std::string& key) {
  if (value.is_string()) return ScriptEntry{value.get<std::string>(), {}};
  if (value.is_object() && value.contains("error")) {
    return ScriptEntry{
        {}, BackendErrorKindFromString(value["error"].get<std::string>())};
  }
  throw InputError(fmt::format("script entry '{}' must be a string or "
                               "{{\"error\": kind}}",
                               key));
}
}  // namespace

ScriptedBackend ScriptedBackend::FromJson(const nlohmann::json& script) {
  if (!script.is_object()) throw InputError("script must be a JSON object");
  std::map<std::string, ScriptEntry> table;
  ScriptEntry fallback;
  for (const auto& [key, value] : script.items()) {
    if (key == "*") {
      fallback = EntryFromJson(value, key);
    } else {
      table.emplace(key, EntryFromJson(value, key));
    }
  }
  return ScriptedBackend(std::move(table), std::move(fallback));
}

ScriptedBackend ScriptedBackend::FromFile(const std::filesystem::path& path) {
  auto j = nlohmann::json::parse(ReadFile(path), nullptr, false);
  if (j.is_discarded()) {
    throw InputError("script file is not valid JSON: " + path.string());
  }
  return FromJson(j);
}

CompletionResult ScriptedBackend::Complete(std::span<const Message> messages,
                                           const SamplingConfig& sampling) {
  const std::string fp = MessageFingerprint(messages);
  const ScriptEntry* entry = &fallback_;
  if (auto it = table_.find(fmt::format("{}#{}", fp, sampling.seed));
      it != table_.end()) {
    entry = &it->second;
  } else if (auto it2 = table_.find(fp); it2 != table_.end()) {
    entry = &it2->second;
  }
  if (entry->error) {
    throw BackendError(*entry->error,
                       fmt::format("scripted {} for {}",
                                   ToString(*entry->error), fp));
  }

  CompletionResult result;
  result.text = entry->text;
  std::vector<TokenLogprob> tokens;
  std::size_t i = 0;
  const std::string& t = result.text;
  while (i < t.size()) {
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
    std::size_t j = i;
    while (j < t.size() && !std::isspace(static_cast<unsigned char>(t[j]))) ++j;
    if (j > i) tokens.push_back(TokenLogprob{t.substr(i, j - i), token_logprob_});
    i = j;
  }
  result.token_count = tokens.size();
  result.token_logprobs = std::move(tokens);
  return result;
}

}  // namespace reljudge
