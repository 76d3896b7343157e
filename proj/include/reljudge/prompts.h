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

// Prompt templates for the judge.
//
// Templates use the placeholders {query}, {docs} and {doc}. Substitution is a
// single left-to-right pass, so placeholder-like text inside substituted
// values is never expanded again.

#ifndef RELJUDGE_PROMPTS_H_
#define RELJUDGE_PROMPTS_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reljudge/policy.h"
#include "reljudge/tagparse.h"

namespace reljudge {

struct PromptTemplates {
  std::string round1_system;
  std::string round1_user;   // {query}, {docs}
  std::string round2_user;   // {doc}
  std::string single_user;   // {query}, {docs}, {doc}
  std::string umbrela_system;
  std::string umbrela_user;  // {query}, {doc}
};

// English templates. The format-instruction lines follow the protocol's
// grammar; kTwoRound yields the reference wording.
PromptTemplates DefaultTemplates(Protocol protocol = Protocol::kTwoRound);

// Replaces the fields present in a JSON object file (keys as in
// PromptTemplates) on top of `base`. Used for localized prompt sets.
PromptTemplates LoadTemplateOverrides(const std::filesystem::path& path,
                                      PromptTemplates base);

std::string Substitute(
    std::string_view tmpl,
    std::span<const std::pair<std::string_view, std::string_view>> values);

// Numbered list "1. a\n2. b"; "(none)" when empty.
std::string FormatAuxDocs(std::span<const std::string> aux_docs);

std::vector<Message> RenderRound1Prompt(
    std::string_view query, std::span<const std::string> aux_docs,
    const PromptTemplates& templates = DefaultTemplates());

// `prior` is the round-one conversation including the assistant reply.
// Returns it with the round-two user turn appended.
std::vector<Message> RenderRound2Messages(
    std::span<const Message> prior, std::string_view candidate,
    const PromptTemplates& templates = DefaultTemplates());

std::vector<Message> RenderSingleRoundPrompt(
    std::string_view query, std::span<const std::string> aux_docs,
    std::string_view candidate,
    const PromptTemplates& templates = DefaultTemplates(Protocol::kSingleRound));

// Single-round score-only prompt used for cold-start teacher annotation.
std::vector<Message> RenderUmbrelaPrompt(
    std::string_view query, std::string_view document,
    const PromptTemplates& templates = DefaultTemplates());

}  // namespace reljudge

#endif  // RELJUDGE_PROMPTS_H_
