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

#include "reljudge/prompts.h"

#include <algorithm>
#include <array>

#include <fmt/format.h>

#include "json.hpp"
#include "reljudge/util.h"

namespace reljudge {
namespace {

constexpr std::string_view kRound1System =
    "You are a content understanding engineer working on a user-generated "
    "content platform.";

constexpr std::string_view kIntentTask =
    "Please determine the primary intent behind a user's search query, using "
    "both your internal knowledge and the provided context.\n";

constexpr std::string_view kRound1Inputs =
    "Your input consists of the [query] and the [in-platform documents] "
    "retrieved based on that query. The latter is intended to assist in "
    "judging the user's intent but may contain irrelevant content. The search "
    "query should be considered the primary reference. Please carefully "
    "analyze the given [query] and the corresponding [in-platform documents] "
    "to infer the underlying query intent.\n";

constexpr std::string_view kSingleInputs =
    "Your input consists of the [query], the [in-platform documents] "
    "retrieved based on that query, and the [document to be evaluated]. The "
    "[in-platform documents] are intended to assist in judging the user's "
    "intent but may contain irrelevant content. The search query should be "
    "considered the primary reference. Please carefully analyze the given "
    "[query] and the corresponding [in-platform documents] to infer the "
    "underlying query intent, then assess the relevance of the [document to "
    "be evaluated] and extract the relevant fragment of the document "
    "accordingly.\n";

constexpr std::string_view kAssessTask =
    "Please assess the relevance of the [document to be evaluated] based on "
    "the user's input [query] and the inferred [intent], and extract the "
    "relevant fragment of the document accordingly.\n";

constexpr std::string_view kAssessTaskNoExtract =
    "Please assess the relevance of the [document to be evaluated] based on "
    "the user's input [query] and the inferred [intent].\n";

constexpr std::string_view kScoringCriteria =
    "Scoring Criteria\n"
    "    0 = not relevant, the document has nothing to do with the query.\n"
    "    1 = partially relevant, the document is relevant to the query but "
    "partly answers it.\n"
    "    2 = highly relevant, the document is dedicated to the query and "
    "contains the exact answer.\n";

constexpr std::string_view kExtractionGuidelines =
    "Extraction Guidelines\n"
    "    1. Extract the content from the [document to be evaluated] that is "
    "strictly relevant to the query and can help answer the query. This may "
    "include paragraphs, sentences, or even individual phrases.\n"
    "    2. The extracted content must come directly from the original "
    "document, with all punctuation preserved.\n";

constexpr std::string_view kUmbrelaSystem =
    "You are a relevance assessor working on a user-generated content "
    "platform.";

constexpr std::string_view kUmbrelaScale =
    "Given a query and a document, you must provide a score on an integer "
    "scale of 0 to 2 with the following meanings:\n"
    "0 = represent that the document has nothing to do with the query\n"
    "1 = represents that the document has some answer for the query, but the "
    "answer may be a bit unclear, or hidden amongst extraneous information\n"
    "2 = represents that the document is dedicated to the query and contains "
    "the exact answer\n"
    "\n"
    "Important Instruction:\n"
    "Assign category 1 if document presents something very important related "
    "to the entire topic but also has some extra information and category 2 "
    "if the document only and entirely refers to the topic. If none of the "
    "above satisfies give it category 0.\n";

std::string_view FormatLine(Tag tag) {
  switch (tag) {
    case Tag::kThink:
      return "<think> [the reasoning content] </think>\n";
    case Tag::kIntent:
      return "<intent> [inferred user intent] </intent>\n";
    case Tag::kExtract:
      return "<extract> [fragment/none] </extract>\n";
    case Tag::kScore:
      return "<score> [0/1/2] </score>\n";
  }
  return "";
}

std::string FormatBlock(std::span<const Tag> grammar) {
  std::string out = "Your response must strictly follow the format:\n";
  for (Tag t : grammar) out += FormatLine(t);
  return out;
}

bool HasTag(std::span<const Tag> grammar, Tag tag) {
  return std::find(grammar.begin(), grammar.end(), tag) != grammar.end();
}

}  // namespace

PromptTemplates DefaultTemplates(Protocol protocol) {
  PromptTemplates t;
  t.round1_system = kRound1System;

  t.round1_user = std::string(kIntentTask) + std::string(kRound1Inputs) + "\n" +
                  FormatBlock(Round1Grammar(protocol == Protocol::kSingleRound
                                                ? Protocol::kTwoRound
                                                : protocol)) +
                  "Input\n"
                  "    [query]: {query}\n"
                  "    [in-platform documents]: {docs}";

  const auto round2 = Round2Grammar(protocol == Protocol::kSingleRound
                                        ? Protocol::kTwoRound
                                        : protocol);
  const bool extract = HasTag(round2, Tag::kExtract);
  t.round2_user = std::string(extract ? kAssessTask : kAssessTaskNoExtract) +
                  std::string(kScoringCriteria) +
                  (extract ? std::string(kExtractionGuidelines) : "") + "\n" +
                  FormatBlock(round2) +
                  "Input\n"
                  "    [document to be evaluated]: {doc}";

  t.single_user = std::string(kIntentTask) + std::string(kSingleInputs) +
                  std::string(kScoringCriteria) +
                  std::string(kExtractionGuidelines) + "\n" +
                  FormatBlock(Round1Grammar(Protocol::kSingleRound)) +
                  "Input\n"
                  "    [query]: {query}\n"
                  "    [in-platform documents]: {docs}\n"
                  "    [document to be evaluated]: {doc}";

  t.umbrela_system = kUmbrelaSystem;
  const std::array<Tag, 2> umbrela_grammar = {Tag::kThink, Tag::kScore};
  t.umbrela_user = std::string(kUmbrelaScale) + std::string(kIntentTask) +
                   "\n" + FormatBlock(umbrela_grammar) +
                   "Input\n"
                   "    [query]: {query}\n"
                   "    [document to be evaluated]: {doc}";
  return t;
}

PromptTemplates LoadTemplateOverrides(const std::filesystem::path& path,
                                      PromptTemplates base) {
  auto j = nlohmann::json::parse(ReadFile(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw InputError("prompt override file must be a JSON object: " +
                     path.string());
  }
  const std::array<std::pair<const char*, std::string*>, 6> fields = {{
      {"round1_system", &base.round1_system},
      {"round1_user", &base.round1_user},
      {"round2_user", &base.round2_user},
      {"single_user", &base.single_user},
      {"umbrela_system", &base.umbrela_system},
      {"umbrela_user", &base.umbrela_user},
  }};
  for (const auto& [key, value] : j.items()) {
    auto it = std::find_if(fields.begin(), fields.end(),
                           [&](const auto& f) { return key == f.first; });
    if (it == fields.end()) {
      throw InputError("unknown prompt override key '" + key + "'");
    }
    *it->second = value.get<std::string>();
  }
  return base;
}

std::string Substitute(
    std::string_view tmpl,
    std::span<const std::pair<std::string_view, std::string_view>> values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i);
      if (close != std::string_view::npos) {
        const std::string_view name = tmpl.substr(i + 1, close - i - 1);
        auto it = std::find_if(values.begin(), values.end(),
                               [&](const auto& kv) { return kv.first == name; });
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string FormatAuxDocs(std::span<const std::string> aux_docs) {
  if (aux_docs.empty()) return "(none)";
  std::string out;
  for (std::size_t i = 0; i < aux_docs.size(); ++i) {
    if (i > 0) out += '\n';
    out += fmt::format("{}. {}", i + 1, aux_docs[i]);
  }
  return out;
}

std::vector<Message> RenderRound1Prompt(std::string_view query,
                                        std::span<const std::string> aux_docs,
                                        const PromptTemplates& templates) {
  if (TrimWhitespace(query).empty()) throw InputError("query must be non-empty");
  const std::string docs = FormatAuxDocs(aux_docs);
  const std::array<std::pair<std::string_view, std::string_view>, 2> values = {
      {{"query", query}, {"docs", docs}}};
  return {Message{Role::kSystem, templates.round1_system},
          Message{Role::kUser, Substitute(templates.round1_user, values)}};
}

std::vector<Message> RenderRound2Messages(std::span<const Message> prior,
                                          std::string_view candidate,
                                          const PromptTemplates& templates) {
  if (prior.empty() || prior.back().role != Role::kAssistant) {
    throw InputError("round two needs the round-one assistant reply");
  }
  std::vector<Message> out(prior.begin(), prior.end());
  const std::array<std::pair<std::string_view, std::string_view>, 1> values = {
      {{"doc", candidate}}};
  out.push_back(Message{Role::kUser, Substitute(templates.round2_user, values)});
  return out;
}

std::vector<Message> RenderSingleRoundPrompt(
    std::string_view query, std::span<const std::string> aux_docs,
    std::string_view candidate, const PromptTemplates& templates) {
  if (TrimWhitespace(query).empty()) throw InputError("query must be non-empty");
  const std::string docs = FormatAuxDocs(aux_docs);
  const std::array<std::pair<std::string_view, std::string_view>, 3> values = {
      {{"query", query}, {"docs", docs}, {"doc", candidate}}};
  return {Message{Role::kSystem, templates.round1_system},
          Message{Role::kUser, Substitute(templates.single_user, values)}};
}

std::vector<Message> RenderUmbrelaPrompt(std::string_view query,
                                         std::string_view document,
                                         const PromptTemplates& templates) {
  const std::array<std::pair<std::string_view, std::string_view>, 2> values = {
      {{"query", query}, {"doc", document}}};
  return {Message{Role::kSystem, templates.umbrela_system},
          Message{Role::kUser, Substitute(templates.umbrela_user, values)}};
}

}  // namespace reljudge
