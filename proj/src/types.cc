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

#include "reljudge/types.h"

#include "reljudge/util.h"

namespace reljudge {

void QueryDocPair::Validate() const {
  if (TrimWhitespace(query).empty()) {
    throw InputError("pair '" + id + "': query must be non-empty");
  }
  if (gold) CheckLabel(*gold, "gold label of pair '" + id + "'");
}

nlohmann::json ToJson(const QueryDocPair& pair) {
  nlohmann::json j = {{"id", pair.id},
                      {"query", pair.query},
                      {"aux_docs", pair.aux_docs},
                      {"candidate", pair.candidate}};
  j["gold"] = pair.gold ? nlohmann::json(*pair.gold) : nlohmann::json(nullptr);
  return j;
}

QueryDocPair QueryDocPairFromJson(const nlohmann::json& j) {
  QueryDocPair p;
  p.id = j.at("id").get<std::string>();
  p.query = j.at("query").get<std::string>();
  if (j.contains("aux_docs") && !j["aux_docs"].is_null()) {
    p.aux_docs = j["aux_docs"].get<std::vector<std::string>>();
  }
  p.candidate = j.at("candidate").get<std::string>();
  if (j.contains("gold") && !j["gold"].is_null()) p.gold = j["gold"].get<int>();
  p.Validate();
  return p;
}

nlohmann::json ToJson(const RewardBreakdown& r) {
  nlohmann::json j = {{"format_ok", r.format_ok},
                      {"score_reward", r.score_reward},
                      {"total", r.total},
                      {"lambda", r.lambda},
                      {"inconsistent_extract", r.inconsistent_extract}};
  j["predicted"] =
      r.predicted ? nlohmann::json(*r.predicted) : nlohmann::json(nullptr);
  return j;
}

RewardBreakdown RewardBreakdownFromJson(const nlohmann::json& j) {
  RewardBreakdown r;
  r.format_ok = j.at("format_ok").get<bool>();
  r.score_reward = j.at("score_reward").get<double>();
  r.total = j.at("total").get<double>();
  r.lambda = j.value("lambda", 0.0);
  r.inconsistent_extract = j.value("inconsistent_extract", false);
  if (j.contains("predicted") && !j["predicted"].is_null()) {
    r.predicted = j["predicted"].get<int>();
  }
  return r;
}

std::vector<double> Trajectory::token_logprobs_old() const {
  std::vector<double> out;
  if (!tokens_old) return out;
  out.reserve(tokens_old->size());
  for (const auto& t : *tokens_old) out.push_back(t.logprob);
  return out;
}

namespace {

nlohmann::json ParsedToJson(const ParseResult<TurnFields>& parsed) {
  if (!parsed) return {{"failure", parsed.failure().Describe()}};
  nlohmann::json j = {{"think", parsed->think}};
  if (parsed->intent) j["intent"] = *parsed->intent;
  if (parsed->extract) {
    j["extract"] = parsed->extract->is_none()
                       ? nlohmann::json(nullptr)
                       : nlohmann::json(parsed->extract->fragment());
  }
  if (parsed->score) j["score"] = *parsed->score;
  return j;
}

}  // namespace

nlohmann::json ToJson(const Trajectory& t) {
  nlohmann::json j;
  j["pair_id"] = t.pair_id;
  j["seed"] = t.seed;
  j["protocol"] = ToString(t.protocol);
  j["candidate"] = t.candidate;
  j["gold"] = t.gold ? nlohmann::json(*t.gold) : nlohmann::json(nullptr);
  j["round1_messages"] = ToJson(std::span<const Message>(t.round1_messages));
  j["round1_raw"] = t.round1_raw;
  j["round2_messages"] = ToJson(std::span<const Message>(t.round2_messages));
  j["round2_raw"] = t.round2_raw;

  nlohmann::json parsed = nlohmann::json::object();
  if (!t.round1_messages.empty()) {
    parsed["round1"] =
        ParsedToJson(ParseTurn(t.round1_raw, Round1Grammar(t.protocol)));
  }
  if (!t.round2_messages.empty()) {
    parsed["round2"] =
        ParsedToJson(ParseTurn(t.round2_raw, Round2Grammar(t.protocol)));
  }
  j["parsed"] = parsed;

  if (t.tokens_old) {
    nlohmann::json tokens = nlohmann::json::array();
    for (const auto& tok : *t.tokens_old) tokens.push_back(tok.token);
    j["tokens"] = tokens;
    j["token_logprobs_old"] = t.token_logprobs_old();
  } else {
    j["tokens"] = nullptr;
    j["token_logprobs_old"] = nullptr;
  }
  j["token_count"] = t.token_count;
  j["reward"] = t.reward ? ToJson(*t.reward) : nlohmann::json(nullptr);
  j["error"] = t.error ? nlohmann::json(*t.error) : nlohmann::json(nullptr);
  return j;
}

Trajectory TrajectoryFromJson(const nlohmann::json& j) {
  Trajectory t;
  t.pair_id = j.at("pair_id").get<std::string>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.protocol = ProtocolFromString(j.value("protocol", "two-round"));
  t.candidate = j.at("candidate").get<std::string>();
  if (j.contains("gold") && !j["gold"].is_null()) t.gold = j["gold"].get<int>();
  t.round1_messages = MessagesFromJson(j.at("round1_messages"));
  t.round1_raw = j.at("round1_raw").get<std::string>();
  t.round2_messages = MessagesFromJson(j.at("round2_messages"));
  t.round2_raw = j.at("round2_raw").get<std::string>();
  if (j.contains("token_logprobs_old") && !j["token_logprobs_old"].is_null()) {
    const auto lps = j["token_logprobs_old"].get<std::vector<double>>();
    std::vector<std::string> names(lps.size());
    if (j.contains("tokens") && !j["tokens"].is_null()) {
      names = j["tokens"].get<std::vector<std::string>>();
      if (names.size() != lps.size()) {
        throw InputError("trajectory '" + t.pair_id +
                         "': tokens and token_logprobs_old differ in length");
      }
    }
    std::vector<TokenLogprob> tokens;
    for (std::size_t i = 0; i < lps.size(); ++i) {
      tokens.push_back(TokenLogprob{names[i], lps[i]});
    }
    t.tokens_old = std::move(tokens);
  }
  t.token_count = j.at("token_count").get<std::size_t>();
  if (j.contains("reward") && !j["reward"].is_null()) {
    t.reward = RewardBreakdownFromJson(j["reward"]);
  }
  if (j.contains("error") && !j["error"].is_null()) {
    t.error = j["error"].get<std::string>();
  }
  return t;
}

}  // namespace reljudge
