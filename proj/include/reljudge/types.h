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

// Records passed between rollout, reward, training and the CLI.

#ifndef RELJUDGE_TYPES_H_
#define RELJUDGE_TYPES_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "reljudge/policy.h"
#include "reljudge/tagparse.h"

namespace reljudge {

// A query, the auxiliary in-platform documents retrieved for it, the
// candidate document to judge, and the gold label when known.
struct QueryDocPair {
  std::string id;
  std::string query;
  std::vector<std::string> aux_docs;
  std::string candidate;
  std::optional<int> gold;

  void Validate() const;
  bool operator==(const QueryDocPair&) const = default;
};

nlohmann::json ToJson(const QueryDocPair& pair);
QueryDocPair QueryDocPairFromJson(const nlohmann::json& j);

struct RewardBreakdown {
  bool format_ok = false;
  double score_reward = 0.0;  // diagnostic even when format_ok is false
  double total = 0.0;
  std::optional<int> predicted;
  // Positive score with a none extract. Zeroes the reward only when the
  // consistency gate is enabled; otherwise it is reported here.
  bool inconsistent_extract = false;
  double lambda = 0.0;

  bool operator==(const RewardBreakdown&) const = default;
};

nlohmann::json ToJson(const RewardBreakdown& reward);
RewardBreakdown RewardBreakdownFromJson(const nlohmann::json& j);

// One complete rollout for a pair: round-one prompt and reply, round-two
// prompt and reply, and the sampling policy's per-token log-probabilities
// for round one followed by round two. Single-round protocols leave the
// round-two fields empty.
struct Trajectory {
  std::string pair_id;
  std::uint64_t seed = 0;
  Protocol protocol = Protocol::kTwoRound;
  std::string candidate;
  std::optional<int> gold;

  std::vector<Message> round1_messages;
  std::string round1_raw;
  std::vector<Message> round2_messages;
  std::string round2_raw;

  // Absent when the backend does not report log-probabilities.
  std::optional<std::vector<TokenLogprob>> tokens_old;
  std::size_t token_count = 0;

  std::optional<RewardBreakdown> reward;
  std::optional<std::string> error;

  bool failed() const { return error.has_value(); }
  std::vector<double> token_logprobs_old() const;
};

nlohmann::json ToJson(const Trajectory& trajectory);
Trajectory TrajectoryFromJson(const nlohmann::json& j);

struct GroupRollout {
  std::string pair_id;
  std::vector<Trajectory> trajectories;
  // False when more than half of the trajectories failed at transport level.
  bool usable = true;
};

}  // namespace reljudge

#endif  // RELJUDGE_TYPES_H_
