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

// Two-round rollout driver.
//
// Round one shows the query with its auxiliary documents and asks for the
// intent. Round two continues the same conversation with the candidate
// document and asks for an extract and a score. Parse failures are recorded,
// not raised: a malformed trajectory simply earns zero reward.

#ifndef RELJUDGE_ROLLOUT_H_
#define RELJUDGE_ROLLOUT_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "reljudge/policy.h"
#include "reljudge/prompts.h"
#include "reljudge/reward.h"
#include "reljudge/types.h"

namespace reljudge {

inline constexpr std::size_t kDefaultGroupSize = 16;

struct RolloutOptions {
  Protocol protocol = Protocol::kTwoRound;
  // false drops the auxiliary documents (intent from the query alone).
  bool use_aux_docs = true;
  // Defaults to DefaultTemplates(protocol).
  std::optional<PromptTemplates> templates;
  RewardConfig reward;
  // Trajectories of one group run on up to this many threads.
  int parallelism = 1;

  PromptTemplates ResolvedTemplates() const;
};

// `sampling.seed` identifies the trajectory. Backend errors are caught and
// recorded in Trajectory::error; the reward is then left empty.
Trajectory RunTrajectory(const QueryDocPair& pair, CompletionBackend& backend,
                         const SamplingConfig& sampling,
                         const RolloutOptions& options = {});

// `count` distinct seeds derived from `base_seed`.
std::vector<std::uint64_t> GroupSeeds(std::uint64_t base_seed,
                                      std::size_t count);

// One trajectory per seed, in seed order. Needs at least two distinct seeds.
GroupRollout RunGroup(const QueryDocPair& pair, CompletionBackend& backend,
                      std::span<const std::uint64_t> seeds,
                      const SamplingConfig& sampling,
                      const RolloutOptions& options = {});

// JSON Lines persistence, one trajectory per line.
void AppendTrajectories(const std::filesystem::path& path,
                        std::span<const Trajectory> trajectories);
std::vector<Trajectory> ReadTrajectories(const std::filesystem::path& path);

std::vector<QueryDocPair> ReadPairs(const std::filesystem::path& path);

}  // namespace reljudge

#endif  // RELJUDGE_ROLLOUT_H_
