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

// Rule-based trajectory reward: R = format_ok * score_reward, where
// score_reward is 1 for an exact label, lambda for an off-by-one label and 0
// otherwise. format_ok requires every round to parse and the extract to be
// verbatim.

#ifndef RELJUDGE_REWARD_H_
#define RELJUDGE_REWARD_H_

#include <optional>
#include <string_view>

#include "reljudge/tagparse.h"
#include "reljudge/types.h"

namespace reljudge {

struct RewardConfig {
  double lambda = 0.0;  // near-miss reward, in [0, 1)
  // Treat a positive score with a none extract as a format failure.
  bool require_extract_consistency = false;

  void Validate() const;
};

// Throws InputError for labels outside {0,1,2} or lambda outside [0,1).
double ScoreReward(int pred, int gold, double lambda);

bool FormatIndicator(const ParseResult<Round1Output>& round1,
                     const ParseResult<Round2Output>& round2,
                     std::string_view candidate_doc,
                     const RewardConfig& config = {});

// Reparses the stored raw outputs under the trajectory's protocol and scores
// them. Throws InputError if no gold label is available (neither `gold` nor
// trajectory.gold).
RewardBreakdown TotalReward(const Trajectory& trajectory,
                            std::optional<int> gold,
                            const RewardConfig& config);

}  // namespace reljudge

#endif  // RELJUDGE_REWARD_H_
