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

#include "reljudge/reward.h"

#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

void RewardConfig::Validate() const {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw InputError(fmt::format("reward.lambda must be in [0, 1) (got {})",
                                 lambda));
  }
}

double ScoreReward(int pred, int gold, double lambda) {
  CheckLabel(pred, "predicted label");
  CheckLabel(gold, "gold label");
  RewardConfig{lambda}.Validate();
  switch (std::abs(pred - gold)) {
    case 0:
      return 1.0;
    case 1:
      return lambda;
    default:
      return 0.0;
  }
}

bool FormatIndicator(const ParseResult<Round1Output>& round1,
                     const ParseResult<Round2Output>& round2,
                     std::string_view candidate_doc,
                     const RewardConfig& config) {
  if (!round1 || !round2) return false;
  if (!ValidateExtract(round2->extract, candidate_doc)) return false;
  if (config.require_extract_consistency && round2->score >= 1 &&
      round2->extract.is_none()) {
    return false;
  }
  return true;
}

RewardBreakdown TotalReward(const Trajectory& trajectory,
                            std::optional<int> gold,
                            const RewardConfig& config) {
  config.Validate();
  if (!gold) gold = trajectory.gold;
  if (!gold) {
    throw InputError("trajectory '" + trajectory.pair_id +
                     "' has no gold label");
  }
  CheckLabel(*gold, "gold label");

  const auto r1 =
      ParseTurn(trajectory.round1_raw, Round1Grammar(trajectory.protocol));
  const auto r2_grammar = Round2Grammar(trajectory.protocol);
  const bool two_rounds = !r2_grammar.empty();
  // Only parsed when the protocol has a second round.
  std::optional<ParseResult<TurnFields>> r2;
  if (two_rounds) r2.emplace(ParseTurn(trajectory.round2_raw, r2_grammar));

  // The turn that carries the score and extract.
  const ParseResult<TurnFields>& verdict = two_rounds ? *r2 : r1;

  RewardBreakdown out;
  out.lambda = config.lambda;
  bool format_ok = r1.ok() && verdict.ok();
  if (verdict.ok()) {
    const TurnFields& f = verdict.value();
    out.predicted = f.score;
    out.score_reward = ScoreReward(*f.score, *gold, config.lambda);
    if (f.extract) {
      if (!ValidateExtract(*f.extract, trajectory.candidate)) format_ok = false;
      out.inconsistent_extract = *f.score >= 1 && f.extract->is_none();
      if (config.require_extract_consistency && out.inconsistent_extract) {
        format_ok = false;
      }
    }
  }
  out.format_ok = format_ok;
  out.total = format_ok ? out.score_reward : 0.0;
  return out;
}

}  // namespace reljudge
