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

#include <gtest/gtest.h>

#include "reljudge/util.h"

namespace reljudge {
namespace {

constexpr char kDoc[] = "We stayed in Niseko. The powder was deep and dry.";

Trajectory MakeTrajectory(std::string r1, std::string r2, int gold) {
  Trajectory t;
  t.pair_id = "p";
  t.candidate = kDoc;
  t.gold = gold;
  t.round1_raw = std::move(r1);
  t.round2_raw = std::move(r2);
  return t;
}

const std::string kGood1 = "<think>t</think><intent>ski trip</intent>";

std::string Round2(std::string extract, int score) {
  return "<think>t</think><extract>" + extract + "</extract><score>" +
         std::to_string(score) + "</score>";
}

TEST(ScoreReward, Schedule) {
  EXPECT_EQ(ScoreReward(2, 2, 0.0), 1.0);
  EXPECT_EQ(ScoreReward(1, 2, 0.2), 0.2);
  EXPECT_EQ(ScoreReward(0, 2, 0.5), 0.0);
  EXPECT_EQ(ScoreReward(2, 1, 0.2), ScoreReward(1, 2, 0.2));
}

TEST(ScoreReward, RejectsBadInputs) {
  EXPECT_THROW(ScoreReward(3, 1, 0.0), InputError);
  EXPECT_THROW(ScoreReward(0, -1, 0.0), InputError);
  EXPECT_THROW(ScoreReward(0, 1, 1.0), InputError);
  EXPECT_THROW(ScoreReward(0, 1, -0.1), InputError);
}

TEST(FormatIndicator, Gates) {
  auto r1 = ParseRound1(kGood1);
  EXPECT_TRUE(FormatIndicator(r1, ParseRound2(Round2("The powder was deep", 2)), kDoc, {}));
  EXPECT_FALSE(FormatIndicator(r1, ParseRound2("<score>2</score>"), kDoc, {}));
  EXPECT_FALSE(FormatIndicator(r1, ParseRound2(Round2("The powder was deep!", 2)), kDoc, {}));
  EXPECT_FALSE(FormatIndicator(ParseRound1("oops"), ParseRound2(Round2("none", 0)), kDoc, {}));

  RewardConfig strict;
  strict.require_extract_consistency = true;
  EXPECT_TRUE(FormatIndicator(r1, ParseRound2(Round2("none", 2)), kDoc, {}));
  EXPECT_FALSE(FormatIndicator(r1, ParseRound2(Round2("none", 2)), kDoc, strict));
  EXPECT_TRUE(FormatIndicator(r1, ParseRound2(Round2("none", 0)), kDoc, strict));
}

TEST(TotalReward, HappyPathAndMiss) {
  auto hit = TotalReward(MakeTrajectory(kGood1, Round2("We stayed in Niseko.", 1), 1), std::nullopt, {});
  EXPECT_TRUE(hit.format_ok);
  EXPECT_EQ(hit.score_reward, 1.0);
  EXPECT_EQ(hit.total, 1.0);
  EXPECT_EQ(hit.predicted, 1);

  auto miss = TotalReward(MakeTrajectory(kGood1, Round2("none", 0), 1), std::nullopt, {});
  EXPECT_TRUE(miss.format_ok);
  EXPECT_EQ(miss.total, 0.0);
}

TEST(TotalReward, MalformedRoundsZeroTheReward) {
  auto bad2 = TotalReward(MakeTrajectory(kGood1, "<think>t</think><extract>x</extract><score>5</score>", 1), 1, {});
  EXPECT_FALSE(bad2.format_ok);
  EXPECT_EQ(bad2.total, 0.0);
  EXPECT_FALSE(bad2.predicted.has_value());

  // Round-one failure zeroes the whole trajectory, score still reported.
  auto bad1 = TotalReward(MakeTrajectory("<intent>x</intent>", Round2("none", 1), 1), 1, {});
  EXPECT_FALSE(bad1.format_ok);
  EXPECT_EQ(bad1.score_reward, 1.0);
  EXPECT_EQ(bad1.total, 0.0);
}

TEST(TotalReward, InconsistentExtractIsReportedNotGatedByDefault) {
  auto r = TotalReward(MakeTrajectory(kGood1, Round2("none", 2), 2), 2, {});
  EXPECT_TRUE(r.inconsistent_extract);
  EXPECT_EQ(r.total, 1.0);
  RewardConfig strict;
  strict.require_extract_consistency = true;
  EXPECT_EQ(TotalReward(MakeTrajectory(kGood1, Round2("none", 2), 2), 2, strict).total, 0.0);
}

TEST(TotalReward, LambdaNearMiss) {
  RewardConfig c;
  c.lambda = 0.1;
  auto r = TotalReward(MakeTrajectory(kGood1, Round2("none", 1), 2), 2, c);
  EXPECT_EQ(r.total, 0.1);
  EXPECT_EQ(r.lambda, 0.1);
}

TEST(TotalReward, MissingGoldIsAnError) {
  Trajectory t = MakeTrajectory(kGood1, Round2("none", 0), 0);
  t.gold.reset();
  EXPECT_THROW(TotalReward(t, std::nullopt, {}), InputError);
}

TEST(TotalReward, SingleRoundProtocolScoresRoundOne) {
  Trajectory t = MakeTrajectory(
      "<think>t</think><intent>i</intent><extract>none</extract><score>0</score>",
      "", 0);
  t.protocol = Protocol::kSingleRound;
  auto r = TotalReward(t, std::nullopt, {});
  EXPECT_TRUE(r.format_ok);
  EXPECT_EQ(r.total, 1.0);
}

TEST(TotalReward, NoExtractProtocolHasNoExtractGate) {
  Trajectory t = MakeTrajectory(kGood1, "<think>t</think><score>2</score>", 2);
  t.protocol = Protocol::kNoExtract;
  EXPECT_EQ(TotalReward(t, std::nullopt, {}).total, 1.0);
}

}  // namespace
}  // namespace reljudge
