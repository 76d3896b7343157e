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

#include "reljudge/config.h"

#include <gtest/gtest.h>

#include "reljudge/util.h"
#include "test_util.h"

namespace reljudge {
namespace {

TEST(Config, LargeModelPresetVerbatim) {
  RunConfig c = Preset("large-model");
  EXPECT_EQ(c.grpo.group_size, 16u);
  EXPECT_EQ(c.grpo.learning_rate, 5e-7);
  EXPECT_EQ(c.grpo.batch_size, 32u);
  EXPECT_EQ(c.grpo.steps, 360u);
  EXPECT_EQ(c.reward.lambda, 0.0);
  EXPECT_THROW(Preset("nope"), InputError);
}

TEST(Config, PrecedencePresetFileOverride) {
  testing::TempDir dir;
  WriteFileAtomic(dir / "run.conf",
                  "# comment line\n"
                  "grpo.epsilon = 0.3\n"
                  "grpo.steps = 50   \n"
                  "\n"
                  "reward.lambda=0.1\n");
  std::vector<std::string> overrides = {"grpo.steps=7", "rollout.protocol=no-intent"};
  RunConfig c = LoadRunConfig("large-model", dir / "run.conf", overrides);
  EXPECT_EQ(c.grpo.learning_rate, 5e-7);  // preset
  EXPECT_EQ(c.grpo.epsilon, 0.3);         // file
  EXPECT_EQ(c.reward.lambda, 0.1);        // file
  EXPECT_EQ(c.grpo.steps, 7u);            // override beats file
  EXPECT_EQ(c.protocol, Protocol::kNoIntent);
}

TEST(Config, UnknownKeyAndBadValue) {
  RunConfig c;
  EXPECT_THROW(ApplySetting(c, "grpo.epsilonn", "0.1"), InputError);
  EXPECT_THROW(ApplySetting(c, "grpo.steps", "ten"), InputError);
  EXPECT_THROW(ApplySetting(c, "grpo.steps", "-3"), InputError);
  EXPECT_THROW(ApplyOverride(c, "no-equals-sign"), InputError);
  EXPECT_THROW(ApplyConfigText(c, "grpo.beta\n"), InputError);
}

TEST(Config, ValidationNamesKey) {
  std::vector<std::string> o = {"reward.lambda=1.5"};
  try {
    LoadRunConfig("toy-default", std::nullopt, o);
    FAIL();
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("lambda"), std::string::npos) << e.what();
  }
  o = {"grpo.group_size=1"};
  EXPECT_THROW(LoadRunConfig("toy-default", std::nullopt, o), InputError);
}

TEST(Config, DumpListsEveryKeyAndRoundTrips) {
  std::vector<std::string> o = {"seed=99", "citation.forwards=5", "citation.threshold=2",
                                "agreement.gate=0.7"};
  RunConfig c = LoadRunConfig("toy-default", std::nullopt, o);
  const std::string dump = DumpConfig(c);
  for (const std::string& k : ConfigKeys()) {
    EXPECT_NE(dump.find(k), std::string::npos) << k;
  }
  RunConfig back = Preset("large-model");
  ApplyConfigText(back, dump);
  EXPECT_EQ(DumpConfig(back), dump);
  EXPECT_EQ(back.seed, 99u);
  ASSERT_TRUE(back.agreement_gate.has_value());
  EXPECT_EQ(*back.agreement_gate, 0.7);
}

TEST(Config, RolloutOptionsFollowConfig) {
  std::vector<std::string> o = {"rollout.use_aux_docs=false", "rollout.parallelism=4",
                                "reward.lambda=0.2"};
  RunConfig c = LoadRunConfig("toy-default", std::nullopt, o);
  RolloutOptions r = c.Rollout();
  EXPECT_FALSE(r.use_aux_docs);
  EXPECT_EQ(r.parallelism, 4);
  EXPECT_EQ(r.reward.lambda, 0.2);
}

}  // namespace
}  // namespace reljudge
