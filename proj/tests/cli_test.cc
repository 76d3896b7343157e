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

#include "reljudge/cli.h"

#include <sstream>

#include <gtest/gtest.h>

#include "reljudge/dataset.h"
#include "reljudge/toy_env.h"
#include "reljudge/util.h"
#include "synthetic_log.h"
#include "test_util.h"

namespace reljudge {
namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = RunCommand(args, out, err);
  return {code, out.str(), err.str()};
}

TEST(Cli, EvaluatePerfectPredictions) {
  testing::TempDir dir;
  CliRun r = Cli({"evaluate", "--preds", testing::DataPath("fixtures/predictions_perfect.jsonl").string(),
               "--gsb", "23:71:6", "--rate-before", "0.30", "--rate-after", "0.2897",
               "--out", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("  100.0"), std::string::npos) << r.out;
  auto j = nlohmann::json::parse(ReadFile(dir / "metrics.json"));
  EXPECT_EQ(j["classification"]["accuracy"], 1.0);
  EXPECT_DOUBLE_EQ(j["gsb"]["delta_percent"].get<double>(), 17.0);
  EXPECT_TRUE(std::filesystem::exists(dir / "metrics.txt"));
}

TEST(Cli, BadGsbIsInputError) {
  testing::TempDir dir;
  CliRun r = Cli({"evaluate", "--gsb", "23-71-6", "--out", dir.path().string()});
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, UnknownFlagAndMissingSubcommand) {
  EXPECT_EQ(Cli({"evaluate", "--bogus"}).code, 2);
  EXPECT_EQ(Cli({}).code, 2);
  EXPECT_EQ(Cli({"show-config", "--set", "nope=1"}).code, 2);
}

TEST(Cli, ShowConfigAppliesOverrides) {
  CliRun r = Cli({"show-config", "--preset", "large-model", "--set", "grpo.epsilon=0.3",
               "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("grpo.learning_rate = 5e-07"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("grpo.epsilon = 0.3"), std::string::npos);
  EXPECT_NE(r.out.find("seed = 5\n"), std::string::npos);
}

TEST(Cli, CheckGradientsPasses) {
  CliRun r = Cli({"check-gradients", "--instances", "3", "--seed", "1"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
}

std::string WritePairs(const testing::TempDir& dir) {
  ToySchema schema;
  std::string text;
  for (const auto& p : MakeSyntheticPairs(3, schema, 2)) text += ToJson(p).dump() + "\n";
  WriteFileAtomic(dir / "pairs.jsonl", text);
  return (dir / "pairs.jsonl").string();
}

TEST(Cli, RolloutThenAuditDetectsTampering) {
  testing::TempDir dir;
  const std::string pairs = WritePairs(dir);
  CliRun r = Cli({"rollout", "--pairs", pairs, "--backend", "toy", "--set", "grpo.group_size=4",
               "--set", "reward.lambda=0.1", "--out", dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string traj = (dir / "trajectories.jsonl").string();
  auto lines = ReadLines(traj);
  ASSERT_EQ(lines.size(), 12u);

  CliRun ok = Cli({"reward-audit", "--trajectories", traj});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("12 trajectories checked"), std::string::npos) << ok.out;

  auto j = nlohmann::json::parse(lines[0]);
  j["reward"]["total"] = j["reward"]["total"].get<double>() == 1.0 ? 0.0 : 1.0;
  lines[0] = j.dump();
  std::string body;
  for (const auto& l : lines) body += l + "\n";
  WriteFileAtomic(traj, body);
  CliRun bad = Cli({"reward-audit", "--trajectories", traj});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("mismatch: line 1"), std::string::npos) << bad.out;
}

TEST(Cli, TrainToyAndReport) {
  testing::TempDir dir;
  CliRun r = Cli({"train-toy", "--set", "grpo.steps=3", "--set", "grpo.batch_size=2",
               "--set", "grpo.group_size=4", "--set", "toy.pairs=4", "--out",
               dir.path().string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(ReadLines(dir / "train_log.jsonl").size(), 3u);
  EXPECT_TRUE(std::filesystem::exists(dir / "final_params.json"));
  CliRun rep = Cli({"report", "--log", (dir / "train_log.jsonl").string(), "--out",
                 dir.path().string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(ReadLines(dir / "report.csv").size(), 4u);
}

TEST(Cli, BuildDatasetIsByteIdentical) {
  testing::TempDir dir;
  std::string log;
  for (const auto& e : testing::SyntheticLog(60, 2, 3)) log += ToJson(e).dump() + "\n";
  WriteFileAtomic(dir / "log.jsonl", log);
  auto build = [&](const std::string& out) {
    return Cli({"build-dataset", "--log", (dir / "log.jsonl").string(), "--set",
                "citation.forwards=5", "--set", "citation.threshold=2", "--set",
                "dataset.random_negatives=100", "--set", "dataset.train_size=90",
                "--seed", "3", "--out", (dir / out).string()});
  };
  ASSERT_EQ(build("a").code, 0) << build("a").err;
  ASSERT_EQ(build("b").code, 0);
  EXPECT_EQ(ReadFile(dir / "a/train.jsonl"), ReadFile(dir / "b/train.jsonl"));
  EXPECT_EQ(ReadFile(dir / "a/eval.jsonl"), ReadFile(dir / "b/eval.jsonl"));
  EXPECT_EQ(ReadLines(dir / "a/train.jsonl").size(), 90u);
}

TEST(Cli, BuildDatasetNeedsCitationConfig) {
  testing::TempDir dir;
  WriteFileAtomic(dir / "log.jsonl", "");
  CliRun r = Cli({"build-dataset", "--log", (dir / "log.jsonl").string(), "--out",
               dir.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("citation"), std::string::npos) << r.err;
}

}  // namespace
}  // namespace reljudge
