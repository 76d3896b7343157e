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

// Group relative policy optimization.
//
// For a batch of groups, each group holding several sampled sequences of the
// same input, the objective is
//
//   J = mean_groups mean_i (1/n_i) sum_t [ min(r_t A_i, clip(r_t, 1-eps,
//       1+eps) A_i) - beta * KL_t ]
//
// with r_t = pi(a_t) / pi_old(a_t), A_i the group-standardized reward of
// sequence i, n_i its token count, and KL_t = x - ln x - 1 with
// x = pi_ref(a_t) / pi(a_t).

#ifndef RELJUDGE_GRPO_H_
#define RELJUDGE_GRPO_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reljudge/rollout.h"
#include "reljudge/toy_policy.h"

namespace reljudge {

enum class ReferencePolicy { kInitial, kFixedFile };

struct GrpoConfig {
  double epsilon = 0.2;
  double beta = 0.01;
  std::size_t group_size = kDefaultGroupSize;
  double learning_rate = 3.0;
  std::size_t batch_size = 8;  // groups per step
  std::size_t steps = 400;
  ReferencePolicy reference = ReferencePolicy::kInitial;
  std::string reference_file;  // toy params JSON, for kFixedFile

  void Validate() const;
};

// Hyperparameters of the reference 7B run: 16 rollouts per input, learning
// rate 5e-7, batch size 32, 360 steps. Recorded for completeness; they are
// not meaningful for the toy policy.
GrpoConfig LargeModelPreset();
GrpoConfig ToyDefaultPreset();

struct AdvantageStats {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::vector<double> advantages;
};

// A_i = (r_i - mean) / std; all zeros when std == 0. Needs >= 2 rewards.
AdvantageStats StandardizeAdvantages(std::span<const double> rewards);

double PerTokenSurrogate(double logp_new, double logp_old, double advantage,
                         double epsilon);

// x - ln x - 1 with x = exp(logp_ref - logp_new). Non-negative.
double KlEstimate(double logp_new, double logp_ref);

// One sampled sequence with aligned per-token log-probabilities.
struct ScoredSequence {
  double reward = 0.0;
  std::vector<double> logp_new;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
};
using SequenceGroup = std::vector<ScoredSequence>;

// Sequences with no tokens contribute nothing.
double GrpoObjective(std::span<const SequenceGroup> groups,
                     const GrpoConfig& config);

// A sequence sampled from the toy policy: its slot picks, the sampling
// policy's log-probabilities and the reference policy's.
struct ToySequence {
  double reward = 0.0;
  std::vector<ToyAction> actions;
  std::vector<double> logp_old;
  std::vector<double> logp_ref;
};
using ToyGroup = std::vector<ToySequence>;

// Evaluates the objective with logp_new taken from `params`.
double ToyGrpoObjective(const ToyPolicyParams& params,
                        std::span<const ToyGroup> groups,
                        const GrpoConfig& config);

// Exact gradient of ToyGrpoObjective with respect to `params`. Where the min
// picks the clipped term the gradient through the surrogate is zero.
std::vector<double> GrpoGradient(const ToyPolicyParams& params,
                                 std::span<const ToyGroup> groups,
                                 const GrpoConfig& config);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
};

// Central differences over every parameter read by some action, compared to
// GrpoGradient. Relative error uses max(|analytic|, |numeric|, floor): with
// h = 1e-5 the differences carry up to ~1e-11 of roundoff, so coordinates below
// the floor are effectively compared in absolute terms.
inline constexpr double kFiniteDiffFloor = 1e-6;
GradientCheckResult FiniteDiffCheck(const ToyPolicyParams& params,
                                    std::span<const ToyGroup> groups,
                                    const GrpoConfig& config, double h);

// Converts a rollout group of the toy backend into training form. Failed
// trajectories are dropped; missing rewards count as 0.
ToyGroup ToyGroupFromRollout(const GroupRollout& group,
                             const ToyPolicyParams& reference);

// --- Training ---

enum class InitMode { kZero, kColdStart };

struct TrainStep {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double mean_token_count = 0.0;
  double objective = 0.0;
  double kl_mean = 0.0;
  double format_rate = 0.0;
};

struct TrainingLog {
  std::vector<TrainStep> steps;
  std::optional<ToyPolicyParams> final_params;

  // First step whose mean reward reaches `threshold`, if any.
  std::optional<std::size_t> FirstStepReaching(double threshold) const;
  std::string ToJsonl() const;
  std::string ToCsv() const;
};

TrainingLog ReadTrainingLog(const std::filesystem::path& path);

// Demonstration fitting used for cold-start initialization.
struct ColdStartConfig {
  double teacher_accuracy = 0.8;  // teacher emits the gold label this often
  std::size_t sft_steps = 10;
  double sft_learning_rate = 0.3;
};

// A labeled toy task: pairs and the slot vocabularies of each.
struct ToyTask {
  ToySchema schema;
  std::vector<QueryDocPair> pairs;
  std::vector<ToyInstance> instances;

  static ToyTask FromPairs(std::vector<QueryDocPair> pairs, ToySchema schema);
};

// Fits `params` to teacher demonstrations of `task` (maximum likelihood by
// gradient ascent). The teacher answers with a verbatim extract and a label
// that is correct with probability teacher_accuracy.
void ColdStartFit(ToyPolicyParams& params, const ToyTask& task,
                  const ColdStartConfig& config, std::uint64_t seed);

struct TrainOptions {
  GrpoConfig grpo;
  RolloutOptions rollout;
  InitMode init = InitMode::kZero;
  ColdStartConfig cold_start;
  std::uint64_t seed = 0;
};

// Each step: snapshot the policy, roll out batch_size groups of group_size
// trajectories, score them, take one gradient-ascent step. Throws
// std::runtime_error if the objective becomes non-finite.
TrainingLog Train(const ToyTask& task, const TrainOptions& options);

}  // namespace reljudge

#endif  // RELJUDGE_GRPO_H_
