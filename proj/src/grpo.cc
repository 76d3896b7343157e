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

#include "reljudge/grpo.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

void GrpoConfig::Validate() const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw InputError(fmt::format("grpo.epsilon must be in (0, 1) (got {})",
                                 epsilon));
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw InputError("grpo.beta must be finite and >= 0");
  }
  if (group_size < 2) {
    throw InputError(fmt::format("grpo.group_size must be >= 2 (got {})",
                                 group_size));
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InputError("grpo.learning_rate must be finite and >= 0");
  }
  if (batch_size < 1) throw InputError("grpo.batch_size must be >= 1");
  if (reference == ReferencePolicy::kFixedFile && reference_file.empty()) {
    throw InputError("grpo.reference_file is required for a fixed reference");
  }
}

GrpoConfig LargeModelPreset() {
  GrpoConfig c;
  c.group_size = 16;
  c.learning_rate = 5e-7;
  c.batch_size = 32;
  c.steps = 360;
  return c;
}

GrpoConfig ToyDefaultPreset() { return GrpoConfig{}; }

AdvantageStats StandardizeAdvantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw InputError(fmt::format("advantage standardization needs >= 2 "
                                 "rewards (got {})",
                                 rewards.size()));
  }
  const double n = static_cast<double>(rewards.size());
  AdvantageStats s;
  s.mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : rewards) ss += (r - s.mean) * (r - s.mean);
  s.std = std::sqrt(ss / n);
  s.advantages.assign(rewards.size(), 0.0);
  // Rewards equal up to rounding are a degenerate group too.
  const double scale =
      std::max(1.0, std::abs(s.mean));
  if (s.std > 1e-12 * scale) {
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      s.advantages[i] = (rewards[i] - s.mean) / s.std;
    }
  } else {
    s.std = 0.0;
  }
  return s;
}

double PerTokenSurrogate(double logp_new, double logp_old, double advantage,
                         double epsilon) {
  const double ratio = std::exp(logp_new - logp_old);
  const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(ratio * advantage, clipped * advantage);
}

double KlEstimate(double logp_new, double logp_ref) {
  const double d = logp_ref - logp_new;
  // x - ln x - 1 = expm1(d) - d, accurate for small d.
  return std::max(0.0, std::expm1(d) - d);
}

namespace {

void CheckAligned(const std::vector<double>& a, const std::vector<double>& b,
                  const std::vector<double>& c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw InputError(fmt::format(
        "token log-probability vectors differ in length ({}, {}, {})",
        a.size(), b.size(), c.size()));
  }
}

std::vector<double> GroupRewards(const auto& group) {
  std::vector<double> rewards;
  rewards.reserve(group.size());
  for (const auto& s : group) rewards.push_back(s.reward);
  return rewards;
}

}  // namespace

double GrpoObjective(std::span<const SequenceGroup> groups,
                     const GrpoConfig& config) {
  if (groups.empty()) throw InputError("objective needs at least one group");
  double total = 0.0;
  for (const SequenceGroup& group : groups) {
    const auto adv = StandardizeAdvantages(GroupRewards(group));
    double group_sum = 0.0;
    for (std::size_t i = 0; i < group.size(); ++i) {
      const ScoredSequence& s = group[i];
      CheckAligned(s.logp_new, s.logp_old, s.logp_ref);
      if (s.logp_new.empty()) continue;
      double seq = 0.0;
      for (std::size_t t = 0; t < s.logp_new.size(); ++t) {
        seq += PerTokenSurrogate(s.logp_new[t], s.logp_old[t],
                                 adv.advantages[i], config.epsilon) -
               config.beta * KlEstimate(s.logp_new[t], s.logp_ref[t]);
      }
      group_sum += seq / static_cast<double>(s.logp_new.size());
    }
    total += group_sum / static_cast<double>(group.size());
  }
  return total / static_cast<double>(groups.size());
}

namespace {

std::vector<SequenceGroup> ToSequenceGroups(const ToyPolicyParams& params,
                                            std::span<const ToyGroup> groups) {
  std::vector<SequenceGroup> out;
  out.reserve(groups.size());
  for (const ToyGroup& g : groups) {
    SequenceGroup sg;
    sg.reserve(g.size());
    for (const ToySequence& s : g) {
      sg.push_back(ScoredSequence{s.reward, ToyLogprobs(params, s.actions),
                                  s.logp_old, s.logp_ref});
    }
    out.push_back(std::move(sg));
  }
  return out;
}

}  // namespace

double ToyGrpoObjective(const ToyPolicyParams& params,
                        std::span<const ToyGroup> groups,
                        const GrpoConfig& config) {
  return GrpoObjective(ToSequenceGroups(params, groups), config);
}

std::vector<double> GrpoGradient(const ToyPolicyParams& params,
                                 std::span<const ToyGroup> groups,
                                 const GrpoConfig& config) {
  if (groups.empty()) throw InputError("gradient needs at least one group");
  std::vector<double> grad(params.size(), 0.0);
  const double per_group = 1.0 / static_cast<double>(groups.size());

  for (const ToyGroup& group : groups) {
    const auto adv = StandardizeAdvantages(GroupRewards(group));
    const double per_seq = per_group / static_cast<double>(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
      const ToySequence& s = group[i];
      if (s.actions.size() != s.logp_old.size() ||
          s.actions.size() != s.logp_ref.size()) {
        throw InputError("toy sequence: actions and log-probabilities differ "
                         "in length");
      }
      if (s.actions.empty()) continue;
      const double per_token =
          per_seq / static_cast<double>(s.actions.size());
      const double a = adv.advantages[i];
      for (std::size_t t = 0; t < s.actions.size(); ++t) {
        const ToyAction& act = s.actions[t];
        const auto logprobs =
            SlotLogProbs(params, act.slot, act.bucket, act.vocab_size);
        if (act.chosen >= act.vocab_size) {
          throw InputError("toy action index outside its vocabulary");
        }
        const double lp = logprobs[act.chosen];

        // d/d(lp) of the surrogate: the unclipped branch is r*A with
        // derivative r*A; the clipped branch is constant.
        const double ratio = std::exp(lp - s.logp_old[t]);
        const double clipped =
            std::clamp(ratio, 1.0 - config.epsilon, 1.0 + config.epsilon);
        const double d_surrogate = ratio * a <= clipped * a ? ratio * a : 0.0;
        // d/d(lp) of x - ln x - 1 with x = exp(ref - lp) is 1 - x.
        const double x = std::exp(s.logp_ref[t] - lp);
        const double d_kl = 1.0 - x;
        const double weight = per_token * (d_surrogate - config.beta * d_kl);
        if (weight == 0.0) continue;

        const std::size_t offset = params.RowOffset(act.slot, act.bucket);
        for (std::size_t j = 0; j < act.vocab_size; ++j) {
          grad[offset + j] +=
              weight * ((j == act.chosen ? 1.0 : 0.0) - std::exp(logprobs[j]));
        }
      }
    }
  }
  return grad;
}

GradientCheckResult FiniteDiffCheck(const ToyPolicyParams& params,
                                    std::span<const ToyGroup> groups,
                                    const GrpoConfig& config, double h) {
  if (!(h > 0.0)) throw InputError("finite-difference step must be > 0");
  const std::vector<double> analytic = GrpoGradient(params, groups, config);

  std::set<std::size_t> touched;
  for (const ToyGroup& g : groups) {
    for (const ToySequence& s : g) {
      for (const ToyAction& a : s.actions) {
        const std::size_t offset = params.RowOffset(a.slot, a.bucket);
        for (std::size_t j = 0; j < a.vocab_size; ++j) touched.insert(offset + j);
      }
    }
  }

  GradientCheckResult result;
  ToyPolicyParams probe = params;
  for (std::size_t k : touched) {
    const double original = probe.values()[k];
    probe.values()[k] = original + h;
    const double up = ToyGrpoObjective(probe, groups, config);
    probe.values()[k] = original - h;
    const double down = ToyGrpoObjective(probe, groups, config);
    probe.values()[k] = original;
    const double numeric = (up - down) / (2.0 * h);
    const double denom =
        std::max({std::abs(analytic[k]), std::abs(numeric), kFiniteDiffFloor});
    result.max_relative_error = std::max(
        result.max_relative_error, std::abs(analytic[k] - numeric) / denom);
    ++result.coordinates;
  }
  return result;
}

ToyGroup ToyGroupFromRollout(const GroupRollout& group,
                             const ToyPolicyParams& reference) {
  ToyGroup out;
  for (const Trajectory& t : group.trajectories) {
    if (t.failed()) continue;
    if (!t.tokens_old) {
      throw InputError("trajectory '" + t.pair_id +
                       "' has no token log-probabilities");
    }
    ToySequence s;
    s.reward = t.reward ? t.reward->total : 0.0;
    for (const TokenLogprob& tok : *t.tokens_old) {
      s.actions.push_back(DecodeToyToken(tok.token));
      s.logp_old.push_back(tok.logprob);
    }
    s.logp_ref = ToyLogprobs(reference, s.actions);
    out.push_back(std::move(s));
  }
  return out;
}

// --- Training ---

std::optional<std::size_t> TrainingLog::FirstStepReaching(
    double threshold) const {
  for (const TrainStep& s : steps) {
    if (s.mean_reward >= threshold) return s.step;
  }
  return std::nullopt;
}

std::string TrainingLog::ToJsonl() const {
  std::string out;
  for (const TrainStep& s : steps) {
    nlohmann::json j = {{"step", s.step},
                        {"mean_reward", s.mean_reward},
                        {"mean_token_count", s.mean_token_count},
                        {"objective", s.objective},
                        {"kl_mean", s.kl_mean},
                        {"format_rate", s.format_rate}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::string TrainingLog::ToCsv() const {
  std::string out =
      "step,mean_reward,mean_token_count,objective,kl_mean,format_rate\n";
  for (const TrainStep& s : steps) {
    out += fmt::format("{},{:.6f},{:.6f},{:.9g},{:.9g},{:.6f}\n", s.step,
                       s.mean_reward, s.mean_token_count, s.objective,
                       s.kl_mean, s.format_rate);
  }
  return out;
}

TrainingLog ReadTrainingLog(const std::filesystem::path& path) {
  TrainingLog log;
  for (const std::string& line : ReadLines(path)) {
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw InputError("training log line is not valid JSON: " + line);
    }
    TrainStep s;
    s.step = j.at("step").get<std::size_t>();
    s.mean_reward = j.at("mean_reward").get<double>();
    s.mean_token_count = j.at("mean_token_count").get<double>();
    s.objective = j.at("objective").get<double>();
    s.kl_mean = j.at("kl_mean").get<double>();
    s.format_rate = j.value("format_rate", 0.0);
    log.steps.push_back(s);
  }
  return log;
}

ToyTask ToyTask::FromPairs(std::vector<QueryDocPair> pairs, ToySchema schema) {
  ToyTask task;
  task.schema = schema;
  for (const QueryDocPair& p : pairs) {
    p.Validate();
    if (!p.gold) throw InputError("toy task pair '" + p.id + "' has no gold");
    task.instances.push_back(MakeToyInstance(p.query, p.candidate, schema));
  }
  task.pairs = std::move(pairs);
  return task;
}

void ColdStartFit(ToyPolicyParams& params, const ToyTask& task,
                  const ColdStartConfig& config, std::uint64_t seed) {
  if (!(config.teacher_accuracy >= 0.0 && config.teacher_accuracy <= 1.0)) {
    throw InputError("cold_start.teacher_accuracy must be in [0, 1]");
  }
  if (task.pairs.empty()) return;
  Rng rng(seed, 0x636f6c64ULL);

  // One demonstration per pair.
  std::vector<ToyAction> demos;
  for (std::size_t i = 0; i < task.pairs.size(); ++i) {
    const ToyInstance& inst = task.instances[i];
    const int gold = *task.pairs[i].gold;
    int label = gold;
    if (rng.Uniform() >= config.teacher_accuracy) {
      label = (gold + 1 + static_cast<int>(rng.Below(2))) % kNumLabels;
    }
    const std::size_t extract_vocab = inst.VocabSize(Slot::kExtract, params.schema());
    // Verbatim first sentence for a relevant label, none otherwise.
    const std::size_t extract = (label > 0 && extract_vocab > 1) ? 1 : 0;
    demos.push_back({Slot::kIntent, inst.bucket,
                     inst.VocabSize(Slot::kIntent, params.schema()), 0});
    demos.push_back({Slot::kExtract, inst.bucket, extract_vocab, extract});
    demos.push_back({Slot::kScore, inst.bucket, 3,
                     static_cast<std::size_t>(label)});
  }

  // Buckets rarely share demonstrations, so the summed gradient already has
  // per-row scale.
  const double scale = config.sft_learning_rate;
  for (std::size_t step = 0; step < config.sft_steps; ++step) {
    const ToyLogprobGrad lg = ToyLogprobAndGrad(params, demos);
    for (std::size_t k = 0; k < params.size(); ++k) {
      params.values()[k] += scale * lg.gradient[k];
    }
  }
}

TrainingLog Train(const ToyTask& task, const TrainOptions& options) {
  const GrpoConfig& cfg = options.grpo;
  cfg.Validate();
  options.rollout.reward.Validate();
  if (task.pairs.empty()) throw InputError("training needs a non-empty task");

  ToyPolicyParams params(task.schema);
  if (options.init == InitMode::kColdStart) {
    ColdStartFit(params, task, options.cold_start, options.seed);
  }
  const ToyPolicyParams reference =
      cfg.reference == ReferencePolicy::kFixedFile
          ? ToyPolicyParams::FromJson(
                nlohmann::json::parse(ReadFile(cfg.reference_file)))
          : params;
  if (!(reference.schema() == task.schema)) {
    throw InputError("reference policy schema does not match the task");
  }

  Rng batch_rng(options.seed, 0x62617463ULL);
  std::vector<std::size_t> order(task.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  SamplingConfig sampling;
  sampling.temperature = 1.0;

  TrainingLog log;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    auto snapshot = std::make_shared<const ToyPolicyParams>(params);

    std::vector<ToyGroup> groups;
    double reward_sum = 0.0;
    double token_sum = 0.0;
    double format_sum = 0.0;
    std::size_t n_traj = 0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      if (cursor == order.size()) {
        batch_rng.Shuffle(order);
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      ToyBackend backend(snapshot, task.instances[idx], options.rollout.protocol);
      const auto seeds = GroupSeeds(
          StableHash(fmt::format("{}/{}/{}", options.seed, step, b)),
          cfg.group_size);
      const GroupRollout rollout =
          RunGroup(task.pairs[idx], backend, seeds, sampling, options.rollout);
      for (const Trajectory& t : rollout.trajectories) {
        if (t.reward) {
          reward_sum += t.reward->total;
          format_sum += t.reward->format_ok ? 1.0 : 0.0;
        }
        token_sum += static_cast<double>(t.token_count);
        ++n_traj;
      }
      groups.push_back(ToyGroupFromRollout(rollout, reference));
    }

    TrainStep rec;
    rec.step = step;
    rec.mean_reward = reward_sum / static_cast<double>(n_traj);
    rec.mean_token_count = token_sum / static_cast<double>(n_traj);
    rec.format_rate = format_sum / static_cast<double>(n_traj);
    rec.objective = ToyGrpoObjective(params, groups, cfg);
    double kl = 0.0;
    std::size_t n_tok = 0;
    for (const ToyGroup& g : groups) {
      for (const ToySequence& s : g) {
        for (std::size_t t = 0; t < s.logp_old.size(); ++t) {
          kl += KlEstimate(s.logp_old[t], s.logp_ref[t]);
          ++n_tok;
        }
      }
    }
    rec.kl_mean = n_tok ? kl / static_cast<double>(n_tok) : 0.0;
    if (!std::isfinite(rec.objective)) {
      throw std::runtime_error(fmt::format(
          "non-finite objective at step {} (mean reward {}, kl {})", step,
          rec.mean_reward, rec.kl_mean));
    }
    log.steps.push_back(rec);

    if (cfg.learning_rate > 0.0) {
      const std::vector<double> grad = GrpoGradient(params, groups, cfg);
      for (std::size_t k = 0; k < params.size(); ++k) {
        params.values()[k] += cfg.learning_rate * grad[k];
      }
    }
  }
  log.final_params = params;
  return log;
}

}  // namespace reljudge
