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

#include "reljudge/rollout.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

PromptTemplates RolloutOptions::ResolvedTemplates() const {
  return templates ? *templates : DefaultTemplates(protocol);
}

namespace {

void AppendTokens(Trajectory& t, const CompletionResult& r) {
  t.token_count += r.token_count;
  if (!t.tokens_old) return;
  if (!r.token_logprobs) {
    t.tokens_old.reset();
    return;
  }
  t.tokens_old->insert(t.tokens_old->end(), r.token_logprobs->begin(),
                       r.token_logprobs->end());
}

}  // namespace

Trajectory RunTrajectory(const QueryDocPair& pair, CompletionBackend& backend,
                         const SamplingConfig& sampling,
                         const RolloutOptions& options) {
  pair.Validate();
  const PromptTemplates templates = options.ResolvedTemplates();
  const std::vector<std::string> no_docs;
  std::span<const std::string> docs =
      options.use_aux_docs ? std::span<const std::string>(pair.aux_docs)
                           : std::span<const std::string>(no_docs);

  Trajectory t;
  t.pair_id = pair.id;
  t.seed = sampling.seed;
  t.protocol = options.protocol;
  t.candidate = pair.candidate;
  t.gold = pair.gold;
  t.tokens_old.emplace();

  try {
    if (options.protocol == Protocol::kSingleRound) {
      t.round1_messages =
          RenderSingleRoundPrompt(pair.query, docs, pair.candidate, templates);
      CompletionResult r1 = backend.Complete(t.round1_messages, sampling);
      t.round1_raw = r1.text;
      AppendTokens(t, r1);
    } else {
      t.round1_messages = RenderRound1Prompt(pair.query, docs, templates);
      CompletionResult r1 = backend.Complete(t.round1_messages, sampling);
      t.round1_raw = r1.text;
      AppendTokens(t, r1);

      std::vector<Message> prior = t.round1_messages;
      prior.push_back(Message{Role::kAssistant, r1.text});
      t.round2_messages = RenderRound2Messages(prior, pair.candidate, templates);
      CompletionResult r2 = backend.Complete(t.round2_messages, sampling);
      t.round2_raw = r2.text;
      AppendTokens(t, r2);
    }
  } catch (const BackendError& e) {
    t.error = fmt::format("{}: {}", ToString(e.kind()), e.what());
    t.tokens_old.reset();
    return t;
  }

  if (t.gold) t.reward = TotalReward(t, t.gold, options.reward);
  return t;
}

std::vector<std::uint64_t> GroupSeeds(std::uint64_t base_seed,
                                      std::size_t count) {
  // splitmix64 is a bijection, so distinct inputs give distinct seeds.
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint64_t z = base_seed + (i + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    seeds[i] = z ^ (z >> 31);
  }
  return seeds;
}

GroupRollout RunGroup(const QueryDocPair& pair, CompletionBackend& backend,
                      std::span<const std::uint64_t> seeds,
                      const SamplingConfig& sampling,
                      const RolloutOptions& options) {
  if (seeds.size() < 2) {
    throw InputError(fmt::format("group size must be >= 2 (got {})",
                                 seeds.size()));
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() !=
      seeds.size()) {
    throw InputError("group seeds must be distinct");
  }

  GroupRollout group;
  group.pair_id = pair.id;
  group.trajectories.resize(seeds.size());

  auto run_one = [&](std::size_t i) {
    SamplingConfig s = sampling;
    s.seed = seeds[i];
    group.trajectories[i] = RunTrajectory(pair, backend, s, options);
  };

  const std::size_t workers = std::min<std::size_t>(
      seeds.size(), static_cast<std::size_t>(std::max(1, options.parallelism)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mu;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < seeds.size(); i = next++) {
            try {
              run_one(i);
            } catch (...) {
              std::lock_guard lock(error_mu);
              if (!first_error) first_error = std::current_exception();
            }
          }
        });
      }
    }
    if (first_error) std::rethrow_exception(first_error);
  }

  const auto failed = std::count_if(
      group.trajectories.begin(), group.trajectories.end(),
      [](const Trajectory& t) { return t.failed(); });
  group.usable = static_cast<std::size_t>(failed) * 2 <= seeds.size();
  return group;
}

void AppendTrajectories(const std::filesystem::path& path,
                        std::span<const Trajectory> trajectories) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (const Trajectory& t : trajectories) out << ToJson(t).dump() << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<Trajectory> ReadTrajectories(const std::filesystem::path& path) {
  std::vector<Trajectory> out;
  std::size_t line_no = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_no;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw InputError(fmt::format("{}:{}: invalid JSON", path.string(),
                                   line_no));
    }
    out.push_back(TrajectoryFromJson(j));
  }
  return out;
}

std::vector<QueryDocPair> ReadPairs(const std::filesystem::path& path) {
  std::vector<QueryDocPair> out;
  std::size_t line_no = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_no;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw InputError(fmt::format("{}:{}: invalid JSON", path.string(),
                                   line_no));
    }
    out.push_back(QueryDocPairFromJson(j));
  }
  return out;
}

}  // namespace reljudge
