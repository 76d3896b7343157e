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

#include "reljudge/toy_env.h"

#include <array>
#include <set>
#include <string>

#include <fmt/format.h>

#include "reljudge/rollout.h"
#include "reljudge/util.h"

namespace reljudge {

namespace {

constexpr std::array<std::string_view, 12> kPlaces = {
    "Shibuya", "Ueno",    "Hakone", "Niseko", "Kyoto",   "Nara",
    "Sapporo", "Okinawa", "Kobe",   "Nikko",  "Kamakura", "Fukuoka"};
constexpr std::array<std::string_view, 8> kTopics = {
    "ramen", "ski resorts", "hot springs", "night markets",
    "temples", "hiking trails", "street food", "museums"};
constexpr std::array<std::string_view, 6> kOpeners = {
    "We spent a weekend near {} looking for {}.",
    "Honest notes on {} and its {}.",
    "My third trip to {} was all about {}.",
    "A quick guide to {} for people who love {}.",
    "Locals in {} keep recommending the {}.",
    "Rainy day in {}, so we tried the {}."};
constexpr std::array<std::string_view, 6> kFillers = {
    "Prices were fair and the staff were friendly.",
    "Go early because the queues get long by noon!",
    "The train ride there takes about forty minutes.",
    "Bring cash, since some places do not take cards.",
    "We would happily go back next winter.",
    "Parking was hard to find on weekends?"};

}  // namespace

int SyntheticGold(std::size_t bucket) {
  return static_cast<int>(StableHash(fmt::format("gold/{}", bucket)) %
                          static_cast<std::uint64_t>(kNumLabels));
}

std::vector<QueryDocPair> MakeSyntheticPairs(std::size_t count,
                                             const ToySchema& schema,
                                             std::uint64_t seed) {
  schema.Validate();
  if (count > schema.buckets) {
    throw InputError(fmt::format(
        "synthetic task: {} pairs need at least as many buckets (have {})",
        count, schema.buckets));
  }
  Rng rng(seed, 0x73796e74ULL);
  std::set<std::size_t> used;
  std::vector<QueryDocPair> pairs;
  std::size_t attempt = 0;
  while (pairs.size() < count) {
    const auto place = kPlaces[rng.Below(kPlaces.size())];
    const auto topic = kTopics[rng.Below(kTopics.size())];
    std::string query = fmt::format("{} {} #{}", topic, place, attempt++);
    const std::size_t bucket = FeatureBucket(query, schema.buckets);
    if (!used.insert(bucket).second) continue;

    std::string doc = fmt::format(
        fmt::runtime(kOpeners[rng.Below(kOpeners.size())]), place, topic);
    const std::size_t extra = 1 + rng.Below(2);
    for (std::size_t k = 0; k < extra; ++k) {
      doc += ' ';
      doc += kFillers[rng.Below(kFillers.size())];
    }

    QueryDocPair p;
    p.id = fmt::format("syn-{:03}", pairs.size());
    p.query = std::move(query);
    p.aux_docs = {fmt::format("Top rated {} around {}.", topic, place)};
    p.candidate = std::move(doc);
    p.gold = SyntheticGold(bucket);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

GradientInstance RandomGradientInstance(std::uint64_t seed,
                                        std::size_t num_groups,
                                        std::size_t group_size, double noise) {
  ToySchema schema;
  schema.buckets = 16;
  Rng rng(seed, 0x67726164ULL);
  auto theta_old = std::make_shared<ToyPolicyParams>(schema);
  for (double& v : theta_old->values()) v = rng.Normal();
  ToyPolicyParams reference(schema);
  for (double& v : reference.values()) v = 0.5 * rng.Normal();

  const auto pairs = MakeSyntheticPairs(num_groups, schema, seed);
  SamplingConfig sampling;
  GradientInstance out{*theta_old, {}};
  for (std::size_t g = 0; g < pairs.size(); ++g) {
    ToyBackend backend(theta_old, MakeToyInstance(pairs[g].query,
                                                  pairs[g].candidate, schema),
                       Protocol::kTwoRound);
    const auto seeds = GroupSeeds(rng.NextU64(), group_size);
    const GroupRollout rollout = RunGroup(pairs[g], backend, seeds, sampling);
    out.groups.push_back(ToyGroupFromRollout(rollout, reference));
  }
  for (double& v : out.params.values()) v += noise * rng.Normal();
  return out;
}

}  // namespace reljudge
