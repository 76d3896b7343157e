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

// Synthetic labeled task for the toy policy. Each query lands in its own
// feature bucket and its gold label is a fixed function of that bucket, so a
// policy conditioned on the bucket can learn it exactly.

#ifndef RELJUDGE_TOY_ENV_H_
#define RELJUDGE_TOY_ENV_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "reljudge/grpo.h"
#include "reljudge/toy_policy.h"
#include "reljudge/types.h"

namespace reljudge {

int SyntheticGold(std::size_t bucket);

// `count` pairs with distinct buckets (count <= schema.buckets). Documents
// have two or three sentences; every pair has one auxiliary document.
std::vector<QueryDocPair> MakeSyntheticPairs(std::size_t count,
                                             const ToySchema& schema,
                                             std::uint64_t seed);

// A random gradient-check problem: groups rolled out from a random policy
// theta_old on synthetic pairs, scored by the real reward, and a current
// policy `params` = theta_old + noise so that ratios differ from 1.
struct GradientInstance {
  ToyPolicyParams params;
  std::vector<ToyGroup> groups;
};

GradientInstance RandomGradientInstance(std::uint64_t seed,
                                        std::size_t num_groups = 3,
                                        std::size_t group_size = 8,
                                        double noise = 0.3);

}  // namespace reljudge

#endif  // RELJUDGE_TOY_ENV_H_
