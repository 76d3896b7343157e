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

// Run configuration: a named preset, then a key=value file, then --set
// overrides, later sources winning.
//
//   # comment
//   grpo.epsilon = 0.2
//   reward.lambda = 0.1

#ifndef RELJUDGE_CONFIG_H_
#define RELJUDGE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reljudge/dataset.h"
#include "reljudge/eval.h"
#include "reljudge/grpo.h"
#include "reljudge/http_backend.h"
#include "reljudge/reward.h"
#include "reljudge/rollout.h"

namespace reljudge {

struct RunConfig {
  HttpBackendConfig backend;
  GrpoConfig grpo;
  RewardConfig reward;

  Protocol protocol = Protocol::kTwoRound;
  bool use_aux_docs = true;
  int parallelism = 1;
  std::string templates_file;  // locale override, empty for the defaults
  double temperature = 1.0;
  int max_tokens = 1024;

  InitMode init = InitMode::kZero;
  ColdStartConfig cold_start;
  std::size_t toy_pairs = 24;
  std::size_t toy_buckets = 64;

  // Citation values have no default and must be configured for
  // build-dataset.
  CitationConfig citation;
  std::size_t random_negatives = 0;
  bool balance = true;
  std::size_t train_size = 5000;
  std::size_t max_aux_docs = 3;
  std::optional<double> agreement_gate;

  double requery_window = kDefaultRequeryWindow;

  std::uint64_t seed = 0;
  std::string output_dir = "out";

  // Checks every numeric field; throws InputError naming the key.
  void Validate() const;
  RolloutOptions Rollout() const;
};

std::vector<std::string> PresetNames();
// "toy-default" or "large-model".
RunConfig Preset(std::string_view name);

std::vector<std::string> ConfigKeys();
// Throws InputError for unknown keys or unparseable values.
void ApplySetting(RunConfig& config, std::string_view key,
                  std::string_view value);
// Applies every "key = value" line of `text`.
void ApplyConfigText(RunConfig& config, std::string_view text,
                     std::string_view source = "config");
// "key=value" for a --set flag.
void ApplyOverride(RunConfig& config, std::string_view assignment);

// Preset, then file (if any), then overrides; validated.
RunConfig LoadRunConfig(std::string_view preset,
                        const std::optional<std::filesystem::path>& file,
                        std::span<const std::string> overrides);

// Every key with its current value, one per line, in ConfigKeys() order.
std::string DumpConfig(const RunConfig& config);

}  // namespace reljudge

#endif  // RELJUDGE_CONFIG_H_
