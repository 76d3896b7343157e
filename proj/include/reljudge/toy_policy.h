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

// A small trainable judge policy with exact log-probabilities and gradients.
//
// The policy answers a turn by picking one item per slot: which intent
// phrasing to emit, which document fragment to extract (or none), and which
// score to give. Each pick is one "token". Logits for a slot are looked up
// by a hashed feature bucket of the query, so the parameters are a table
// of rows indexed by (slot, bucket). A row has `width(slot)` entries; an
// instance whose vocabulary for that slot has k <= width items uses the
// first k entries and ignores the rest.

#ifndef RELJUDGE_TOY_POLICY_H_
#define RELJUDGE_TOY_POLICY_H_

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "reljudge/policy.h"
#include "reljudge/tagparse.h"

namespace reljudge {

enum class Slot : std::size_t { kIntent = 0, kExtract = 1, kScore = 2 };
inline constexpr std::size_t kNumSlots = 3;
std::string_view ToString(Slot slot);

struct ToySchema {
  std::size_t buckets = 64;
  std::array<std::size_t, kNumSlots> widths = {4, 8, 3};

  std::size_t width(Slot slot) const {
    return widths[static_cast<std::size_t>(slot)];
  }
  void Validate() const;
  bool operator==(const ToySchema&) const = default;
};

class ToyPolicyParams {
 public:
  // All-zero logits: the uniform policy.
  explicit ToyPolicyParams(ToySchema schema = {});

  const ToySchema& schema() const { return schema_; }
  std::size_t size() const { return values_.size(); }
  std::size_t RowOffset(Slot slot, std::size_t bucket) const;
  std::span<const double> Row(Slot slot, std::size_t bucket) const;
  std::span<double> Row(Slot slot, std::size_t bucket);

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  nlohmann::json ToJson() const;
  static ToyPolicyParams FromJson(const nlohmann::json& j);

 private:
  ToySchema schema_;
  std::array<std::size_t, kNumSlots> slot_base_{};
  std::vector<double> values_;
};

// Per-instance slot vocabularies.
struct ToyInstance {
  std::size_t bucket = 0;
  std::vector<std::string> intents;
  // Extract vocabulary is {none} followed by these fragments.
  std::vector<std::string> fragments;

  // Vocabulary size under `schema` (vocabularies are truncated to the row
  // width).
  std::size_t VocabSize(Slot slot, const ToySchema& schema) const;
};

std::size_t FeatureBucket(std::string_view query, std::size_t buckets);

// Splits on sentence-final punctuation and newlines; punctuation stays with
// its sentence.
std::vector<std::string> SplitSentences(std::string_view document);

// Builds the vocabularies for a query/document pair: four intent phrasings,
// the document's sentences, and one near-copy of the first sentence whose
// final punctuation differs, so that picking it fails verbatim extraction.
ToyInstance MakeToyInstance(std::string_view query, std::string_view document,
                            const ToySchema& schema);

// One slot pick.
struct ToyAction {
  Slot slot = Slot::kScore;
  std::size_t bucket = 0;
  std::size_t vocab_size = 0;
  std::size_t chosen = 0;
  bool operator==(const ToyAction&) const = default;
};

// Token text "<slot>:<chosen>/<vocab>@<bucket>", e.g. "score:2/3@17".
std::string EncodeToyToken(const ToyAction& action);
ToyAction DecodeToyToken(std::string_view token);

// Log-softmax of a slot row restricted to the first `vocab_size` entries,
// at temperature 1.
std::vector<double> SlotLogProbs(const ToyPolicyParams& params, Slot slot,
                                 std::size_t bucket, std::size_t vocab_size);

struct ToySampleResult {
  CompletionResult completion;
  std::vector<ToyAction> actions;
};

// Samples one turn whose output grammar is `grammar`. Each of the intent,
// extract and score tags present in the grammar is one slot pick; the think
// body is fixed text. Reported log-probabilities are those of the policy
// (temperature 1) for the chosen items. Temperature 0 takes the argmax with
// the lowest index winning ties.
ToySampleResult ToySample(const ToyPolicyParams& params,
                          const ToyInstance& instance,
                          std::span<const Tag> grammar,
                          const SamplingConfig& sampling);

struct ToyLogprobGrad {
  std::vector<double> logprobs;  // one per action
  std::vector<double> gradient;  // d(sum of logprobs)/d(params), flat
};

ToyLogprobGrad ToyLogprobAndGrad(const ToyPolicyParams& params,
                                 std::span<const ToyAction> actions);
std::vector<double> ToyLogprobs(const ToyPolicyParams& params,
                                std::span<const ToyAction> actions);

// Adapts the toy policy to the rollout driver for one instance. The round is
// inferred from the conversation: no assistant turn yet means round one.
class ToyBackend : public CompletionBackend {
 public:
  ToyBackend(std::shared_ptr<const ToyPolicyParams> params,
             ToyInstance instance, Protocol protocol);

  CompletionResult Complete(std::span<const Message> messages,
                            const SamplingConfig& sampling) override;

 private:
  std::shared_ptr<const ToyPolicyParams> params_;
  ToyInstance instance_;
  Protocol protocol_;
};

}  // namespace reljudge

#endif  // RELJUDGE_TOY_POLICY_H_
