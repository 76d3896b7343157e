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

#include "reljudge/toy_policy.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

std::string_view ToString(Slot slot) {
  switch (slot) {
    case Slot::kIntent:
      return "intent";
    case Slot::kExtract:
      return "extract";
    case Slot::kScore:
      return "score";
  }
  return "";
}

namespace {
Slot SlotFromString(std::string_view name) {
  for (Slot s : {Slot::kIntent, Slot::kExtract, Slot::kScore}) {
    if (ToString(s) == name) return s;
  }
  throw InputError(fmt::format("unknown toy slot '{}'", name));
}
}  // namespace

void ToySchema::Validate() const {
  if (buckets == 0) throw InputError("toy schema needs at least one bucket");
  if (width(Slot::kIntent) < 1) throw InputError("intent width must be >= 1");
  // none plus at least one fragment
  if (width(Slot::kExtract) < 2) throw InputError("extract width must be >= 2");
  if (width(Slot::kScore) != 3) throw InputError("score width must be 3");
}

ToyPolicyParams::ToyPolicyParams(ToySchema schema) : schema_(schema) {
  schema_.Validate();
  std::size_t total = 0;
  for (std::size_t s = 0; s < kNumSlots; ++s) {
    slot_base_[s] = total;
    total += schema_.widths[s] * schema_.buckets;
  }
  values_.assign(total, 0.0);
}

std::size_t ToyPolicyParams::RowOffset(Slot slot, std::size_t bucket) const {
  if (bucket >= schema_.buckets) {
    throw InputError(fmt::format("bucket {} out of range", bucket));
  }
  const auto s = static_cast<std::size_t>(slot);
  return slot_base_[s] + bucket * schema_.widths[s];
}

std::span<const double> ToyPolicyParams::Row(Slot slot,
                                             std::size_t bucket) const {
  return {values_.data() + RowOffset(slot, bucket), schema_.width(slot)};
}

std::span<double> ToyPolicyParams::Row(Slot slot, std::size_t bucket) {
  return {values_.data() + RowOffset(slot, bucket), schema_.width(slot)};
}

nlohmann::json ToyPolicyParams::ToJson() const {
  return {{"buckets", schema_.buckets},
          {"widths", schema_.widths},
          {"values", values_}};
}

ToyPolicyParams ToyPolicyParams::FromJson(const nlohmann::json& j) {
  ToySchema schema;
  schema.buckets = j.at("buckets").get<std::size_t>();
  schema.widths = j.at("widths").get<std::array<std::size_t, kNumSlots>>();
  ToyPolicyParams params(schema);
  auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != params.size()) {
    throw InputError("toy params: value count does not match schema");
  }
  params.values_ = std::move(values);
  return params;
}

std::size_t ToyInstance::VocabSize(Slot slot, const ToySchema& schema) const {
  switch (slot) {
    case Slot::kIntent:
      return std::min(intents.size(), schema.width(slot));
    case Slot::kExtract:
      return std::min(fragments.size() + 1, schema.width(slot));
    case Slot::kScore:
      return 3;
  }
  return 0;
}

std::size_t FeatureBucket(std::string_view query, std::size_t buckets) {
  if (buckets == 0) throw InputError("bucket count must be positive");
  return static_cast<std::size_t>(StableHash(query) % buckets);
}

std::vector<std::string> SplitSentences(std::string_view document) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string_view piece = TrimWhitespace(document.substr(start, end - start));
    if (!piece.empty()) out.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < document.size(); ++i) {
    const char c = document[i];
    if (c == '\n') {
      flush(i);
    } else if (c == '.' || c == '!' || c == '?') {
      // Keep runs like "?!" or "..." together.
      std::size_t j = i + 1;
      while (j < document.size() &&
             (document[j] == '.' || document[j] == '!' || document[j] == '?')) {
        ++j;
      }
      flush(j);
      i = j - 1;
    }
  }
  flush(document.size());
  return out;
}

namespace {

// A near-copy of `sentence` that is not a substring of `document`.
std::string NonVerbatimVariant(const std::string& sentence,
                               std::string_view document) {
  std::string variant = sentence;
  const char last = variant.empty() ? '\0' : variant.back();
  if (last == '.' || last == '?') {
    variant.back() = '!';
  } else if (last == '!') {
    variant.back() = '.';
  } else {
    variant += '.';
  }
  while (document.find(variant) != std::string_view::npos) variant += '!';
  return variant;
}

}  // namespace

ToyInstance MakeToyInstance(std::string_view query, std::string_view document,
                            const ToySchema& schema) {
  schema.Validate();
  ToyInstance inst;
  inst.bucket = FeatureBucket(query, schema.buckets);
  const std::string q(TrimWhitespace(query));
  inst.intents = {
      fmt::format("find information about {}", q),
      fmt::format("get recommendations for {}", q),
      fmt::format("compare options for {}", q),
      fmt::format("plan a visit related to {}", q),
  };
  std::vector<std::string> sentences = SplitSentences(document);
  const std::size_t room = schema.width(Slot::kExtract) - 1;  // minus none
  if (!sentences.empty()) {
    std::string distractor = NonVerbatimVariant(sentences.front(), document);
    if (sentences.size() + 1 > room) sentences.resize(room - 1);
    inst.fragments = std::move(sentences);
    inst.fragments.push_back(std::move(distractor));
  }
  return inst;
}

std::string EncodeToyToken(const ToyAction& action) {
  return fmt::format("{}:{}/{}@{}", ToString(action.slot), action.chosen,
                     action.vocab_size, action.bucket);
}

ToyAction DecodeToyToken(std::string_view token) {
  auto bad = [&] {
    return InputError(fmt::format("not a toy policy token: '{}'", token));
  };
  const std::size_t colon = token.find(':');
  const std::size_t slash = token.find('/');
  const std::size_t at = token.find('@');
  if (colon == std::string_view::npos || slash == std::string_view::npos ||
      at == std::string_view::npos || !(colon < slash && slash < at)) {
    throw bad();
  }
  auto number = [&](std::size_t from, std::size_t to) {
    std::size_t v = 0;
    auto [ptr, ec] =
        std::from_chars(token.data() + from, token.data() + to, v);
    if (ec != std::errc() || ptr != token.data() + to || from == to) throw bad();
    return v;
  };
  ToyAction a;
  a.slot = SlotFromString(token.substr(0, colon));
  a.chosen = number(colon + 1, slash);
  a.vocab_size = number(slash + 1, at);
  a.bucket = number(at + 1, token.size());
  if (a.vocab_size == 0 || a.chosen >= a.vocab_size) throw bad();
  return a;
}

std::vector<double> SlotLogProbs(const ToyPolicyParams& params, Slot slot,
                                 std::size_t bucket, std::size_t vocab_size) {
  if (vocab_size == 0) {
    throw InputError(fmt::format("empty vocabulary for slot {}", ToString(slot)));
  }
  if (vocab_size > params.schema().width(slot)) {
    throw InputError(fmt::format("vocabulary of {} exceeds slot width {}",
                                 vocab_size, params.schema().width(slot)));
  }
  auto row = params.Row(slot, bucket).first(vocab_size);
  const double max = *std::max_element(row.begin(), row.end());
  double sum = 0.0;
  for (double z : row) sum += std::exp(z - max);
  const double log_norm = max + std::log(sum);
  std::vector<double> out(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) out[i] = row[i] - log_norm;
  return out;
}

namespace {

std::size_t PickIndex(std::span<const double> logprobs, double temperature,
                      Rng& rng) {
  if (temperature == 0.0) {
    return static_cast<std::size_t>(
        std::max_element(logprobs.begin(), logprobs.end()) - logprobs.begin());
  }
  const double max = *std::max_element(logprobs.begin(), logprobs.end());
  std::vector<double> weights(logprobs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logprobs.size(); ++i) {
    weights[i] = std::exp((logprobs[i] - max) / temperature);
    total += weights[i];
  }
  double u = rng.Uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

}  // namespace

ToySampleResult ToySample(const ToyPolicyParams& params,
                          const ToyInstance& instance,
                          std::span<const Tag> grammar,
                          const SamplingConfig& sampling) {
  sampling.Validate();
  std::string stream_key;
  for (Tag t : grammar) stream_key += TagName(t);
  Rng rng(sampling.seed, StableHash(stream_key));

  ToySampleResult result;
  TurnFields fields;
  fields.think = fmt::format("features in bucket {}", instance.bucket);
  std::vector<TokenLogprob> tokens;

  auto pick = [&](Slot slot) {
    const std::size_t vocab = instance.VocabSize(slot, params.schema());
    const auto logprobs = SlotLogProbs(params, slot, instance.bucket, vocab);
    const std::size_t chosen = PickIndex(logprobs, sampling.temperature, rng);
    ToyAction action{slot, instance.bucket, vocab, chosen};
    tokens.push_back(TokenLogprob{EncodeToyToken(action), logprobs[chosen]});
    result.actions.push_back(action);
    return chosen;
  };

  for (Tag tag : grammar) {
    switch (tag) {
      case Tag::kThink:
        break;
      case Tag::kIntent:
        fields.intent = instance.intents[pick(Slot::kIntent)];
        break;
      case Tag::kExtract: {
        const std::size_t c = pick(Slot::kExtract);
        fields.extract = c == 0 ? Extraction::None()
                                : Extraction::Fragment(instance.fragments[c - 1]);
        break;
      }
      case Tag::kScore:
        fields.score = static_cast<int>(pick(Slot::kScore));
        break;
    }
  }
  result.completion.text = RenderTurn(fields, grammar);
  result.completion.token_count = tokens.size();
  result.completion.token_logprobs = std::move(tokens);
  return result;
}

ToyLogprobGrad ToyLogprobAndGrad(const ToyPolicyParams& params,
                                 std::span<const ToyAction> actions) {
  ToyLogprobGrad out;
  out.gradient.assign(params.size(), 0.0);
  out.logprobs.reserve(actions.size());
  for (const ToyAction& a : actions) {
    const auto logprobs =
        SlotLogProbs(params, a.slot, a.bucket, a.vocab_size);
    if (a.chosen >= a.vocab_size) {
      throw InputError(fmt::format("chosen index {} outside vocabulary of {}",
                                   a.chosen, a.vocab_size));
    }
    out.logprobs.push_back(logprobs[a.chosen]);
    const std::size_t offset = params.RowOffset(a.slot, a.bucket);
    for (std::size_t i = 0; i < a.vocab_size; ++i) {
      out.gradient[offset + i] +=
          (i == a.chosen ? 1.0 : 0.0) - std::exp(logprobs[i]);
    }
  }
  return out;
}

std::vector<double> ToyLogprobs(const ToyPolicyParams& params,
                                std::span<const ToyAction> actions) {
  std::vector<double> out;
  out.reserve(actions.size());
  for (const ToyAction& a : actions) {
    if (a.chosen >= a.vocab_size) {
      throw InputError(fmt::format("chosen index {} outside vocabulary of {}",
                                   a.chosen, a.vocab_size));
    }
    out.push_back(
        SlotLogProbs(params, a.slot, a.bucket, a.vocab_size)[a.chosen]);
  }
  return out;
}

ToyBackend::ToyBackend(std::shared_ptr<const ToyPolicyParams> params,
                       ToyInstance instance, Protocol protocol)
    : params_(std::move(params)),
      instance_(std::move(instance)),
      protocol_(protocol) {
  if (!params_) throw InputError("ToyBackend needs parameters");
}

CompletionResult ToyBackend::Complete(std::span<const Message> messages,
                                      const SamplingConfig& sampling) {
  const bool first_round =
      std::none_of(messages.begin(), messages.end(),
                   [](const Message& m) { return m.role == Role::kAssistant; });
  const std::vector<Tag> grammar =
      first_round ? Round1Grammar(protocol_) : Round2Grammar(protocol_);
  return ToySample(*params_, instance_, grammar, sampling).completion;
}

}  // namespace reljudge
