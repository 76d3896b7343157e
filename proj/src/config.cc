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

#include <charconv>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

namespace {

[[noreturn]] void BadValue(std::string_view key, std::string_view value,
                           std::string_view expected) {
  throw InputError(fmt::format("config key '{}': cannot parse '{}' as {}", key,
                               value, expected));
}

double ParseDouble(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) BadValue(key, v, "a number");
  return out;
}

template <typename Int>
Int ParseInt(std::string_view key, std::string_view v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    BadValue(key, v, "an integer");
  }
  return out;
}

bool ParseBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  BadValue(key, v, "a boolean");
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T>
Field Num(T RunConfig::*member) {
  return {[member](RunConfig& c, std::string_view k, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.*member = ParseDouble(k, v);
            } else {
              c.*member = ParseInt<T>(k, v);
            }
          },
          [member](const RunConfig& c) { return fmt::format("{}", c.*member); }};
}

template <typename Getter>
Field NumAt(Getter ref) {
  using T = std::remove_reference_t<decltype(ref(std::declval<RunConfig&>()))>;
  return {[ref](RunConfig& c, std::string_view k, std::string_view v) {
            if constexpr (std::is_floating_point_v<T>) {
              ref(c) = ParseDouble(k, v);
            } else {
              ref(c) = ParseInt<T>(k, v);
            }
          },
          [ref](const RunConfig& c) {
            return fmt::format("{}", ref(const_cast<RunConfig&>(c)));
          }};
}

template <typename Getter>
Field BoolAt(Getter ref) {
  return {[ref](RunConfig& c, std::string_view k, std::string_view v) {
            ref(c) = ParseBool(k, v);
          },
          [ref](const RunConfig& c) {
            return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

template <typename Getter>
Field StrAt(Getter ref) {
  return {[ref](RunConfig& c, std::string_view, std::string_view v) {
            ref(c) = std::string(v);
          },
          [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }};
}

Field Millis(std::chrono::milliseconds& (*ref)(RunConfig&)) {
  return {[ref](RunConfig& c, std::string_view k, std::string_view v) {
            ref(c) = std::chrono::milliseconds(ParseInt<long long>(k, v));
          },
          [ref](const RunConfig& c) {
            return fmt::format("{}", ref(const_cast<RunConfig&>(c)).count());
          }};
}

const std::vector<std::pair<std::string, Field>>& Fields() {
  static const auto* fields = new std::vector<std::pair<std::string, Field>>{
      {"backend.base_url", StrAt([](RunConfig& c) -> std::string& { return c.backend.base_url; })},
      {"backend.model", StrAt([](RunConfig& c) -> std::string& { return c.backend.model; })},
      {"backend.api_key_env", StrAt([](RunConfig& c) -> std::string& { return c.backend.api_key_env; })},
      {"backend.timeout_ms", Millis([](RunConfig& c) -> std::chrono::milliseconds& { return c.backend.timeout; })},
      {"backend.max_in_flight", NumAt([](RunConfig& c) -> int& { return c.backend.max_in_flight; })},
      {"backend.request_logprobs", BoolAt([](RunConfig& c) -> bool& { return c.backend.request_logprobs; })},
      {"backend.retry.max_attempts", NumAt([](RunConfig& c) -> int& { return c.backend.retry.max_attempts; })},
      {"backend.retry.initial_backoff_ms", Millis([](RunConfig& c) -> std::chrono::milliseconds& { return c.backend.retry.initial_backoff; })},
      {"backend.retry.multiplier", NumAt([](RunConfig& c) -> double& { return c.backend.retry.multiplier; })},
      {"backend.retry.max_backoff_ms", Millis([](RunConfig& c) -> std::chrono::milliseconds& { return c.backend.retry.max_backoff; })},
      {"backend.retry.jitter", NumAt([](RunConfig& c) -> double& { return c.backend.retry.jitter; })},

      {"grpo.epsilon", NumAt([](RunConfig& c) -> double& { return c.grpo.epsilon; })},
      {"grpo.beta", NumAt([](RunConfig& c) -> double& { return c.grpo.beta; })},
      {"grpo.group_size", NumAt([](RunConfig& c) -> std::size_t& { return c.grpo.group_size; })},
      {"grpo.learning_rate", NumAt([](RunConfig& c) -> double& { return c.grpo.learning_rate; })},
      {"grpo.batch_size", NumAt([](RunConfig& c) -> std::size_t& { return c.grpo.batch_size; })},
      {"grpo.steps", NumAt([](RunConfig& c) -> std::size_t& { return c.grpo.steps; })},
      {"grpo.reference",
       {[](RunConfig& c, std::string_view k, std::string_view v) {
          if (v == "initial") {
            c.grpo.reference = ReferencePolicy::kInitial;
          } else if (v == "fixed-file") {
            c.grpo.reference = ReferencePolicy::kFixedFile;
          } else {
            BadValue(k, v, "'initial' or 'fixed-file'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.grpo.reference == ReferencePolicy::kInitial
                                 ? "initial"
                                 : "fixed-file");
        }}},
      {"grpo.reference_file", StrAt([](RunConfig& c) -> std::string& { return c.grpo.reference_file; })},

      {"reward.lambda", NumAt([](RunConfig& c) -> double& { return c.reward.lambda; })},
      {"reward.require_extract_consistency", BoolAt([](RunConfig& c) -> bool& { return c.reward.require_extract_consistency; })},

      {"rollout.protocol",
       {[](RunConfig& c, std::string_view k, std::string_view v) {
          try {
            c.protocol = ProtocolFromString(v);
          } catch (const InputError&) {
            BadValue(k, v, "two-round, no-intent, no-extract or single-round");
          }
        },
        [](const RunConfig& c) { return std::string(ToString(c.protocol)); }}},
      {"rollout.use_aux_docs", BoolAt([](RunConfig& c) -> bool& { return c.use_aux_docs; })},
      {"rollout.parallelism", Num(&RunConfig::parallelism)},
      {"rollout.templates_file", StrAt([](RunConfig& c) -> std::string& { return c.templates_file; })},
      {"sampling.temperature", Num(&RunConfig::temperature)},
      {"sampling.max_tokens", Num(&RunConfig::max_tokens)},

      {"train.init",
       {[](RunConfig& c, std::string_view k, std::string_view v) {
          if (v == "zero") {
            c.init = InitMode::kZero;
          } else if (v == "cold-start") {
            c.init = InitMode::kColdStart;
          } else {
            BadValue(k, v, "'zero' or 'cold-start'");
          }
        },
        [](const RunConfig& c) {
          return std::string(c.init == InitMode::kZero ? "zero" : "cold-start");
        }}},
      {"cold_start.teacher_accuracy", NumAt([](RunConfig& c) -> double& { return c.cold_start.teacher_accuracy; })},
      {"cold_start.sft_steps", NumAt([](RunConfig& c) -> std::size_t& { return c.cold_start.sft_steps; })},
      {"cold_start.sft_learning_rate", NumAt([](RunConfig& c) -> double& { return c.cold_start.sft_learning_rate; })},
      {"toy.pairs", Num(&RunConfig::toy_pairs)},
      {"toy.buckets", Num(&RunConfig::toy_buckets)},

      {"citation.forwards", NumAt([](RunConfig& c) -> int& { return c.citation.forwards_required; })},
      {"citation.threshold", NumAt([](RunConfig& c) -> int& { return c.citation.citation_threshold; })},
      {"dataset.random_negatives", Num(&RunConfig::random_negatives)},
      {"dataset.balance", BoolAt([](RunConfig& c) -> bool& { return c.balance; })},
      {"dataset.train_size", Num(&RunConfig::train_size)},
      {"dataset.max_aux_docs", Num(&RunConfig::max_aux_docs)},
      {"agreement.gate",
       {[](RunConfig& c, std::string_view k, std::string_view v) {
          // empty means unset, so DumpConfig output reads back
          if (v.empty()) {
            c.agreement_gate.reset();
          } else {
            c.agreement_gate = ParseDouble(k, v);
          }
        },
        [](const RunConfig& c) {
          return c.agreement_gate ? fmt::format("{}", *c.agreement_gate)
                                  : std::string();
        }}},

      {"eval.requery_window", Num(&RunConfig::requery_window)},

      {"seed", Num(&RunConfig::seed)},
      {"output_dir", StrAt([](RunConfig& c) -> std::string& { return c.output_dir; })},
  };
  return *fields;
}

const Field* FindField(std::string_view key) {
  for (const auto& [name, field] : Fields()) {
    if (name == key) return &field;
  }
  return nullptr;
}

// Runs a module validator and prefixes its message with the key family.
template <typename F>
void Check(std::string_view family, F&& f) {
  try {
    f();
  } catch (const InputError& e) {
    throw InputError(fmt::format("[{}] {}", family, e.what()));
  }
}

}  // namespace

void RunConfig::Validate() const {
  Check("backend", [&] { backend.Validate(); });
  Check("grpo", [&] { grpo.Validate(); });
  Check("reward", [&] { reward.Validate(); });
  Check("sampling", [&] {
    SamplingConfig s;
    s.temperature = temperature;
    s.max_tokens = max_tokens;
    s.Validate();
  });
  if (parallelism < 1) {
    throw InputError(fmt::format("rollout.parallelism must be >= 1 (got {})",
                                 parallelism));
  }
  if (!(cold_start.teacher_accuracy >= 0.0 && cold_start.teacher_accuracy <= 1.0)) {
    throw InputError("cold_start.teacher_accuracy must be in [0, 1]");
  }
  if (!(cold_start.sft_learning_rate >= 0.0)) {
    throw InputError("cold_start.sft_learning_rate must be >= 0");
  }
  if (toy_buckets < 1) throw InputError("toy.buckets must be >= 1");
  if (toy_pairs < 1 || toy_pairs > toy_buckets) {
    throw InputError(fmt::format("toy.pairs must be in [1, toy.buckets={}] (got {})",
                                 toy_buckets, toy_pairs));
  }
  if (agreement_gate && !(*agreement_gate >= 0.0 && *agreement_gate <= 1.0)) {
    throw InputError("agreement.gate must be in [0, 1]");
  }
  if (!(requery_window > 0.0)) {
    throw InputError("eval.requery_window must be > 0");
  }
  if (output_dir.empty()) throw InputError("output_dir must not be empty");
}

RolloutOptions RunConfig::Rollout() const {
  RolloutOptions o;
  o.protocol = protocol;
  o.use_aux_docs = use_aux_docs;
  o.reward = reward;
  o.parallelism = parallelism;
  if (!templates_file.empty()) {
    o.templates = LoadTemplateOverrides(templates_file, DefaultTemplates(protocol));
  }
  return o;
}

std::vector<std::string> PresetNames() {
  return {"toy-default", "large-model"};
}

RunConfig Preset(std::string_view name) {
  RunConfig c;
  if (name == "toy-default") {
    c.grpo = ToyDefaultPreset();
    return c;
  }
  if (name == "large-model") {
    c.grpo = LargeModelPreset();
    c.reward.lambda = 0.0;
    return c;
  }
  throw InputError(fmt::format("unknown preset '{}' (expected toy-default or "
                               "large-model)",
                               name));
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& [name, field] : Fields()) keys.push_back(name);
  return keys;
}

void ApplySetting(RunConfig& config, std::string_view key,
                  std::string_view value) {
  const Field* f = FindField(key);
  if (!f) throw InputError(fmt::format("unknown config key '{}'", key));
  f->set(config, key, value);
}

void ApplyConfigText(RunConfig& config, std::string_view text,
                     std::string_view source) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = TrimWhitespace(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InputError(fmt::format("{}:{}: expected 'key = value'", source,
                                   line_no));
    }
    try {
      ApplySetting(config, TrimWhitespace(line.substr(0, eq)),
                   TrimWhitespace(line.substr(eq + 1)));
    } catch (const InputError& e) {
      throw InputError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
}

void ApplyOverride(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InputError(fmt::format("--set expects key=value (got '{}')",
                                 assignment));
  }
  ApplySetting(config, TrimWhitespace(assignment.substr(0, eq)),
               TrimWhitespace(assignment.substr(eq + 1)));
}

RunConfig LoadRunConfig(std::string_view preset,
                        const std::optional<std::filesystem::path>& file,
                        std::span<const std::string> overrides) {
  RunConfig c = Preset(preset);
  if (file) ApplyConfigText(c, ReadFile(*file), file->string());
  for (const std::string& o : overrides) ApplyOverride(c, o);
  c.Validate();
  return c;
}

std::string DumpConfig(const RunConfig& config) {
  std::string out;
  for (const auto& [name, field] : Fields()) {
    out += fmt::format("{} = {}\n", name, field.get(config));
  }
  return out;
}

}  // namespace reljudge
