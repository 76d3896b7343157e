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

// Acceptance checks. One PASS/FAIL line per criterion; exit status is the
// number of failures (capped at 1 for ctest).
//
// Every expected value is recomputed here from first principles rather than
// taken from library helpers, except where the criterion is about matching a
// library helper against an oracle.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "reljudge/dataset.h"
#include "reljudge/eval.h"
#include "reljudge/grpo.h"
#include "reljudge/prompts.h"
#include "reljudge/reward.h"
#include "reljudge/tagparse.h"
#include "reljudge/toy_env.h"
#include "reljudge/util.h"
#include "synthetic_log.h"

namespace reljudge {
namespace {

// Pinned tolerances and budgets.
constexpr double kAdvTol = 1e-9;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-5;
// Gradient coordinates smaller than this in both analytic and numeric form
// are compared absolutely; central differences cannot resolve them.
constexpr double kGradFloor = 1e-6;  // same floor as FiniteDiffCheck
constexpr double kAucTol = 1e-12;
constexpr double kTargetReward = 0.9;
constexpr double kCrossReward = 0.8;
constexpr std::size_t kLastWindow = 20;

struct Outcome {
  bool pass = true;
  std::string detail;
  void Fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

// --- 1: reward table ---

Trajectory MakeTrajectory(const std::string& r1, const std::string& r2,
                          const std::string& doc) {
  Trajectory t;
  t.protocol = Protocol::kTwoRound;
  t.candidate = doc;
  t.round1_raw = r1;
  t.round2_raw = r2;
  return t;
}

Outcome RewardTable() {
  Outcome o;
  const std::string doc = "Lifts open at nine. Rental desk closes at five.";
  const std::string r1 = "<think>t</think><intent>opening hours</intent>";
  for (double lambda : {0.0, 0.1, 0.2, 0.5}) {
    RewardConfig rc;
    rc.lambda = lambda;
    for (int pred = 0; pred < 3; ++pred) {
      for (int gold = 0; gold < 3; ++gold) {
        const double want = pred == gold ? 1.0 : (std::abs(pred - gold) == 1 ? lambda : 0.0);
        const std::string r2 = fmt::format(
            "<think>x</think><extract>Lifts open at nine.</extract><score>{}</score>", pred);
        const RewardBreakdown b = TotalReward(MakeTrajectory(r1, r2, doc), gold, rc);
        if (!b.format_ok || b.total != want) {
          o.Fail(fmt::format("pred {} gold {} lambda {}: got {}", pred, gold, lambda, b.total));
        }
      }
    }
    const std::string good2 = "<think>x</think><extract>none</extract><score>1</score>";
    const std::vector<std::pair<std::string, std::string>> broken = {
        {"<think>t</think>", good2},                                   // no intent
        {r1, "<think>x</think><score>1</score><extract>none</extract>"},  // order
        {r1, "<think>x</think><extract>Lifts open at 9.</extract><score>1</score>"},
    };
    for (const auto& [a, b] : broken) {
      const RewardBreakdown rb = TotalReward(MakeTrajectory(a, b, doc), 1, rc);
      if (rb.format_ok || rb.total != 0.0) o.Fail("format gate let a broken case through");
    }
  }
  return o;
}

// --- 2: advantages ---

Outcome AdvantageProperties() {
  Outcome o;
  Rng rng(2024);
  for (int g = 0; g < 1000; ++g) {
    const std::size_t n = 2 + rng.Below(63);
    std::vector<double> r(n);
    const bool flat = g % 10 == 0;
    const double base = rng.Uniform();
    for (double& v : r) v = flat ? base : (rng.Below(3) == 0 ? rng.Uniform() : double(rng.Below(2)));
    double mean = 0;
    for (double v : r) mean += v;
    mean /= n;
    double var = 0;
    for (double v : r) var += (v - mean) * (v - mean);
    const double sigma = std::sqrt(var / n);
    const AdvantageStats s = StandardizeAdvantages(r);
    if (sigma == 0.0 || flat) {
      for (double a : s.advantages) {
        if (a != 0.0) o.Fail(fmt::format("group {}: zero-variance advantage {}", g, a));
      }
      continue;
    }
    double am = 0, av = 0;
    for (double a : s.advantages) am += a;
    am /= n;
    for (double a : s.advantages) av += (a - am) * (a - am);
    const double astd = std::sqrt(av / n);
    if (std::abs(am) > kAdvTol) o.Fail(fmt::format("group {}: mean {}", g, am));
    if (std::abs(astd - 1.0) > kAdvTol) o.Fail(fmt::format("group {}: std {}", g, astd));
    const double scale = 0.5 + 3 * rng.Uniform();
    const double shift = 4 * rng.Uniform() - 2;
    std::vector<double> r2(n);
    for (std::size_t i = 0; i < n; ++i) r2[i] = scale * r[i] + shift;
    const AdvantageStats s2 = StandardizeAdvantages(r2);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(s2.advantages[i] - s.advantages[i]) > kAdvTol) {
        o.Fail(fmt::format("group {}: affine invariance off at {}", g, i));
      }
    }
  }
  return o;
}

// --- 3: gradient fidelity ---

// Written from the definition, sharing nothing with the library objective.
double OracleObjective(const ToyPolicyParams& p, const std::vector<ToyGroup>& groups,
                       double eps, double beta) {
  double total = 0;
  for (const ToyGroup& g : groups) {
    const double n = static_cast<double>(g.size());
    double mu = 0;
    for (const auto& s : g) mu += s.reward;
    mu /= n;
    double var = 0;
    for (const auto& s : g) var += (s.reward - mu) * (s.reward - mu);
    const double sd = std::sqrt(var / n);
    double group_sum = 0;
    for (const ToySequence& s : g) {
      const double adv = sd > 1e-12 * std::max(1.0, std::abs(mu)) ? (s.reward - mu) / sd : 0.0;
      if (s.actions.empty()) continue;
      double seq = 0;
      for (std::size_t t = 0; t < s.actions.size(); ++t) {
        const ToyAction& a = s.actions[t];
        auto row = p.Row(a.slot, a.bucket);
        double lse = 0;
        for (std::size_t k = 0; k < a.vocab_size; ++k) lse += std::exp(row[k]);
        const double lp = row[a.chosen] - std::log(lse);
        const double ratio = std::exp(lp - s.logp_old[t]);
        const double clipped = std::min(std::max(ratio, 1 - eps), 1 + eps);
        const double surr = std::min(ratio * adv, clipped * adv);
        const double x = std::exp(s.logp_ref[t] - lp);
        seq += surr - beta * (x - std::log(x) - 1);
      }
      group_sum += seq / s.actions.size();
    }
    total += group_sum / n;
  }
  return total / groups.size();
}

Outcome GradientFidelity() {
  Outcome o;
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    GradientInstance inst = RandomGradientInstance(1000 + seed);
    for (double beta : {0.0, 1.0}) {
      GrpoConfig c;
      c.epsilon = 0.2;
      c.beta = beta;
      const std::vector<double> grad = GrpoGradient(inst.params, inst.groups, c);
      std::vector<bool> touched(inst.params.size(), false);
      for (const auto& g : inst.groups) {
        for (const auto& s : g) {
          for (const auto& a : s.actions) {
            const std::size_t off = inst.params.RowOffset(a.slot, a.bucket);
            for (std::size_t k = 0; k < a.vocab_size; ++k) touched[off + k] = true;
          }
        }
      }
      ToyPolicyParams p = inst.params;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (!touched[i]) {
          if (grad[i] != 0.0) o.Fail("nonzero gradient on an unused parameter");
          continue;
        }
        const double keep = p.values()[i];
        p.values()[i] = keep + kGradStep;
        const double up = OracleObjective(p, inst.groups, c.epsilon, beta);
        p.values()[i] = keep - kGradStep;
        const double down = OracleObjective(p, inst.groups, c.epsilon, beta);
        p.values()[i] = keep;
        const double numeric = (up - down) / (2 * kGradStep);
        const double err = std::abs(numeric - grad[i]) /
                           std::max({std::abs(numeric), std::abs(grad[i]), kGradFloor});
        worst = std::max(worst, err);
      }
    }
  }
  if (worst > kGradRelTol) o.Fail(fmt::format("max relative error {:.3g}", worst));
  o.detail = o.pass ? fmt::format("max relative error {:.3g}", worst) : o.detail;
  return o;
}

// --- 4: surrogate identities ---

Outcome SurrogateIdentities() {
  Outcome o;
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double lp = -10 * rng.Uniform();
    const double a = 6 * rng.Uniform() - 3;
    const double eps = rng.Uniform();
    if (PerTokenSurrogate(lp, lp, a, eps) != a) o.Fail("ratio 1 does not give A");
  }
  if (PerTokenSurrogate(std::log(1.5), 0.0, 1.0, 0.2) != 1.2) {
    o.Fail(fmt::format("(1.5, 0.2, 1) gave {:.17g}", PerTokenSurrogate(std::log(1.5), 0.0, 1.0, 0.2)));
  }
  if (PerTokenSurrogate(std::log(0.5), 0.0, -1.0, 0.2) != -0.8) {
    o.Fail(fmt::format("(0.5, 0.2, -1) gave {:.17g}", PerTokenSurrogate(std::log(0.5), 0.0, -1.0, 0.2)));
  }
  for (int i = 0; i < 100000; ++i) {
    const double a = -20 * rng.Uniform(), b = -20 * rng.Uniform();
    const double k = KlEstimate(a, b);
    if (!(k >= 0.0)) o.Fail(fmt::format("kl({}, {}) = {}", a, b, k));
    if (KlEstimate(a, a) != 0.0) o.Fail("kl at equality is not 0");
  }
  return o;
}

// --- 5: metric oracles ---

Outcome MetricOracles() {
  Outcome o;
  Rng rng(5);
  for (int inst = 0; inst < 500; ++inst) {
    const std::size_t n = 3 + rng.Below(198);
    std::vector<ScoredPrediction> preds;
    const bool with_probs = inst % 2 == 0;
    for (std::size_t i = 0; i < n; ++i) {
      ScoredPrediction p;
      p.pair_id = std::to_string(i);
      p.gold = i < 3 ? static_cast<int>(i) : static_cast<int>(rng.Below(3));
      p.pred = static_cast<int>(rng.Below(3));
      if (with_probs) {
        // coarse values so ties are common
        std::array<double, 3> z = {double(rng.Below(4)), double(rng.Below(4)), double(rng.Below(4))};
        p.class_scores = z;
        p.score_kind = ScoreKind::kLogits;
      }
      preds.push_back(p);
    }
    for (AucSplit split : {AucSplit::kZeroVsRest, AucSplit::kTwoPlusVsRest}) {
      const double fast = AucOneVsRest(preds, split);
      const double slow = AucBruteforce(preds, split);
      if (std::abs(fast - slow) > kAucTol) {
        o.Fail(fmt::format("instance {} split {}: {} vs {}", inst, ToString(split), fast, slow));
      }
    }
    std::size_t cm[3][3] = {};
    for (const auto& p : preds) ++cm[p.gold][p.pred];
    const MetricReport r = ClassificationReport(preds);
    std::size_t diag = 0;
    double f1sum = 0;
    for (int c = 0; c < 3; ++c) {
      for (int k = 0; k < 3; ++k) {
        if (r.confusion.counts[c][k] != cm[c][k]) o.Fail("confusion matrix differs");
      }
      const std::size_t tp = cm[c][c];
      diag += tp;
      const std::size_t col = cm[0][c] + cm[1][c] + cm[2][c];
      const std::size_t rowsum = cm[c][0] + cm[c][1] + cm[c][2];
      const double prec = col ? double(tp) / col : 0.0;
      const double rec = rowsum ? double(tp) / rowsum : 0.0;
      const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
      if (r.precision[c] != prec || r.recall[c] != rec || r.f1[c] != f1) {
        o.Fail(fmt::format("instance {} class {} per-class metrics differ", inst, c));
      }
      f1sum += f1;
    }
    if (r.accuracy != double(diag) / n) o.Fail("accuracy differs");
    if (r.macro_f1 != f1sum / 3.0) o.Fail("macro F1 differs");
  }
  return o;
}

// --- 6: reported arithmetic ---

Outcome ReportedArithmetic() {
  Outcome o;
  const double d = GsbDelta({23, 71, 6});
  if (d != 17.0) o.Fail(fmt::format("gsb delta {:.17g}", d));
  const GrpoConfig p = LargeModelPreset();
  if (p.group_size != 16 || p.learning_rate != 5e-7 || p.batch_size != 32 || p.steps != 360) {
    o.Fail("large-model preset differs");
  }
  if (RewardConfig{}.lambda != 0.0) o.Fail("default lambda is not 0");
  return o;
}

// --- 7: parser robustness ---

std::string RandomText(Rng& rng, std::size_t max_len) {
  static const std::string alphabet = "abcdefgh ijk.,;:!?-'\"()XYZ0123";
  std::string s;
  const std::size_t len = 1 + rng.Below(max_len);
  for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.Below(alphabet.size())];
  return s;
}

// Non-empty after trimming and free of '<' so it cannot forge tags.
std::string FieldText(Rng& rng) {
  std::string s = RandomText(rng, 30);
  s.front() = 'w';
  s.back() = 'z';
  return s;
}

Outcome ParserRobustness() {
  Outcome o;
  Rng rng(7);
  const std::vector<std::string> pieces = {"<think>", "</think>", "<intent>", "</intent>",
                                           "<extract>", "</extract>", "<score>", "</score>",
                                           "none", "0", "1", "2", "3", " ", "\n", "<", ">", "/"};
  std::size_t crashes = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string s;
    if (i % 2 == 0) {
      Round2Output v{FieldText(rng), Extraction::Fragment(FieldText(rng)), int(rng.Below(3))};
      s = RenderRound2(v);
      const std::size_t edits = 1 + rng.Below(4);
      for (std::size_t e = 0; e < edits && !s.empty(); ++e) {
        const std::size_t at = rng.Below(s.size());
        switch (rng.Below(3)) {
          case 0: s.erase(at, 1 + rng.Below(5)); break;
          case 1: s.insert(at, pieces[rng.Below(pieces.size())]); break;
          default: s[at] = static_cast<char>(rng.Below(256)); break;
        }
      }
    } else {
      const std::size_t n = rng.Below(12);
      for (std::size_t k = 0; k < n; ++k) {
        s += rng.Below(3) == 0 ? RandomText(rng, 8) : pieces[rng.Below(pieces.size())];
      }
    }
    try {
      (void)ParseRound1(s);
      (void)ParseRound2(s);
    } catch (...) {
      ++crashes;
    }
  }
  if (crashes) o.Fail(fmt::format("{} inputs threw", crashes));

  std::size_t bad_trips = 0;
  for (int i = 0; i < 2000; ++i) {
    Round1Output a{FieldText(rng), FieldText(rng)};
    auto pa = ParseRound1(RenderRound1(a));
    if (!pa.ok() || !(*pa == a)) ++bad_trips;
    Round2Output b{FieldText(rng),
                   rng.Below(4) == 0 ? Extraction::None() : Extraction::Fragment(FieldText(rng)),
                   int(rng.Below(3))};
    auto pb = ParseRound2(RenderRound2(b));
    if (!pb.ok() || !(*pb == b)) ++bad_trips;
  }
  if (bad_trips) o.Fail(fmt::format("{} valid responses failed to round-trip", bad_trips));

  const std::string punct = ".,;:!?'\"-()";
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"Alpine resort, open daily; lifts run 9-5. Tickets: $40 (kids free)!",
       "resort, open daily; lifts run 9-5."},
      {"\"Best\" slopes? The north face's runs are steep: experts only.",
       "\"Best\" slopes? The north face's runs"},
      {"Wax skis weekly (more in spring). Don't skip edges!", "(more in spring). Don't skip edges!"},
  };
  std::size_t mutations = 0, accepted = 0;
  for (const auto& [doc, frag] : cases) {
    if (!ValidateExtract(Extraction::Fragment(frag), doc)) o.Fail("base extract rejected");
    std::vector<std::string> variants;
    for (std::size_t i = 0; i < frag.size(); ++i) {
      const bool is_p = punct.find(frag[i]) != std::string::npos;
      if (is_p) {
        std::string del = frag;
        del.erase(i, 1);
        variants.push_back(del);
        for (char c : punct) {
          if (c == frag[i]) continue;
          std::string sub = frag;
          sub[i] = c;
          variants.push_back(sub);
        }
      }
      for (char c : punct) {
        std::string ins = frag;
        ins.insert(i + 1, 1, c);
        variants.push_back(ins);
      }
    }
    for (const std::string& v : variants) {
      // Only mutations that really leave the document count; a trimmed edge
      // mutation could coincide with another substring.
      if (doc.find(std::string(TrimWhitespace(v))) != std::string::npos) continue;
      ++mutations;
      if (ValidateExtract(Extraction::Fragment(v), doc)) ++accepted;
    }
  }
  if (accepted) o.Fail(fmt::format("{} of {} punctuation mutations accepted", accepted, mutations));
  if (o.pass) o.detail = fmt::format("{} mutations rejected", mutations);
  return o;
}

// --- 8: prompts ---

std::string Fill(std::string text, const std::string& key, const std::string& value) {
  const std::string needle = "{" + key + "}";
  const auto pos = text.find(needle);
  if (pos == std::string::npos) return "<missing placeholder " + key + ">";
  return text.replace(pos, needle.size(), value);
}

Outcome PromptFidelity() {
  Outcome o;
  const std::string dir = std::string(RELJUDGE_TEST_DATA_DIR) + "/golden/";
  auto golden = [&](const std::string& n) { return ReadFile(dir + n + ".txt"); };
  const std::vector<std::string> aux = {"Ski trip notes.", "Best slopes 2026."};
  auto r1 = RenderRound1Prompt("ski resorts", aux);
  if (r1.size() != 2 || r1[0].content != golden("round1_system")) o.Fail("round-1 system");
  if (r1[1].content != Fill(Fill(golden("round1_user"), "query", "ski resorts"), "docs",
                            "1. Ski trip notes.\n2. Best slopes 2026.")) {
    o.Fail("round-1 user");
  }
  r1.push_back({Role::kAssistant, "<think>a</think><intent>b</intent>"});
  auto r2 = RenderRound2Messages(r1, "Candidate doc.");
  if (r2.size() != 4 || r2[3].content != Fill(golden("round2_user"), "doc", "Candidate doc.")) {
    o.Fail("round-2 user");
  }
  auto u = RenderUmbrelaPrompt("wax skis", "Guide.");
  if (u[0].content != golden("umbrela_system")) o.Fail("umbrela system");
  if (u[1].content != Fill(Fill(golden("umbrela_user"), "query", "wax skis"), "doc", "Guide.")) {
    o.Fail("umbrela user");
  }
  return o;
}

// --- 9: end-to-end toy training ---

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

Outcome ToyTraining() {
  Outcome o;
  std::vector<double> zero_last, zero_cross, cold_cross;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ToySchema schema;
    const ToyTask task = ToyTask::FromPairs(MakeSyntheticPairs(24, schema, seed), schema);
    for (InitMode init : {InitMode::kZero, InitMode::kColdStart}) {
      TrainOptions opt;
      opt.grpo.group_size = 16;
      opt.grpo.steps = 400;
      opt.init = init;
      opt.seed = seed;
      const TrainingLog log = Train(task, opt);
      // Gold must be a function of the instance features.
      for (const auto& p : task.pairs) {
        if (*p.gold != SyntheticGold(FeatureBucket(p.query, schema.buckets))) {
          o.Fail("synthetic gold is not a function of the features");
        }
      }
      const auto cross = log.FirstStepReaching(kCrossReward);
      const double cross_at = cross ? double(*cross) : double(opt.grpo.steps);
      if (init == InitMode::kZero) {
        double tail = 0;
        for (std::size_t i = log.steps.size() - kLastWindow; i < log.steps.size(); ++i) {
          tail += log.steps[i].mean_reward;
        }
        zero_last.push_back(tail / kLastWindow);
        zero_cross.push_back(cross_at);
      } else {
        cold_cross.push_back(cross_at);
      }
    }
  }
  const double last = Median(zero_last), zc = Median(zero_cross), cc = Median(cold_cross);
  if (last < kTargetReward) o.Fail(fmt::format("zero-init final reward {:.4f}", last));
  if (!(cc < zc)) o.Fail(fmt::format("cold start crosses at {} vs zero {}", cc, zc));
  o.detail = fmt::format("zero-init last-{} mean {:.4f}; crossing {} at step {} (cold) vs {} (zero)",
                         kLastWindow, last, kCrossReward, cc, zc) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

// --- 10: dataset determinism and balance ---

Outcome DatasetBuild() {
  Outcome o;
  const auto log = testing::SyntheticLog(10000, 2, 3);
  if (log.size() != 50000) o.Fail("synthetic log size");
  auto build = [&] {
    const CitationPartition part = LabelByCitation(log, testing::DefaultCitation());
    const auto corpus = CorpusFromLog(log);
    AssembleConfig c;
    c.random_negative_count = 3000;
    c.train_size = 5000;
    c.seed = 77;
    const DatasetSplits s = AssembleDataset(part, corpus, c);
    std::array<std::size_t, 3> counts{};
    for (const auto& p : s.train) ++counts[*p.pair.gold];
    return std::make_pair(SplitToJsonl(s.train) + "\x1e" + SplitToJsonl(s.eval), counts);
  };
  const auto [a, ca] = build();
  const auto [b, cb] = build();
  if (a != b) o.Fail("two builds differ");
  const std::size_t total = ca[0] + ca[1] + ca[2];
  const std::size_t spread = *std::max_element(ca.begin(), ca.end()) -
                             *std::min_element(ca.begin(), ca.end());
  if (total != 5000 || spread > 1) {
    o.Fail(fmt::format("train counts {}/{}/{}", ca[0], ca[1], ca[2]));
  }
  if (o.pass) o.detail = fmt::format("train {}/{}/{}, {} bytes", ca[0], ca[1], ca[2], a.size());
  return o;
}

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace reljudge

int main() {
  using namespace reljudge;
  const std::vector<Criterion> criteria = {
      {1, "reward table", 1, RewardTable},
      {2, "advantage properties", 5, AdvantageProperties},
      {3, "gradient fidelity", 30, GradientFidelity},
      {4, "surrogate identities", 5, SurrogateIdentities},
      {5, "metric oracles", 30, MetricOracles},
      {6, "reported arithmetic", 1, ReportedArithmetic},
      {7, "parser robustness", 30, ParserRobustness},
      {8, "prompt fidelity", 1, PromptFidelity},
      {9, "toy GRPO end to end", 300, ToyTraining},
      {10, "dataset determinism and balance", 10, DatasetBuild},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.Fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      o.Fail(fmt::format("took {:.2f} s, budget {} s", secs, c.budget_seconds));
    }
    fmt::print("{} criterion {:>2} {} ({:.2f} s){}\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
               secs, o.detail.empty() ? "" : ": " + o.detail);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures ? 1 : 0;
}
