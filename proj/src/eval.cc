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

#include "reljudge/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "reljudge/util.h"

namespace reljudge {

void ConfusionMatrix::Add(int gold, int pred) {
  CheckLabel(gold, "gold label");
  CheckLabel(pred, "predicted label");
  ++counts[gold][pred];
}

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts) {
    for (std::size_t c : row) n += c;
  }
  return n;
}

ScoredPrediction ScoredPredictionFromJson(const nlohmann::json& j) {
  ScoredPrediction p;
  try {
    p.pair_id = j.value("pair_id", "");
    p.gold = j.at("gold").get<int>();
    p.pred = j.at("pred").get<int>();
    if (j.contains("class_scores") && !j["class_scores"].is_null()) {
      const auto& s = j["class_scores"];
      if (!s.is_array() || s.size() != 3) {
        throw InputError("class_scores must have 3 entries");
      }
      p.class_scores = std::array<double, 3>{s[0].get<double>(),
                                             s[1].get<double>(),
                                             s[2].get<double>()};
    }
    const std::string kind = j.value("score_kind", "probabilities");
    if (kind == "logits") {
      p.score_kind = ScoreKind::kLogits;
    } else if (kind != "probabilities") {
      throw InputError("score_kind must be 'probabilities' or 'logits'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("prediction record: ") + e.what());
  }
  CheckLabel(p.gold, "gold label");
  CheckLabel(p.pred, "predicted label");
  return p;
}

nlohmann::json ToJson(const ScoredPrediction& p) {
  nlohmann::json j = {{"pair_id", p.pair_id}, {"gold", p.gold}, {"pred", p.pred}};
  if (p.class_scores) {
    j["class_scores"] = *p.class_scores;
    j["score_kind"] =
        p.score_kind == ScoreKind::kLogits ? "logits" : "probabilities";
  }
  return j;
}

std::vector<ScoredPrediction> ReadPredictions(
    const std::filesystem::path& path) {
  std::vector<ScoredPrediction> out;
  std::size_t line_no = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_no;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw InputError(fmt::format("{}:{}: invalid JSON", path.string(),
                                   line_no));
    }
    try {
      out.push_back(ScoredPredictionFromJson(j));
    } catch (const InputError& e) {
      throw InputError(fmt::format("{}:{}: {}", path.string(), line_no,
                                   e.what()));
    }
  }
  return out;
}

std::array<double, 3> ClassProbabilities(const ScoredPrediction& p) {
  if (!p.class_scores) {
    throw InputError("prediction '" + p.pair_id + "' has no class scores");
  }
  std::array<double, 3> s = *p.class_scores;
  if (p.score_kind == ScoreKind::kLogits) {
    const double m = *std::max_element(s.begin(), s.end());
    double z = 0.0;
    for (double& v : s) z += (v = std::exp(v - m));
    for (double& v : s) v /= z;
    return s;
  }
  const double sum = s[0] + s[1] + s[2];
  if (std::abs(sum - 1.0) > 1e-6 ||
      std::any_of(s.begin(), s.end(), [](double v) { return !(v >= 0.0); })) {
    throw InputError(fmt::format(
        "prediction '{}': class probabilities sum to {} (need 1 within 1e-6)",
        p.pair_id, sum));
  }
  return s;
}

std::string_view ToString(AucSplit split) {
  return split == AucSplit::kZeroVsRest ? "0/12" : "01/2";
}

std::string_view ToString(AucScoreSource source) {
  return source == AucScoreSource::kProbabilities ? "probabilities"
                                                  : "predicted_label";
}

AucScoreSource ChooseScoreSource(std::span<const ScoredPrediction> preds) {
  const bool all = !preds.empty() &&
                   std::all_of(preds.begin(), preds.end(),
                               [](const auto& p) { return p.class_scores.has_value(); });
  return all ? AucScoreSource::kProbabilities : AucScoreSource::kPredictedLabel;
}

bool IsPositive(int gold, AucSplit split) {
  return split == AucSplit::kZeroVsRest ? gold >= 1 : gold == 2;
}

double PositiveScore(const ScoredPrediction& p, AucSplit split,
                     AucScoreSource source) {
  if (source == AucScoreSource::kPredictedLabel) {
    return static_cast<double>(p.pred);
  }
  const auto pr = ClassProbabilities(p);
  return split == AucSplit::kZeroVsRest ? pr[1] + pr[2] : pr[2];
}

namespace {

void CheckSides(std::span<const double> scores,
                const std::vector<bool>& positive,
                std::size_t& n_pos, std::size_t& n_neg) {
  if (scores.size() != positive.size()) {
    throw InputError("AUC: scores and labels differ in length");
  }
  n_pos = static_cast<std::size_t>(
      std::count(positive.begin(), positive.end(), true));
  n_neg = positive.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw InputError(fmt::format(
        "AUC undefined: {} positive and {} negative items", n_pos, n_neg));
  }
}

void SplitScores(std::span<const ScoredPrediction> preds, AucSplit split,
                 std::vector<double>& scores, std::vector<bool>& positive) {
  const AucScoreSource source = ChooseScoreSource(preds);
  for (const ScoredPrediction& p : preds) {
    CheckLabel(p.gold, "gold label");
    scores.push_back(PositiveScore(p, split, source));
    positive.push_back(IsPositive(p.gold, split));
  }
}

}  // namespace

double RankAuc(std::span<const double> scores,
               const std::vector<bool>& positive) {
  std::size_t n_pos = 0, n_neg = 0;
  CheckSides(scores, positive, n_pos, n_neg);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their average.
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (positive[order[k]]) pos_rank_sum += avg;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double BruteForceAuc(std::span<const double> scores,
                     const std::vector<bool>& positive) {
  std::size_t n_pos = 0, n_neg = 0;
  CheckSides(scores, positive, n_pos, n_neg);
  double credit = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (positive[k]) continue;
      if (scores[i] > scores[k]) {
        credit += 1.0;
      } else if (scores[i] == scores[k]) {
        credit += 0.5;
      }
    }
  }
  return credit / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double AucOneVsRest(std::span<const ScoredPrediction> preds, AucSplit split) {
  std::vector<double> scores;
  std::vector<bool> positive;
  SplitScores(preds, split, scores, positive);
  return RankAuc(scores, positive);
}

double AucBruteforce(std::span<const ScoredPrediction> preds, AucSplit split) {
  if (preds.size() > 10000) {
    throw InputError("brute-force AUC is limited to 10^4 predictions");
  }
  std::vector<double> scores;
  std::vector<bool> positive;
  SplitScores(preds, split, scores, positive);
  return BruteForceAuc(scores, positive);
}

MetricReport ClassificationReport(std::span<const ScoredPrediction> preds) {
  if (preds.empty()) throw InputError("classification report needs predictions");
  MetricReport r;
  r.count = preds.size();
  for (const ScoredPrediction& p : preds) r.confusion.Add(p.gold, p.pred);

  std::size_t trace = 0;
  for (int c = 0; c < 3; ++c) {
    const std::size_t tp = r.confusion.counts[c][c];
    trace += tp;
    std::size_t pred_c = 0, gold_c = 0;
    for (int k = 0; k < 3; ++k) {
      pred_c += r.confusion.counts[k][c];
      gold_c += r.confusion.counts[c][k];
    }
    r.precision[c] = pred_c ? static_cast<double>(tp) / pred_c : 0.0;
    r.recall[c] = gold_c ? static_cast<double>(tp) / gold_c : 0.0;
    const double denom = r.precision[c] + r.recall[c];
    if (denom > 0.0) {
      r.f1[c] = 2.0 * r.precision[c] * r.recall[c] / denom;
    } else {
      r.f1[c] = 0.0;
      r.f1_undefined[c] = true;
    }
  }
  r.macro_f1 = (r.f1[0] + r.f1[1] + r.f1[2]) / 3.0;
  r.accuracy = static_cast<double>(trace) / static_cast<double>(r.count);

  r.auc_source = ChooseScoreSource(preds);
  for (AucSplit split : {AucSplit::kZeroVsRest, AucSplit::kTwoPlusVsRest}) {
    const bool has_pos = std::any_of(preds.begin(), preds.end(), [&](const auto& p) {
      return IsPositive(p.gold, split);
    });
    const bool has_neg = std::any_of(preds.begin(), preds.end(), [&](const auto& p) {
      return !IsPositive(p.gold, split);
    });
    if (!has_pos || !has_neg) continue;
    const double auc = AucOneVsRest(preds, split);
    (split == AucSplit::kZeroVsRest ? r.auc_0_12 : r.auc_01_2) = auc;
  }
  return r;
}

nlohmann::json MetricReport::ToJson() const {
  nlohmann::json j;
  j["count"] = count;
  j["confusion"] = confusion.counts;
  j["precision"] = precision;
  j["recall"] = recall;
  j["f1"] = f1;
  nlohmann::json undefined = nlohmann::json::array();
  for (int c = 0; c < 3; ++c) {
    if (f1_undefined[c]) undefined.push_back(c);
  }
  j["f1_undefined_classes"] = undefined;
  j["macro_f1"] = macro_f1;
  j["accuracy"] = accuracy;
  j["auc_0_12"] = auc_0_12 ? nlohmann::json(*auc_0_12) : nlohmann::json();
  j["auc_01_2"] = auc_01_2 ? nlohmann::json(*auc_01_2) : nlohmann::json();
  j["auc_score_source"] = ToString(auc_source);
  return j;
}

std::string MetricReport::ToTable() const {
  auto pct = [](std::optional<double> v) {
    return v ? fmt::format("{:.1f}", *v * 100.0) : std::string("n/a");
  };
  std::string out = fmt::format("{:>7} {:>7} {:>7} {:>9} {:>9} {:>9} {:>9}\n",
                                "F1 0", "F1 1", "F1 2", "Macro-F1", "AUC 0/12",
                                "AUC 01/2", "Accuracy");
  out += fmt::format("{:>7} {:>7} {:>7} {:>9} {:>9} {:>9} {:>9}\n",
                     pct(f1[0]), pct(f1[1]), pct(f1[2]), pct(macro_f1),
                     pct(auc_0_12), pct(auc_01_2), pct(accuracy));
  out += fmt::format("n = {}, AUC scores from {}", count, ToString(auc_source));
  for (int c = 0; c < 3; ++c) {
    if (f1_undefined[c]) out += fmt::format(", F1 {} undefined (set to 0)", c);
  }
  out += '\n';
  return out;
}

double GsbDelta(const GsbCounts& c) {
  if (c.good < 0 || c.same < 0 || c.bad < 0) {
    throw InputError("GSB counts must be non-negative");
  }
  const long total = c.good + c.same + c.bad;
  if (total == 0) throw InputError("GSB counts are all zero");
  return 100.0 * static_cast<double>(c.good - c.bad) / static_cast<double>(total);
}

std::vector<SessionLog> ReadSessions(const std::filesystem::path& path) {
  std::vector<SessionLog> out;
  std::size_t line_no = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_no;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw InputError(fmt::format("{}:{}: invalid JSON", path.string(), line_no));
    }
    try {
      SessionLog s;
      s.session_id = j.at("session_id").get<std::string>();
      for (const auto& e : j.at("events")) {
        s.events.push_back({e.at("timestamp").get<double>(),
                            e.value("query", "")});
      }
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  return out;
}

double RequeryRate(std::span<const SessionLog> sessions, double window_seconds) {
  if (!(window_seconds > 0.0)) {
    throw InputError(fmt::format("re-query window must be > 0 (got {})",
                                 window_seconds));
  }
  std::size_t queries = 0;
  std::size_t followed = 0;
  for (const SessionLog& s : sessions) {
    for (std::size_t i = 0; i < s.events.size(); ++i) {
      if (i > 0 && s.events[i].timestamp < s.events[i - 1].timestamp) {
        throw InputError("session '" + s.session_id +
                         "' has decreasing timestamps");
      }
      ++queries;
      if (i + 1 < s.events.size() &&
          s.events[i + 1].timestamp - s.events[i].timestamp <= window_seconds) {
        ++followed;
      }
    }
  }
  if (queries == 0) throw InputError("session log has no queries");
  return static_cast<double>(followed) / static_cast<double>(queries);
}

RequeryChange CompareRequery(double before, double after) {
  if (!(before > 0.0 && before <= 1.0) || !(after >= 0.0 && after <= 1.0)) {
    throw InputError("re-query rates must be in [0, 1] with before > 0");
  }
  RequeryChange c;
  c.before = before;
  c.after = after;
  c.absolute_points = (before - after) * 100.0;
  c.relative_percent = (before - after) / before * 100.0;
  return c;
}

}  // namespace reljudge
