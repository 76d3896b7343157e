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

// Evaluation metrics for three-level relevance judgments, plus the online
// comparison arithmetic (side-by-side GSB and re-query rate).

#ifndef RELJUDGE_EVAL_H_
#define RELJUDGE_EVAL_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace reljudge {

struct ConfusionMatrix {
  // counts[gold][pred]
  std::array<std::array<std::size_t, 3>, 3> counts{};

  void Add(int gold, int pred);
  std::size_t total() const;
  bool operator==(const ConfusionMatrix&) const = default;
};

enum class ScoreKind { kProbabilities, kLogits };

struct ScoredPrediction {
  std::string pair_id;
  int gold = 0;
  int pred = 0;
  std::optional<std::array<double, 3>> class_scores;
  ScoreKind score_kind = ScoreKind::kProbabilities;
};

// {pair_id, gold, pred, class_scores?, score_kind?} with score_kind
// "probabilities" (default) or "logits".
ScoredPrediction ScoredPredictionFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const ScoredPrediction& p);
std::vector<ScoredPrediction> ReadPredictions(const std::filesystem::path& path);

// Probabilities for a prediction: softmax of logits, or the given
// probabilities after checking they sum to 1 within 1e-6.
std::array<double, 3> ClassProbabilities(const ScoredPrediction& p);

enum class AucSplit { kZeroVsRest, kTwoPlusVsRest };
std::string_view ToString(AucSplit split);

enum class AucScoreSource { kProbabilities, kPredictedLabel };
std::string_view ToString(AucScoreSource source);

// Probabilities when every prediction has class scores, else the label.
AucScoreSource ChooseScoreSource(std::span<const ScoredPrediction> preds);

// zero-vs-rest: gold in {1,2} is positive, scored by P(1)+P(2).
// two-plus-vs-rest: gold 2 is positive, scored by P(2).
// Under the label source the score is the predicted label for both splits.
bool IsPositive(int gold, AucSplit split);
double PositiveScore(const ScoredPrediction& p, AucSplit split,
                     AucScoreSource source);

// Mann-Whitney U / (n_pos * n_neg) with average ranks for ties. Throws
// InputError when either side is empty.
double RankAuc(std::span<const double> scores, const std::vector<bool>& positive);
double BruteForceAuc(std::span<const double> scores,
                     const std::vector<bool>& positive);

double AucOneVsRest(std::span<const ScoredPrediction> preds, AucSplit split);
// Pairwise oracle; at most 10^4 predictions.
double AucBruteforce(std::span<const ScoredPrediction> preds, AucSplit split);

struct MetricReport {
  std::size_t count = 0;
  ConfusionMatrix confusion;
  std::array<double, 3> precision{};
  std::array<double, 3> recall{};
  std::array<double, 3> f1{};
  // Classes whose F1 had a zero denominator and was set to 0.
  std::array<bool, 3> f1_undefined{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  // Absent when one side of the split is empty.
  std::optional<double> auc_0_12;
  std::optional<double> auc_01_2;
  AucScoreSource auc_source = AucScoreSource::kPredictedLabel;

  nlohmann::json ToJson() const;
  // Columns: F1 0, F1 1, F1 2, Macro-F1, AUC 0/12, AUC 01/2, Accuracy, in
  // percent.
  std::string ToTable() const;
};

MetricReport ClassificationReport(std::span<const ScoredPrediction> preds);

struct GsbCounts {
  long good = 0;
  long same = 0;
  long bad = 0;
};

// (good - bad) / total, in percent.
double GsbDelta(const GsbCounts& counts);

struct QueryEvent {
  double timestamp = 0.0;  // seconds
  std::string query;
};

struct SessionLog {
  std::string session_id;
  std::vector<QueryEvent> events;
};

// JSONL of {session_id, events: [{timestamp, query}, ...]}.
std::vector<SessionLog> ReadSessions(const std::filesystem::path& path);

inline constexpr double kDefaultRequeryWindow = 60.0;

// Fraction of queries followed by another query of the same session no
// more than `window_seconds` later.
double RequeryRate(std::span<const SessionLog> sessions,
                   double window_seconds = kDefaultRequeryWindow);

struct RequeryChange {
  double before = 0.0;
  double after = 0.0;
  double absolute_points = 0.0;   // (before - after) * 100
  double relative_percent = 0.0;  // (before - after) / before * 100
};

RequeryChange CompareRequery(double before, double after);

}  // namespace reljudge

#endif  // RELJUDGE_EVAL_H_
