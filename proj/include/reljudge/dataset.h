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

// Dataset construction from answer-generation logs.
//
// A log entry records how many of M generator passes cited a retrieved
// document. Documents cited at least N times become positives, the rest of
// the retrieved set become hard negatives, and documents drawn from the wider
// corpus become random negatives. Human labels, when present, override the
// provisional ones.

#ifndef RELJUDGE_DATASET_H_
#define RELJUDGE_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "reljudge/types.h"

namespace reljudge {

struct GenerationLogEntry {
  std::string query;
  std::string doc_id;
  std::string doc_text;
  int forwards = 0;        // generator passes (M)
  int citation_count = 0;  // passes that cited this document
};

nlohmann::json ToJson(const GenerationLogEntry& entry);
GenerationLogEntry GenerationLogEntryFromJson(const nlohmann::json& j);
std::vector<GenerationLogEntry> ReadGenerationLog(
    const std::filesystem::path& path);

enum class LabelSource {
  kCitationPositive,
  kCitationHardNegative,
  kRandomNegative,
  kHuman
};
std::string_view ToString(LabelSource source);
LabelSource LabelSourceFromString(std::string_view name);

// 2, 1 and 0 for the citation and random sources. Not defined for kHuman.
int ProvisionalLabel(LabelSource source);

struct LabeledPair {
  QueryDocPair pair;
  std::string doc_id;
  LabelSource source = LabelSource::kHuman;

  bool operator==(const LabeledPair&) const = default;
};

nlohmann::json ToJson(const LabeledPair& pair);
LabeledPair LabeledPairFromJson(const nlohmann::json& j);

// Both values are required; there is no default.
struct CitationConfig {
  int forwards_required = 0;
  int citation_threshold = 0;

  void Validate() const;
};

struct CitationPartition {
  std::vector<GenerationLogEntry> positives;
  std::vector<GenerationLogEntry> hard_negatives;
  // Entries whose forwards differ from forwards_required.
  std::size_t rejected = 0;
};

// Throws DataError when an entry has citation_count outside [0, forwards].
CitationPartition LabelByCitation(std::span<const GenerationLogEntry> entries,
                                  const CitationConfig& config);

struct CorpusDoc {
  std::string doc_id;
  std::string text;
};

struct AssembleConfig {
  std::size_t random_negative_count = 0;
  bool balance = true;
  std::size_t train_size = 5000;
  std::uint64_t seed = 0;
  // Auxiliary documents per pair, taken from the other logged documents of
  // the same query, most cited first.
  std::size_t max_aux_docs = 3;
};

struct DatasetSplits {
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> eval;
};

// Random negatives pair a logged query with a corpus document that no query
// cited and that was not retrieved for that query. Balanced splits take
// train_size / 3 per class, the remainder going to the lowest labels first.
// Throws DataError listing per-class deficits when a pool is too small.
DatasetSplits AssembleDataset(const CitationPartition& partition,
                              std::span<const CorpusDoc> corpus,
                              const AssembleConfig& config);

// Replaces gold labels by human ones, keyed by pair id.
void ApplyHumanLabels(std::vector<LabeledPair>& pairs,
                      const std::map<std::string, int>& labels);

// Corpus JSONL of {doc_id, text}.
std::vector<CorpusDoc> ReadCorpus(const std::filesystem::path& path);
// Distinct documents of a log, first occurrence wins.
std::vector<CorpusDoc> CorpusFromLog(std::span<const GenerationLogEntry> log);

std::string SplitToJsonl(std::span<const LabeledPair> pairs);

// --- Annotation agreement ---

struct AnnotationRecord {
  std::string pair_id;
  std::string annotator_id;
  int label = 0;
};

// CSV with header pair_id,annotator_id,label.
std::vector<AnnotationRecord> ReadAnnotationCsv(
    const std::filesystem::path& path);

struct AgreementReport {
  std::size_t pairs = 0;
  double raw_agreement = 0.0;
  // Chance agreement from the pooled label frequencies of both annotations.
  double expected_agreement = 0.0;
  double kappa = 0.0;
  // False when expected agreement is 1; kappa is then reported as 0.
  bool kappa_defined = true;
  bool meets_gate = false;
  // Pairs whose own agreement (0 or 1) falls below the gate.
  std::vector<std::string> flagged;
};

// Each pair must have exactly two annotations. `gate` is in [0, 1].
AgreementReport AnnotatorAgreement(std::span<const AnnotationRecord> records,
                                   double gate);

// --- Training-file export ---

enum class ExportMode { kRl, kColdStart, kDistill };
std::string_view ToString(ExportMode mode);
ExportMode ExportModeFromString(std::string_view name);

struct ExportRecord {
  QueryDocPair pair;
  std::optional<std::string> teacher_response;   // cold start
  std::optional<std::vector<double>> score_probs;  // distillation
};

// Pair fields plus optional teacher_response and score_probs.
ExportRecord ExportRecordFromJson(const nlohmann::json& j);

struct ExportResult {
  std::string jsonl;
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::vector<std::string> errors;  // one per skipped record
};

// Score distributions must have three non-negative entries summing to 1
// within 1e-3; they are renormalized on output.
ExportResult BuildExport(std::span<const ExportRecord> records,
                         ExportMode mode);
ExportResult ExportTrainingFiles(std::span<const ExportRecord> records,
                                 ExportMode mode,
                                 const std::filesystem::path& out);

}  // namespace reljudge

#endif  // RELJUDGE_DATASET_H_
