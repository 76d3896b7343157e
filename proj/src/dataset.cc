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

#include "reljudge/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "reljudge/prompts.h"
#include "reljudge/util.h"

namespace reljudge {

nlohmann::json ToJson(const GenerationLogEntry& e) {
  return {{"query", e.query},
          {"doc_id", e.doc_id},
          {"doc_text", e.doc_text},
          {"forwards", e.forwards},
          {"citation_count", e.citation_count}};
}

GenerationLogEntry GenerationLogEntryFromJson(const nlohmann::json& j) {
  GenerationLogEntry e;
  try {
    e.query = j.at("query").get<std::string>();
    e.doc_id = j.at("doc_id").get<std::string>();
    e.doc_text = j.at("doc_text").get<std::string>();
    e.forwards = j.at("forwards").get<int>();
    e.citation_count = j.at("citation_count").get<int>();
  } catch (const nlohmann::json::exception& ex) {
    throw DataError(std::string("generation log entry: ") + ex.what());
  }
  return e;
}

std::vector<GenerationLogEntry> ReadGenerationLog(
    const std::filesystem::path& path) {
  std::vector<GenerationLogEntry> out;
  std::size_t line_no = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_no;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw DataError(fmt::format("{}:{}: invalid JSON", path.string(),
                                  line_no));
    }
    out.push_back(GenerationLogEntryFromJson(j));
  }
  return out;
}

std::string_view ToString(LabelSource source) {
  switch (source) {
    case LabelSource::kCitationPositive:
      return "citation_positive";
    case LabelSource::kCitationHardNegative:
      return "citation_hard_negative";
    case LabelSource::kRandomNegative:
      return "random_negative";
    case LabelSource::kHuman:
      return "human";
  }
  return "?";
}

LabelSource LabelSourceFromString(std::string_view name) {
  for (LabelSource s :
       {LabelSource::kCitationPositive, LabelSource::kCitationHardNegative,
        LabelSource::kRandomNegative, LabelSource::kHuman}) {
    if (ToString(s) == name) return s;
  }
  throw InputError("unknown label source '" + std::string(name) + "'");
}

int ProvisionalLabel(LabelSource source) {
  switch (source) {
    case LabelSource::kCitationPositive:
      return 2;
    case LabelSource::kCitationHardNegative:
      return 1;
    case LabelSource::kRandomNegative:
      return 0;
    case LabelSource::kHuman:
      break;
  }
  throw InputError("human-labeled pairs have no provisional label");
}

nlohmann::json ToJson(const LabeledPair& p) {
  nlohmann::json j = ToJson(p.pair);
  j["doc_id"] = p.doc_id;
  j["label_source"] = ToString(p.source);
  return j;
}

LabeledPair LabeledPairFromJson(const nlohmann::json& j) {
  LabeledPair p;
  p.pair = QueryDocPairFromJson(j);
  p.doc_id = j.value("doc_id", "");
  p.source = LabelSourceFromString(j.value("label_source", "human"));
  return p;
}

void CitationConfig::Validate() const {
  if (citation_threshold < 1) {
    throw InputError(fmt::format(
        "citation.threshold must be set and >= 1 (got {})",
        citation_threshold));
  }
  if (forwards_required < citation_threshold) {
    throw InputError(fmt::format(
        "citation.forwards must be set and >= citation.threshold (got {} < {})",
        forwards_required, citation_threshold));
  }
}

CitationPartition LabelByCitation(std::span<const GenerationLogEntry> entries,
                                  const CitationConfig& config) {
  config.Validate();
  CitationPartition out;
  for (const GenerationLogEntry& e : entries) {
    if (e.citation_count < 0 || e.citation_count > e.forwards) {
      throw DataError(fmt::format(
          "log entry ({}, {}): citation_count {} outside [0, forwards={}]",
          e.query, e.doc_id, e.citation_count, e.forwards));
    }
    if (e.forwards != config.forwards_required) {
      ++out.rejected;
      continue;
    }
    if (e.citation_count >= config.citation_threshold) {
      out.positives.push_back(e);
    } else {
      out.hard_negatives.push_back(e);
    }
  }
  return out;
}

namespace {

std::string PairId(std::string_view query, std::string_view doc_id) {
  std::string key(query);
  key += '\x1f';
  key += doc_id;
  return "p" + HexDigest(StableHash(key));
}

struct LoggedDoc {
  std::string doc_id;
  const std::string* text;
  int citations;
};

// Query -> its logged documents, most cited first, then by doc id.
std::unordered_map<std::string, std::vector<LoggedDoc>> IndexByQuery(
    const CitationPartition& partition) {
  std::unordered_map<std::string, std::vector<LoggedDoc>> index;
  for (const auto* pool : {&partition.positives, &partition.hard_negatives}) {
    for (const GenerationLogEntry& e : *pool) {
      index[e.query].push_back({e.doc_id, &e.doc_text, e.citation_count});
    }
  }
  for (auto& [q, docs] : index) {
    std::sort(docs.begin(), docs.end(),
              [](const LoggedDoc& a, const LoggedDoc& b) {
                if (a.citations != b.citations) return a.citations > b.citations;
                return a.doc_id < b.doc_id;
              });
  }
  return index;
}

LabeledPair MakePair(const std::string& query, const std::string& doc_id,
                     const std::string& text, LabelSource source,
                     const std::vector<LoggedDoc>& logged,
                     std::size_t max_aux) {
  LabeledPair p;
  p.pair.id = PairId(query, doc_id);
  p.pair.query = query;
  p.pair.candidate = text;
  p.pair.gold = ProvisionalLabel(source);
  p.doc_id = doc_id;
  p.source = source;
  for (const LoggedDoc& d : logged) {
    if (p.pair.aux_docs.size() >= max_aux) break;
    if (d.doc_id != doc_id) p.pair.aux_docs.push_back(*d.text);
  }
  return p;
}

}  // namespace

DatasetSplits AssembleDataset(const CitationPartition& partition,
                              std::span<const CorpusDoc> corpus,
                              const AssembleConfig& config) {
  const auto index = IndexByQuery(partition);
  static const std::vector<LoggedDoc> kNoDocs;
  auto logged_for = [&](const std::string& q) -> const std::vector<LoggedDoc>& {
    auto it = index.find(q);
    return it == index.end() ? kNoDocs : it->second;
  };

  // pools[label]
  std::array<std::vector<LabeledPair>, kNumLabels> pools;
  for (const GenerationLogEntry& e : partition.positives) {
    pools[2].push_back(MakePair(e.query, e.doc_id, e.doc_text,
                                LabelSource::kCitationPositive,
                                logged_for(e.query), config.max_aux_docs));
  }
  for (const GenerationLogEntry& e : partition.hard_negatives) {
    pools[1].push_back(MakePair(e.query, e.doc_id, e.doc_text,
                                LabelSource::kCitationHardNegative,
                                logged_for(e.query), config.max_aux_docs));
  }

  // Random negatives.
  if (config.random_negative_count > 0) {
    std::unordered_set<std::string> cited;
    for (const GenerationLogEntry& e : partition.positives) cited.insert(e.doc_id);
    std::vector<const CorpusDoc*> eligible;
    std::set<std::string> seen_ids;
    for (const CorpusDoc& d : corpus) {
      if (!cited.contains(d.doc_id) && seen_ids.insert(d.doc_id).second) {
        eligible.push_back(&d);
      }
    }
    std::vector<std::string> queries;
    for (const auto& [q, docs] : index) queries.push_back(q);
    std::sort(queries.begin(), queries.end());
    if (eligible.empty() || queries.empty()) {
      throw DataError(fmt::format(
          "cannot draw {} random negatives: {} eligible corpus documents, {} "
          "queries",
          config.random_negative_count, eligible.size(), queries.size()));
    }

    Rng rng(config.seed, 0x72616e64ULL);
    std::set<std::string> used;
    const std::size_t max_tries = config.random_negative_count * 50 + 1000;
    std::size_t tries = 0;
    while (pools[0].size() < config.random_negative_count && tries++ < max_tries) {
      const std::string& q = queries[rng.Below(queries.size())];
      const CorpusDoc& d = *eligible[rng.Below(eligible.size())];
      const auto& logged = logged_for(q);
      if (std::any_of(logged.begin(), logged.end(),
                      [&](const LoggedDoc& l) { return l.doc_id == d.doc_id; })) {
        continue;
      }
      if (!used.insert(PairId(q, d.doc_id)).second) continue;
      pools[0].push_back(MakePair(q, d.doc_id, d.text,
                                  LabelSource::kRandomNegative, logged,
                                  config.max_aux_docs));
    }
    if (pools[0].size() < config.random_negative_count) {
      throw DataError(fmt::format(
          "only {} of {} random negatives could be drawn without repeats",
          pools[0].size(), config.random_negative_count));
    }
  }

  Rng rng(config.seed, 0x73706c74ULL);
  for (auto& pool : pools) rng.Shuffle(pool);

  DatasetSplits out;
  if (config.balance) {
    std::array<std::size_t, kNumLabels> quota{};
    std::string deficits;
    for (int c = 0; c < kNumLabels; ++c) {
      quota[c] = config.train_size / kNumLabels +
                 (static_cast<std::size_t>(c) < config.train_size % kNumLabels ? 1 : 0);
      if (pools[c].size() < quota[c]) {
        deficits += fmt::format("{}class {}: need {}, have {}, short {}",
                                deficits.empty() ? "" : "; ", c, quota[c],
                                pools[c].size(), quota[c] - pools[c].size());
      }
    }
    if (!deficits.empty()) {
      throw DataError("not enough samples for a balanced train split: " +
                      deficits);
    }
    for (int c = 0; c < kNumLabels; ++c) {
      auto& pool = pools[c];
      out.train.insert(out.train.end(), pool.begin(), pool.begin() + quota[c]);
      out.eval.insert(out.eval.end(), pool.begin() + quota[c], pool.end());
    }
  } else {
    std::vector<LabeledPair> all;
    for (auto& pool : pools) all.insert(all.end(), pool.begin(), pool.end());
    if (all.size() < config.train_size) {
      throw DataError(fmt::format(
          "not enough samples for the train split: need {}, have {}, short {}",
          config.train_size, all.size(), config.train_size - all.size()));
    }
    rng.Shuffle(all);
    out.train.assign(all.begin(), all.begin() + config.train_size);
    out.eval.assign(all.begin() + config.train_size, all.end());
  }
  rng.Shuffle(out.train);
  rng.Shuffle(out.eval);
  return out;
}

void ApplyHumanLabels(std::vector<LabeledPair>& pairs,
                      const std::map<std::string, int>& labels) {
  for (LabeledPair& p : pairs) {
    auto it = labels.find(p.pair.id);
    if (it == labels.end()) continue;
    CheckLabel(it->second, "human label");
    p.pair.gold = it->second;
    p.source = LabelSource::kHuman;
  }
}

std::vector<CorpusDoc> ReadCorpus(const std::filesystem::path& path) {
  std::vector<CorpusDoc> out;
  std::size_t line_no = 0;
  for (const std::string& line : ReadLines(path)) {
    ++line_no;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("doc_id") || !j.contains("text")) {
      throw DataError(fmt::format("{}:{}: expected {{doc_id, text}}",
                                  path.string(), line_no));
    }
    out.push_back({j["doc_id"].get<std::string>(), j["text"].get<std::string>()});
  }
  return out;
}

std::vector<CorpusDoc> CorpusFromLog(std::span<const GenerationLogEntry> log) {
  std::vector<CorpusDoc> out;
  std::unordered_set<std::string> seen;
  for (const GenerationLogEntry& e : log) {
    if (seen.insert(e.doc_id).second) out.push_back({e.doc_id, e.doc_text});
  }
  return out;
}

std::string SplitToJsonl(std::span<const LabeledPair> pairs) {
  std::string out;
  for (const LabeledPair& p : pairs) {
    out += ToJson(p).dump();
    out += '\n';
  }
  return out;
}

// --- Annotation agreement ---

namespace {

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.emplace_back(TrimWhitespace(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<AnnotationRecord> ReadAnnotationCsv(
    const std::filesystem::path& path) {
  const std::vector<std::string> lines = ReadLines(path);
  if (lines.empty()) throw DataError(path.string() + ": empty annotation file");
  const auto header = SplitCsvLine(lines[0]);
  auto column = [&](std::string_view name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw DataError(fmt::format("{}: missing column '{}'", path.string(),
                                  name));
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_pair = column("pair_id");
  const std::size_t c_ann = column("annotator_id");
  const std::size_t c_label = column("label");

  std::vector<AnnotationRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = SplitCsvLine(lines[i]);
    if (f.size() != header.size()) {
      throw DataError(fmt::format("{}:{}: expected {} fields, got {}",
                                  path.string(), i + 1, header.size(),
                                  f.size()));
    }
    AnnotationRecord r;
    r.pair_id = f[c_pair];
    r.annotator_id = f[c_ann];
    const std::string& lab = f[c_label];
    auto [ptr, ec] = std::from_chars(lab.data(), lab.data() + lab.size(), r.label);
    if (ec != std::errc() || ptr != lab.data() + lab.size() ||
        !IsValidLabel(r.label)) {
      throw DataError(fmt::format("{}:{}: bad label '{}'", path.string(), i + 1,
                                  lab));
    }
    out.push_back(std::move(r));
  }
  return out;
}

AgreementReport AnnotatorAgreement(std::span<const AnnotationRecord> records,
                                   double gate) {
  if (!(gate >= 0.0 && gate <= 1.0)) {
    throw InputError(fmt::format("agreement gate must be in [0, 1] (got {})",
                                 gate));
  }
  std::map<std::string, std::vector<const AnnotationRecord*>> by_pair;
  for (const AnnotationRecord& r : records) {
    CheckLabel(r.label, "annotation label");
    by_pair[r.pair_id].push_back(&r);
  }
  if (by_pair.empty()) throw InputError("no annotation records");

  AgreementReport rep;
  std::array<double, kNumLabels> freq{};
  std::size_t agree = 0;
  for (const auto& [id, anns] : by_pair) {
    if (anns.size() != 2) {
      throw InputError(fmt::format("pair '{}' has {} annotations, expected 2",
                                   id, anns.size()));
    }
    if (anns[0]->annotator_id == anns[1]->annotator_id) {
      throw InputError(fmt::format("pair '{}' annotated twice by '{}'", id,
                                   anns[0]->annotator_id));
    }
    const bool same = anns[0]->label == anns[1]->label;
    agree += same ? 1 : 0;
    if ((same ? 1.0 : 0.0) < gate) rep.flagged.push_back(id);
    freq[anns[0]->label] += 1.0;
    freq[anns[1]->label] += 1.0;
  }
  rep.pairs = by_pair.size();
  const double n = static_cast<double>(rep.pairs);
  rep.raw_agreement = static_cast<double>(agree) / n;
  for (double f : freq) rep.expected_agreement += (f / (2 * n)) * (f / (2 * n));
  if (rep.expected_agreement >= 1.0 - 1e-15) {
    rep.kappa_defined = false;
    rep.kappa = 0.0;
  } else {
    rep.kappa = (rep.raw_agreement - rep.expected_agreement) /
                (1.0 - rep.expected_agreement);
  }
  rep.meets_gate = rep.raw_agreement >= gate;
  return rep;
}

// --- Export ---

std::string_view ToString(ExportMode mode) {
  switch (mode) {
    case ExportMode::kRl:
      return "rl";
    case ExportMode::kColdStart:
      return "coldstart";
    case ExportMode::kDistill:
      return "distill";
  }
  return "?";
}

ExportMode ExportModeFromString(std::string_view name) {
  for (ExportMode m :
       {ExportMode::kRl, ExportMode::kColdStart, ExportMode::kDistill}) {
    if (ToString(m) == name) return m;
  }
  throw InputError("unknown export mode '" + std::string(name) +
                   "' (expected rl, coldstart or distill)");
}

ExportRecord ExportRecordFromJson(const nlohmann::json& j) {
  ExportRecord r;
  r.pair = QueryDocPairFromJson(j);
  if (j.contains("teacher_response") && j["teacher_response"].is_string()) {
    r.teacher_response = j["teacher_response"].get<std::string>();
  }
  if (j.contains("score_probs") && j["score_probs"].is_array()) {
    r.score_probs.emplace();
    for (const auto& v : j["score_probs"]) {
      if (!v.is_number()) {
        r.score_probs.reset();
        break;
      }
      r.score_probs->push_back(v.get<double>());
    }
  }
  return r;
}

namespace {

constexpr double kProbTolerance = 1e-3;

std::optional<std::string> ExportOne(const ExportRecord& r, ExportMode mode,
                                     nlohmann::json& out) {
  if (r.pair.query.empty()) return "empty query";
  switch (mode) {
    case ExportMode::kRl:
      if (!r.pair.gold) return "missing gold label";
      if (!IsValidLabel(*r.pair.gold)) return "gold label out of range";
      out = ToJson(r.pair);
      return std::nullopt;
    case ExportMode::kColdStart: {
      if (!r.teacher_response || TrimWhitespace(*r.teacher_response).empty()) {
        return "missing teacher response";
      }
      auto messages = RenderUmbrelaPrompt(r.pair.query, r.pair.candidate);
      messages.push_back(Message{Role::kAssistant, *r.teacher_response});
      out = {{"id", r.pair.id}, {"messages", ToJson(messages)}};
      if (r.pair.gold) out["gold"] = *r.pair.gold;
      return std::nullopt;
    }
    case ExportMode::kDistill: {
      if (!r.score_probs) return "missing score_probs";
      const auto& p = *r.score_probs;
      if (p.size() != static_cast<std::size_t>(kNumLabels)) {
        return fmt::format("score_probs has {} entries, expected 3", p.size());
      }
      double sum = 0.0;
      for (double v : p) {
        if (!std::isfinite(v) || v < 0.0) return "score_probs entry not a probability";
        sum += v;
      }
      if (std::abs(sum - 1.0) > kProbTolerance) {
        return fmt::format("score_probs sum to {}, not 1", sum);
      }
      std::vector<double> norm(p);
      for (double& v : norm) v /= sum;
      out = {{"id", r.pair.id},
             {"query", r.pair.query},
             {"doc", r.pair.candidate},
             {"score_probs", norm}};
      return std::nullopt;
    }
  }
  return "unknown mode";
}

}  // namespace

ExportResult BuildExport(std::span<const ExportRecord> records,
                         ExportMode mode) {
  ExportResult res;
  for (const ExportRecord& r : records) {
    nlohmann::json line;
    if (auto err = ExportOne(r, mode, line)) {
      ++res.skipped;
      res.errors.push_back(fmt::format("{}: {}", r.pair.id, *err));
      continue;
    }
    res.jsonl += line.dump();
    res.jsonl += '\n';
    ++res.written;
  }
  return res;
}

ExportResult ExportTrainingFiles(std::span<const ExportRecord> records,
                                 ExportMode mode,
                                 const std::filesystem::path& out) {
  ExportResult res = BuildExport(records, mode);
  WriteFileAtomic(out, res.jsonl);
  return res;
}

}  // namespace reljudge
