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

#include "reljudge/cli.h"

#include <algorithm>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "reljudge/config.h"
#include "reljudge/dataset.h"
#include "reljudge/eval.h"
#include "reljudge/grpo.h"
#include "reljudge/http_backend.h"
#include "reljudge/rollout.h"
#include "reljudge/scripted_backend.h"
#include "reljudge/toy_env.h"
#include "reljudge/toy_policy.h"
#include "reljudge/util.h"

namespace reljudge {

namespace {

namespace fs = std::filesystem;

constexpr int kExitCheckFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitOther = 3;

// Flags shared by every subcommand.
struct CommonFlags {
  std::string preset = "toy-default";
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out_dir;

  void Register(CLI::App* app) {
    app->add_option("--preset", preset, "toy-default or large-model");
    app->add_option("--config", config_file, "key = value config file");
    app->add_option("--set", sets, "override, key=value (repeatable)");
    app->add_option("--seed", seed, "shorthand for --set seed=N");
    app->add_option("--out", out_dir, "shorthand for --set output_dir=DIR");
  }

  RunConfig Resolve() const {
    std::vector<std::string> all = sets;
    if (seed) all.push_back(fmt::format("seed={}", *seed));
    if (!out_dir.empty()) all.push_back("output_dir=" + out_dir);
    std::optional<fs::path> file;
    if (!config_file.empty()) file = config_file;
    return LoadRunConfig(preset, file, all);
  }
};

fs::path OutPath(const RunConfig& c, std::string_view name) {
  return fs::path(c.output_dir) / name;
}

// --- build-dataset ---

struct BuildDatasetFlags {
  std::string log;
  std::string corpus;
  std::string annotations;
};

int BuildDataset(const RunConfig& c, const BuildDatasetFlags& f,
                 std::ostream& out) {
  const auto log = ReadGenerationLog(f.log);
  const CitationPartition part = LabelByCitation(log, c.citation);
  const std::vector<CorpusDoc> corpus =
      f.corpus.empty() ? CorpusFromLog(log) : ReadCorpus(f.corpus);

  AssembleConfig ac;
  ac.random_negative_count = c.random_negatives;
  ac.balance = c.balance;
  ac.train_size = c.train_size;
  ac.seed = c.seed;
  ac.max_aux_docs = c.max_aux_docs;
  DatasetSplits splits = AssembleDataset(part, corpus, ac);

  nlohmann::json summary = {{"log_entries", log.size()},
                            {"rejected_entries", part.rejected},
                            {"positives", part.positives.size()},
                            {"hard_negatives", part.hard_negatives.size()},
                            {"random_negatives", c.random_negatives},
                            {"forwards_required", c.citation.forwards_required},
                            {"citation_threshold", c.citation.citation_threshold},
                            {"seed", c.seed}};

  if (!f.annotations.empty()) {
    if (!c.agreement_gate) {
      throw InputError("agreement.gate must be set when --annotations is given");
    }
    const auto records = ReadAnnotationCsv(f.annotations);
    const AgreementReport rep = AnnotatorAgreement(records, *c.agreement_gate);
    std::map<std::string, std::vector<int>> by_pair;
    for (const auto& r : records) by_pair[r.pair_id].push_back(r.label);
    std::map<std::string, int> agreed;
    for (const auto& [id, labels] : by_pair) {
      if (labels[0] == labels[1]) agreed[id] = labels[0];
    }
    const std::set<std::string> flagged(rep.flagged.begin(), rep.flagged.end());
    std::size_t dropped = 0;
    for (auto* split : {&splits.train, &splits.eval}) {
      ApplyHumanLabels(*split, agreed);
      const auto before = split->size();
      std::erase_if(*split, [&](const LabeledPair& p) {
        return flagged.contains(p.pair.id);
      });
      dropped += before - split->size();
    }
    nlohmann::json agreement = {{"pairs", rep.pairs},
                                {"raw_agreement", rep.raw_agreement},
                                {"expected_agreement", rep.expected_agreement},
                                {"kappa", rep.kappa},
                                {"kappa_defined", rep.kappa_defined},
                                {"gate", *c.agreement_gate},
                                {"meets_gate", rep.meets_gate},
                                {"flagged", rep.flagged}};
    WriteFileAtomic(OutPath(c, "agreement.json"), agreement.dump(2) + "\n");
    summary["human_labels"] = agreed.size();
    summary["dropped_flagged"] = dropped;
    fmt::print(out, "agreement: raw {:.4f}, kappa {:.4f}, {} flagged\n",
               rep.raw_agreement, rep.kappa, rep.flagged.size());
  }

  std::array<std::size_t, kNumLabels> per_class{};
  for (const auto& p : splits.train) ++per_class[*p.pair.gold];
  summary["train_size"] = splits.train.size();
  summary["eval_size"] = splits.eval.size();
  summary["train_per_class"] = per_class;

  WriteFileAtomic(OutPath(c, "train.jsonl"), SplitToJsonl(splits.train));
  WriteFileAtomic(OutPath(c, "eval.jsonl"), SplitToJsonl(splits.eval));
  WriteFileAtomic(OutPath(c, "dataset_summary.json"), summary.dump(2) + "\n");
  fmt::print(out, "train {} (per class {}/{}/{}), eval {}, written to {}\n",
             splits.train.size(), per_class[0], per_class[1], per_class[2],
             splits.eval.size(), c.output_dir);
  return 0;
}

// --- export ---

int Export(const RunConfig& c, const std::string& input,
           const std::string& mode_name, std::string out_file,
           std::ostream& out, std::ostream& err) {
  const ExportMode mode = ExportModeFromString(mode_name);
  std::vector<ExportRecord> records;
  std::size_t line_no = 0;
  for (const std::string& line : ReadLines(input)) {
    ++line_no;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw InputError(fmt::format("{}:{}: invalid JSON", input, line_no));
    }
    records.push_back(ExportRecordFromJson(j));
  }
  if (out_file.empty()) {
    out_file = OutPath(c, fmt::format("{}.jsonl", ToString(mode))).string();
  }
  const ExportResult res = ExportTrainingFiles(records, mode, out_file);
  for (const std::string& e : res.errors) fmt::print(err, "skipped {}\n", e);
  fmt::print(out, "{} records written to {}, {} skipped\n", res.written,
             out_file, res.skipped);
  return 0;
}

// --- rollout ---

struct RolloutFlags {
  std::string pairs;
  std::string backend = "scripted";
  std::string script;
  std::string params;
  bool append = false;
};

int Rollout(const RunConfig& c, const RolloutFlags& f, std::ostream& out) {
  const auto pairs = ReadPairs(f.pairs);
  const RolloutOptions options = c.Rollout();
  SamplingConfig sampling;
  sampling.temperature = c.temperature;
  sampling.max_tokens = c.max_tokens;

  std::unique_ptr<CompletionBackend> shared;
  std::shared_ptr<const ToyPolicyParams> toy_params;
  if (f.backend == "scripted") {
    if (f.script.empty()) throw InputError("--script is required for the scripted backend");
    shared = std::make_unique<ScriptedBackend>(ScriptedBackend::FromFile(f.script));
  } else if (f.backend == "http") {
    shared = std::make_unique<HttpBackend>(c.backend);
  } else if (f.backend == "toy") {
    ToySchema schema;
    schema.buckets = c.toy_buckets;
    toy_params = f.params.empty()
                     ? std::make_shared<const ToyPolicyParams>(schema)
                     : std::make_shared<const ToyPolicyParams>(
                           ToyPolicyParams::FromJson(
                               nlohmann::json::parse(ReadFile(f.params))));
  } else {
    throw InputError("--backend must be scripted, http or toy");
  }

  std::vector<Trajectory> all;
  std::size_t unusable = 0;
  for (const QueryDocPair& pair : pairs) {
    const auto seeds = GroupSeeds(StableHash(fmt::format("{}/{}", c.seed, pair.id)),
                                  c.grpo.group_size);
    GroupRollout g;
    if (toy_params) {
      ToyBackend toy(toy_params,
                     MakeToyInstance(pair.query, pair.candidate, toy_params->schema()),
                     c.protocol);
      g = RunGroup(pair, toy, seeds, sampling, options);
    } else {
      g = RunGroup(pair, *shared, seeds, sampling, options);
    }
    if (!g.usable) ++unusable;
    for (auto& t : g.trajectories) all.push_back(std::move(t));
  }

  const fs::path path = OutPath(c, "trajectories.jsonl");
  if (f.append) {
    AppendTrajectories(path, all);
  } else {
    std::string body;
    for (const Trajectory& t : all) body += ToJson(t).dump() + "\n";
    WriteFileAtomic(path, body);
  }
  std::size_t failed = 0, rewarded = 0;
  double reward_sum = 0.0;
  for (const Trajectory& t : all) {
    if (t.failed()) ++failed;
    if (t.reward) {
      ++rewarded;
      reward_sum += t.reward->total;
    }
  }
  fmt::print(out, "{} trajectories for {} pairs ({} failed, {} unusable groups)",
             all.size(), pairs.size(), failed, unusable);
  if (rewarded) fmt::print(out, ", mean reward {:.4f}", reward_sum / rewarded);
  fmt::print(out, "\nwritten to {}\n", path.string());
  return 0;
}

// --- train-toy ---

int TrainToy(const RunConfig& c, const std::string& pairs_file,
             std::ostream& out) {
  ToySchema schema;
  schema.buckets = c.toy_buckets;
  std::vector<QueryDocPair> pairs = pairs_file.empty()
                                        ? MakeSyntheticPairs(c.toy_pairs, schema, c.seed)
                                        : ReadPairs(pairs_file);
  const ToyTask task = ToyTask::FromPairs(std::move(pairs), schema);

  TrainOptions o;
  o.grpo = c.grpo;
  o.rollout = c.Rollout();
  o.init = c.init;
  o.cold_start = c.cold_start;
  o.seed = c.seed;
  const TrainingLog log = Train(task, o);

  WriteFileAtomic(OutPath(c, "train_log.jsonl"), log.ToJsonl());
  WriteFileAtomic(OutPath(c, "train_log.csv"), log.ToCsv());
  WriteFileAtomic(OutPath(c, "final_params.json"), log.final_params->ToJson().dump() + "\n");

  const auto at8 = log.FirstStepReaching(0.8);
  const auto at9 = log.FirstStepReaching(0.9);
  const auto& last = log.steps.back();
  fmt::print(out, "{} steps on {} pairs, final mean reward {:.4f}\n",
             log.steps.size(), task.pairs.size(), last.mean_reward);
  fmt::print(out, "first step >= 0.8: {}, >= 0.9: {}\n",
             at8 ? fmt::format("{}", *at8) : "never",
             at9 ? fmt::format("{}", *at9) : "never");
  fmt::print(out, "written to {}\n", c.output_dir);
  return 0;
}

// --- check-gradients ---

int CheckGradients(const RunConfig& c, std::size_t instances, double h,
                   std::ostream& out) {
  double worst = 0.0;
  std::size_t coords = 0;
  for (std::size_t i = 0; i < instances; ++i) {
    const GradientInstance inst =
        RandomGradientInstance(StableHash(fmt::format("grad/{}/{}", c.seed, i)));
    for (double beta : {0.0, 1.0}) {
      GrpoConfig g = c.grpo;
      g.beta = beta;
      const GradientCheckResult r = FiniteDiffCheck(inst.params, inst.groups, g, h);
      worst = std::max(worst, r.max_relative_error);
      coords += r.coordinates;
    }
  }
  constexpr double kTolerance = 1e-4;
  fmt::print(out, "max relative error {:.3e} over {} coordinates ({} instances, "
                  "beta 0 and 1, h {})\n",
             worst, coords, instances, h);
  if (worst > kTolerance) {
    fmt::print(out, "FAILED: exceeds {}\n", kTolerance);
    return kExitCheckFailed;
  }
  return 0;
}

// --- reward-audit ---

int RewardAudit(const RunConfig& c, const std::string& path, std::ostream& out) {
  const auto trajectories = ReadTrajectories(path);
  std::size_t checked = 0, mismatches = 0, skipped = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const Trajectory& t = trajectories[i];
    if (t.failed() || !t.gold) {
      ++skipped;
      continue;
    }
    ++checked;
    RewardConfig rc = c.reward;
    if (t.reward) rc.lambda = t.reward->lambda;
    const RewardBreakdown again = TotalReward(t, t.gold, rc);
    if (!t.reward || !(*t.reward == again)) {
      ++mismatches;
      fmt::print(out, "mismatch: line {} pair {} seed {}: stored {}, recomputed {}\n",
                 i + 1, t.pair_id, t.seed,
                 t.reward ? ToJson(*t.reward).dump() : std::string("none"),
                 ToJson(again).dump());
    }
  }
  fmt::print(out, "{} trajectories checked, {} skipped, {} mismatches\n",
             checked, skipped, mismatches);
  return mismatches ? kExitCheckFailed : 0;
}

// --- evaluate ---

struct EvaluateFlags {
  std::string preds;
  std::string gsb;
  std::string sessions_before;
  std::string sessions_after;
  std::optional<double> rate_before;
  std::optional<double> rate_after;
};

GsbCounts ParseGsb(const std::string& text) {
  GsbCounts g;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> g.good >> c1 >> g.same >> c2 >> g.bad) || c1 != ':' || c2 != ':' ||
      in.peek() != std::char_traits<char>::eof()) {
    throw InputError("--gsb expects good:same:bad, e.g. 23:71:6");
  }
  return g;
}

int Evaluate(const RunConfig& c, const EvaluateFlags& f, std::ostream& out) {
  if (f.preds.empty() && f.gsb.empty() && f.sessions_before.empty() &&
      !f.rate_before) {
    throw InputError("evaluate needs --preds, --gsb or re-query inputs");
  }
  nlohmann::json j;
  std::string text;
  if (!f.preds.empty()) {
    const auto preds = ReadPredictions(f.preds);
    const MetricReport report = ClassificationReport(preds);
    j["classification"] = report.ToJson();
    text += report.ToTable();
  }
  if (!f.gsb.empty()) {
    const GsbCounts g = ParseGsb(f.gsb);
    const double delta = GsbDelta(g);
    j["gsb"] = {{"good", g.good}, {"same", g.same}, {"bad", g.bad},
                {"delta_percent", delta}};
    text += fmt::format("GSB {}:{}:{} -> {:+.1f}%\n", g.good, g.same, g.bad, delta);
  }
  std::optional<double> before = f.rate_before, after = f.rate_after;
  if (!f.sessions_before.empty()) {
    before = RequeryRate(ReadSessions(f.sessions_before), c.requery_window);
  }
  if (!f.sessions_after.empty()) {
    after = RequeryRate(ReadSessions(f.sessions_after), c.requery_window);
  }
  if (before && after) {
    const RequeryChange ch = CompareRequery(*before, *after);
    j["requery"] = {{"window_seconds", c.requery_window},
                    {"before", ch.before},
                    {"after", ch.after},
                    {"absolute_reduction_points", ch.absolute_points},
                    {"relative_reduction_percent", ch.relative_percent}};
    text += fmt::format(
        "re-query rate {:.4f} -> {:.4f}: {:.2f} points absolute, {:.2f}% "
        "relative reduction\n",
        ch.before, ch.after, ch.absolute_points, ch.relative_percent);
  } else if (before || after) {
    j["requery"] = {{"window_seconds", c.requery_window},
                    {"rate", before ? *before : *after}};
    text += fmt::format("re-query rate {:.4f} (window {} s)\n",
                        before ? *before : *after, c.requery_window);
  }
  WriteFileAtomic(OutPath(c, "metrics.json"), j.dump(2) + "\n");
  WriteFileAtomic(OutPath(c, "metrics.txt"), text);
  out << text;
  return 0;
}

// --- report ---

int Report(const RunConfig& c, const std::string& log_path, std::string csv,
           std::ostream& out) {
  const TrainingLog log = ReadTrainingLog(log_path);
  if (log.steps.empty()) throw InputError(log_path + ": empty training log");
  if (csv.empty()) csv = OutPath(c, "report.csv").string();
  WriteFileAtomic(csv, log.ToCsv());

  const std::size_t n = log.steps.size();
  const std::size_t w = std::min<std::size_t>(20, n);
  double tail_reward = 0.0, tail_tokens = 0.0;
  for (std::size_t i = n - w; i < n; ++i) {
    tail_reward += log.steps[i].mean_reward / w;
    tail_tokens += log.steps[i].mean_token_count / w;
  }
  fmt::print(out, "{} steps; reward {:.4f} -> {:.4f} (last {} mean); "
                  "mean tokens {:.2f} -> {:.2f}\n",
             n, log.steps.front().mean_reward, tail_reward, w,
             log.steps.front().mean_token_count, tail_tokens);
  for (double th : {0.5, 0.8, 0.9}) {
    const auto s = log.FirstStepReaching(th);
    fmt::print(out, "first step with mean reward >= {}: {}\n", th,
               s ? fmt::format("{}", *s) : "never");
  }
  fmt::print(out, "series written to {}\n", csv);
  return 0;
}

}  // namespace

int RunCommand(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  CLI::App app{"Relevance judging with decomposed two-round reasoning"};
  app.name("reljudge");
  app.require_subcommand(1);

  std::vector<std::pair<CLI::App*, std::unique_ptr<CommonFlags>>> subs;
  auto add = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    auto flags = std::make_unique<CommonFlags>();
    flags->Register(s);
    subs.emplace_back(s, std::move(flags));
    return s;
  };

  BuildDatasetFlags bd;
  CLI::App* build = add("build-dataset", "generation log -> labeled splits");
  build->add_option("--log", bd.log, "generation log JSONL")->required();
  build->add_option("--corpus", bd.corpus, "corpus JSONL {doc_id, text}");
  build->add_option("--annotations", bd.annotations, "annotation CSV");

  std::string ex_input, ex_mode, ex_out;
  CLI::App* exp = add("export", "records -> training JSONL");
  exp->add_option("--input", ex_input, "records JSONL")->required();
  exp->add_option("--mode", ex_mode, "rl, coldstart or distill")->required();
  exp->add_option("--file", ex_out, "output file (default <out>/<mode>.jsonl)");

  RolloutFlags rf;
  CLI::App* roll = add("rollout", "pairs + backend -> trajectories");
  roll->add_option("--pairs", rf.pairs, "pairs JSONL")->required();
  roll->add_option("--backend", rf.backend, "scripted, http or toy");
  roll->add_option("--script", rf.script, "script table JSON");
  roll->add_option("--params", rf.params, "toy parameters JSON");
  roll->add_flag("--append", rf.append, "append to trajectories.jsonl");

  std::string train_pairs;
  CLI::App* train = add("train-toy", "GRPO on the toy policy");
  train->add_option("--pairs", train_pairs, "pairs JSONL (default: synthetic)");

  std::size_t grad_instances = 8;
  double grad_h = 1e-5;
  CLI::App* grad = add("check-gradients", "analytic vs numeric gradient");
  grad->add_option("--instances", grad_instances, "random instances");
  grad->add_option("--step", grad_h, "finite-difference step");

  std::string audit_path;
  CLI::App* audit = add("reward-audit", "recompute stored rewards");
  audit->add_option("--trajectories", audit_path, "trajectories JSONL")->required();

  EvaluateFlags ef;
  CLI::App* eval = add("evaluate", "metrics report");
  eval->add_option("--preds", ef.preds, "predictions JSONL");
  eval->add_option("--gsb", ef.gsb, "good:same:bad counts");
  eval->add_option("--sessions-before", ef.sessions_before, "session log JSONL");
  eval->add_option("--sessions-after", ef.sessions_after, "session log JSONL");
  eval->add_option("--rate-before", ef.rate_before, "re-query rate");
  eval->add_option("--rate-after", ef.rate_after, "re-query rate");

  std::string report_log, report_csv;
  CLI::App* report = add("report", "training log -> CSV and summary");
  report->add_option("--log", report_log, "train_log.jsonl")->required();
  report->add_option("--csv", report_csv, "CSV path (default <out>/report.csv)");

  CLI::App* show = add("show-config", "print the resolved configuration");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : kExitBadInput;
  }

  try {
    for (auto& [sub, flags] : subs) {
      if (!sub->parsed()) continue;
      const RunConfig c = flags->Resolve();
      if (sub == build) return BuildDataset(c, bd, out);
      if (sub == exp) return Export(c, ex_input, ex_mode, ex_out, out, err);
      if (sub == roll) return Rollout(c, rf, out);
      if (sub == train) return TrainToy(c, train_pairs, out);
      if (sub == grad) return CheckGradients(c, grad_instances, grad_h, out);
      if (sub == audit) return RewardAudit(c, audit_path, out);
      if (sub == eval) return Evaluate(c, ef, out);
      if (sub == report) return Report(c, report_log, report_csv, out);
      if (sub == show) {
        out << DumpConfig(c);
        return 0;
      }
    }
  } catch (const InputError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitBadInput;
  } catch (const DataError& e) {
    fmt::print(err, "data error: {}\n", e.what());
    return kExitBadInput;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitOther;
  }
  return kExitBadInput;
}

int RunCommand(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return RunCommand(args, std::cout, std::cerr);
}

}  // namespace reljudge
