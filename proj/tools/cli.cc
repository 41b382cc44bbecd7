// Copyright 2026 The DCMH Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dcmh/binary_io.h"
#include "dcmh/dataset.h"
#include "dcmh/errors.h"
#include "dcmh/evaluate.h"
#include "dcmh/model.h"
#include "dcmh/parallel.h"
#include "dcmh/retrieval.h"
#include "dcmh/trainer.h"
#include "json.hpp"

#ifndef DCMH_VERSION
#define DCMH_VERSION "unknown"
#endif

namespace dcmh {
namespace {

using nlohmann::json;

// Bad flag values or flag combinations found before any output is written.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr int kCsvDigits = std::numeric_limits<double>::max_digits10;

void WriteText(const std::string& path, const std::string& text) {
  WriteFileBytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string ReadText(const std::string& path) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  return std::string(bytes.begin(), bytes.end());
}

// Refuses to overwrite any input.
void CheckDistinct(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  namespace fs = std::filesystem;
  std::vector<fs::path> seen;
  for (const std::string& in : inputs) {
    if (!in.empty()) seen.push_back(fs::weakly_canonical(in));
  }
  for (const std::string& out : outputs) {
    if (out.empty()) continue;
    const fs::path p = fs::weakly_canonical(out);
    for (const fs::path& q : seen) {
      if (p == q) throw UsageError("output path " + out + " is also an input");
    }
    seen.push_back(p);
  }
}

json Versions() {
  return {{"dcmh", DCMH_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"cli11", CLI11_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"compiler", __VERSION__}};
}

// Every option of `sub` with its parsed or default value.
json FlagSet(const CLI::App& sub) {
  json flags = json::object();
  for (const CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help") continue;
    const CLI::results_t& results = opt->results();
    if (results.empty()) {
      if (!opt->get_default_str().empty()) flags[name] = opt->get_default_str();
    } else if (results.size() == 1) {
      flags[name] = results.front();
    } else {
      flags[name] = results;
    }
  }
  return flags;
}

template <typename Write>
void WriteCsv(const std::string& path, Write&& write) {
  std::ostringstream s;
  s.precision(kCsvDigits);
  write(s);
  WriteText(path, s.str());
}

// --- synth ---

struct SynthArgs {
  std::uint32_t n = 0;
  std::uint32_t m = 0;
  std::uint32_t d_x = 64;
  std::uint32_t d_y = 64;
  std::uint32_t labels_min = 1;
  std::uint32_t labels_max = 3;
  double spread = 0.2;
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::size_t> split;
  std::string train_out;
  std::string retrieval_out;
  std::string test_out;
};

void AddSynth(CLI::App& app, SynthArgs& a) {
  CLI::App* s = app.add_subcommand("synth", "Generate a synthetic multi-label dataset");
  s->add_option("--n", a.n, "Instances")->required();
  s->add_option("--m", a.m, "Categories")->required();
  s->add_option("--dx", a.d_x, "Text feature dimension")->capture_default_str();
  s->add_option("--dy", a.d_y, "Image feature dimension")->capture_default_str();
  s->add_option("--labels-min", a.labels_min, "Fewest labels per instance")->capture_default_str();
  s->add_option("--labels-max", a.labels_max, "Most labels per instance")->capture_default_str();
  s->add_option("--spread", a.spread, "Feature noise scale")->capture_default_str();
  s->add_option("--seed", a.seed, "Generator seed")->required();
  s->add_option("--out", a.out, "Dataset file for all instances");
  s->add_option("--split", a.split, "train,retrieval,test counts")->delimiter(',')->expected(3);
  s->add_option("--train-out", a.train_out, "Train slice file (with --split)");
  s->add_option("--retrieval-out", a.retrieval_out, "Retrieval slice file (with --split)");
  s->add_option("--test-out", a.test_out, "Test slice file (with --split)");
}

json RunSynth(const SynthArgs& a) {
  const bool split = !a.split.empty();
  if (a.out.empty() && !split) throw UsageError("synth needs --out or --split");
  if (split && (a.train_out.empty() || a.retrieval_out.empty() || a.test_out.empty())) {
    throw UsageError("--split needs --train-out, --retrieval-out and --test-out");
  }
  if (!split && !(a.train_out.empty() && a.retrieval_out.empty() && a.test_out.empty())) {
    throw UsageError("slice outputs need --split");
  }
  if (split && a.split[0] + a.split[1] + a.split[2] > a.n) {
    throw UsageError("--split counts exceed --n");
  }
  CheckDistinct({}, {a.out, a.train_out, a.retrieval_out, a.test_out});
  SyntheticConfig c;
  c.n = a.n;
  c.m = a.m;
  c.d_x = a.d_x;
  c.d_y = a.d_y;
  c.labels_per_instance = {a.labels_min, a.labels_max};
  c.cluster_spread = a.spread;
  c.seed = a.seed;
  Dataset ds;
  try {
    ds = GenerateSynthetic(c);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  json outputs = json::array();
  if (!a.out.empty()) {
    SaveDataset(ds, a.out);
    outputs.push_back(a.out);
  }
  if (split) {
    const DatasetSplits s = SplitDataset(ds, a.split[0], a.split[1], a.split[2]);
    SaveDataset(s.train, a.train_out);
    SaveDataset(s.retrieval, a.retrieval_out);
    SaveDataset(s.test, a.test_out);
    outputs.push_back(a.train_out);
    outputs.push_back(a.retrieval_out);
    outputs.push_back(a.test_out);
  }
  return {{"n", ds.n()}, {"m", ds.m}, {"d_x", ds.d_x}, {"d_y", ds.d_y}, {"outputs", outputs},
          {"seeds", {{"seed", a.seed}}}};
}

// --- inject ---

struct InjectArgs {
  double tau = 0.0;
  std::string in;
  std::string out;
  std::string mask;
  std::uint64_t seed = 0;
};

void AddInject(CLI::App& app, InjectArgs& a) {
  CLI::App* s = app.add_subcommand("inject", "Corrupt a fraction of a dataset's labels");
  s->add_option("--tau", a.tau, "Fraction of instances to corrupt")->required()->check(CLI::Range(0.0, 1.0));
  s->add_option("--in", a.in, "Clean dataset")->required();
  s->add_option("--out", a.out, "Noisy dataset")->required();
  s->add_option("--mask", a.mask, "Noise mask output");
  s->add_option("--seed", a.seed, "Corruption seed")->required();
}

json RunInject(const InjectArgs& a) {
  CheckDistinct({a.in}, {a.out, a.mask});
  const Dataset ds = LoadDataset(a.in);
  const NoisyDataset noisy = InjectNoise(ds, a.tau, a.seed);
  SaveDataset(noisy.data, a.out);
  if (!a.mask.empty()) SaveNoiseMask(noisy.mask, a.mask);
  json by_type = json::object();
  for (int t = 1; t <= 4; ++t) by_type[std::to_string(t)] = noisy.mask.CountOfType(t);
  return {{"n", ds.n()},
          {"corrupted", noisy.mask.NumCorrupted()},
          {"by_type", by_type},
          {"seeds", {{"seed", a.seed}}}};
}

// --- train ---

struct TrainArgs {
  std::string config;
  std::string data;
  std::string ckpt;
  std::string init;
  std::string mask;
  bool warmup_only = false;
  std::string report_csv;
  std::string report_json;
  std::string filter_csv;
  std::string corrector_csv;
  std::string loss_csv;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint32_t> epochs;
  std::optional<std::uint32_t> warmup_epochs;
  std::optional<std::uint32_t> batch_size;
  std::optional<double> learning_rate;
  std::optional<double> tau;
  std::optional<std::string> variant;
  std::optional<std::uint32_t> hidden;
  std::optional<std::uint32_t> fusion;
  std::optional<std::uint32_t> bits;
  std::optional<double> pointwise_weight;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> gamma;
  std::optional<double> eta;
  std::optional<double> margin;
  std::optional<std::string> filter_scope;
  std::optional<std::string> donor_scope;
  std::optional<std::size_t> donor_cache;
};

// Flags shared by train and sweep that override the JSON config.
void AddConfigFlags(CLI::App* s, TrainArgs& a) {
  s->add_option("--config", a.config, "JSON training config");
  s->add_option("--epochs", a.epochs, "Epochs, warm-up included");
  s->add_option("--warmup-epochs", a.warmup_epochs, "Warm-up epochs");
  s->add_option("--batch-size", a.batch_size, "Mini-batch size");
  s->add_option("--lr", a.learning_rate, "SGD learning rate");
  s->add_option("--tau", a.tau, "Assumed noisy-label ratio");
  s->add_option("--variant", a.variant, "full, I, R, U or RU")
      ->check(CLI::IsMember({"full", "I", "R", "U", "RU"}));
  s->add_option("--hidden", a.hidden, "Hidden width per modality");
  s->add_option("--fusion", a.fusion, "Fusion width");
  s->add_option("--bits", a.bits, "Code length");
  s->add_option("--pointwise-weight", a.pointwise_weight, "Pointwise loss weight");
  s->add_option("--alpha", a.alpha, "Pairwise loss weight");
  s->add_option("--beta", a.beta, "Contrastive loss weight");
  s->add_option("--gamma", a.gamma, "Center loss weight");
  s->add_option("--eta", a.eta, "Quantization loss weight");
  s->add_option("--margin", a.margin, "Contrastive margin");
  s->add_option("--filter-scope", a.filter_scope, "batch or global")
      ->check(CLI::IsMember({"batch", "global"}));
  s->add_option("--donor-scope", a.donor_scope, "batch or cache")
      ->check(CLI::IsMember({"batch", "cache"}));
  s->add_option("--donor-cache", a.donor_cache, "Donor cache capacity");
}

void AddTrain(CLI::App& app, TrainArgs& a) {
  CLI::App* s = app.add_subcommand("train", "Train a hashing model on a (noisy) dataset");
  AddConfigFlags(s, a);
  s->add_option("--seed", a.seed, "Init, shuffle and augmentation seed");
  s->add_option("--data", a.data, "Training dataset")->required();
  s->add_option("--ckpt", a.ckpt, "Checkpoint output")->required();
  s->add_option("--init", a.init, "Start from this checkpoint instead of a seeded init");
  s->add_option("--mask", a.mask, "Noise mask for audit figures only");
  s->add_flag("--warmup-only", a.warmup_only, "Stop after the warm-up epochs");
  s->add_option("--report-csv", a.report_csv, "Per-epoch report CSV");
  s->add_option("--report-json", a.report_json, "Per-epoch report JSON");
  s->add_option("--filter-csv", a.filter_csv, "Per-instance filter log");
  s->add_option("--corrector-csv", a.corrector_csv, "Per-instance corrector log");
  s->add_option("--loss-csv", a.loss_csv, "Per-batch loss log");
}

// Config file first, flags on top. `require_seed`/`require_tau` demand the
// value from one of the two layers.
TrainConfig ResolveConfig(const TrainArgs& a, bool require_seed, bool require_tau) {
  json j = json::object();
  if (!a.config.empty()) {
    try {
      j = json::parse(ReadText(a.config));
    } catch (const json::exception& e) {
      throw UsageError(a.config + ": " + e.what());
    }
  }
  TrainConfig c;
  try {
    c = ConfigFromJson(j, false);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string(a.config) + ": " + e.what());
  }
  if (require_seed && !a.seed && !j.contains("seed")) {
    throw UsageError("a seed is required (--seed or \"seed\" in the config)");
  }
  if (require_tau && !a.tau && !j.contains("tau")) {
    throw UsageError("tau is required (--tau or \"tau\" in the config)");
  }
  if (a.seed) c.seed = *a.seed;
  if (a.epochs) c.epochs = *a.epochs;
  if (a.warmup_epochs) c.warmup_epochs = *a.warmup_epochs;
  if (a.batch_size) c.batch_size = *a.batch_size;
  if (a.learning_rate) c.learning_rate = *a.learning_rate;
  if (a.tau) c.tau = *a.tau;
  if (a.variant) c.variant = ParseVariant(*a.variant);
  if (a.hidden) c.hidden = *a.hidden;
  if (a.fusion) c.fusion = *a.fusion;
  if (a.bits) c.bits = *a.bits;
  if (a.pointwise_weight) c.loss.pointwise_weight = *a.pointwise_weight;
  if (a.alpha) c.loss.alpha = *a.alpha;
  if (a.beta) c.loss.beta = *a.beta;
  if (a.gamma) c.loss.gamma = *a.gamma;
  if (a.eta) c.loss.eta = *a.eta;
  if (a.margin) c.loss.contrastive_margin = *a.margin;
  if (a.filter_scope) c.filter_scope = *a.filter_scope == "global" ? FilterScope::kGlobal : FilterScope::kBatch;
  if (a.donor_scope) c.donor_scope = *a.donor_scope == "cache" ? DonorScope::kCache : DonorScope::kBatch;
  if (a.donor_cache) c.donor_cache_size = *a.donor_cache;
  try {
    c.Validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

json RunTrain(const TrainArgs& a, std::ostream& err) {
  const TrainConfig config = ResolveConfig(a, true, true);
  CheckDistinct({a.config, a.data, a.init, a.mask},
                {a.ckpt, a.report_csv, a.report_json, a.filter_csv, a.corrector_csv, a.loss_csv});
  if (a.warmup_only &&
      !(a.report_csv.empty() && a.report_json.empty() && a.filter_csv.empty() &&
        a.corrector_csv.empty() && a.loss_csv.empty())) {
    throw UsageError("--warmup-only writes only the checkpoint");
  }
  const Dataset data = LoadDataset(a.data);
  std::optional<NoiseMask> mask;
  if (!a.mask.empty()) {
    mask = LoadNoiseMask(a.mask);
    if (mask->n() != data.n() || mask->m != data.m) {
      throw std::runtime_error(a.mask + ": mask does not match " + a.data);
    }
  }
  ModelParams init = a.init.empty() ? InitParams(config.ShapeFor(data), config.seed) : LoadCheckpoint(a.init);
  if (!a.init.empty() && !(init.Shape() == config.ShapeFor(data))) {
    throw std::runtime_error(a.init + ": checkpoint shape does not match the config and data");
  }

  json result = {{"config", ConfigToJson(config)}, {"seeds", {{"seed", config.seed}}}};
  if (a.warmup_only) {
    SaveCheckpoint(Warmup(std::move(init), data, config), a.ckpt);
    result["epochs_run"] = config.warmup_epochs;
    result["ckpt"] = a.ckpt;
    return result;
  }

  std::ostringstream filter_log, corrector_log, loss_log;
  TrainDiagnostics diag;
  if (!a.filter_csv.empty()) diag.filter_csv = &filter_log;
  if (!a.corrector_csv.empty()) diag.corrector_csv = &corrector_log;
  if (!a.loss_csv.empty()) diag.loss_csv = &loss_log;
  const TrainResult r = Train(std::move(init), data, config, mask ? &*mask : nullptr, diag);

  for (const EpochRecord& e : r.report.epochs) {
    err << "epoch " << e.epoch << (e.warmup ? " (warm-up)" : "") << " loss " << e.mean_loss.total
        << " flagged " << e.flagged << " corrected " << e.corrected << " unlabeled " << e.unlabeled
        << " dropped " << e.dropped << '\n';
  }
  SaveCheckpoint(r.params, a.ckpt);
  if (!a.report_csv.empty()) WriteCsv(a.report_csv, [&](std::ostream& s) { WriteReportCsv(r.report, s); });
  if (!a.report_json.empty()) WriteText(a.report_json, ReportToJson(r.report).dump(2) + "\n");
  if (!a.filter_csv.empty()) WriteText(a.filter_csv, filter_log.str());
  if (!a.corrector_csv.empty()) WriteText(a.corrector_csv, corrector_log.str());
  if (!a.loss_csv.empty()) WriteText(a.loss_csv, loss_log.str());

  const EpochRecord& last = r.report.epochs.back();
  result["epochs_run"] = r.report.epochs.size();
  result["final_loss"] = last.mean_loss.total;
  result["final_flagged"] = last.flagged;
  result["ckpt"] = a.ckpt;
  return result;
}

// --- eval ---

struct EvalArgs {
  std::string ckpt;
  std::string retrieval;
  std::string test;
  std::vector<std::size_t> pn;
  std::string pr_mode = "radius";
  std::vector<std::size_t> pr_cutoffs;
  std::string ap_csv;
  std::string pn_csv;
  std::string pr_csv;
  std::string index_out;
};

void AddEval(CLI::App& app, EvalArgs& a) {
  CLI::App* s = app.add_subcommand("eval", "Hamming-ranking evaluation of a checkpoint");
  s->add_option("--ckpt", a.ckpt, "Checkpoint")->required();
  s->add_option("--retrieval", a.retrieval, "Database set")->required();
  s->add_option("--test", a.test, "Query set")->required();
  s->add_option("--pn", a.pn, "Precision@N cutoffs, comma separated")->delimiter(',');
  s->add_option("--pr-mode", a.pr_mode, "PR curve by Hamming radius or by rank")
      ->check(CLI::IsMember({"radius", "rank"}))
      ->capture_default_str();
  s->add_option("--pr-cutoffs", a.pr_cutoffs, "Rank cutoffs for --pr-mode rank")->delimiter(',');
  s->add_option("--ap-csv", a.ap_csv, "Per-query average precision");
  s->add_option("--pn-csv", a.pn_csv, "Precision@N table");
  s->add_option("--pr-csv", a.pr_csv, "Precision-recall table");
  s->add_option("--index-out", a.index_out, "Packed index of the database codes");
}

json RunEval(const EvalArgs& a) {
  const bool by_rank = a.pr_mode == "rank";
  if (by_rank && a.pr_cutoffs.empty()) throw UsageError("--pr-mode rank needs --pr-cutoffs");
  if (!by_rank && !a.pr_cutoffs.empty()) throw UsageError("--pr-cutoffs needs --pr-mode rank");
  if (!a.pn_csv.empty() && a.pn.empty()) throw UsageError("--pn-csv needs --pn");
  for (std::size_t v : a.pn) {
    if (v == 0) throw UsageError("--pn cutoffs must be positive");
  }
  for (std::size_t v : a.pr_cutoffs) {
    if (v == 0) throw UsageError("--pr-cutoffs must be positive");
  }
  CheckDistinct({a.ckpt, a.retrieval, a.test}, {a.ap_csv, a.pn_csv, a.pr_csv, a.index_out});

  const ModelParams params = LoadCheckpoint(a.ckpt);
  const Dataset retrieval = LoadDataset(a.retrieval);
  const Dataset test = LoadDataset(a.test);
  EvalOptions options;
  options.pn_cutoffs = a.pn;
  options.pr_by_rank = by_rank;
  options.pr_rank_cutoffs = a.pr_cutoffs;
  EvalResult r;
  try {
    r = Evaluate(params, retrieval, test, options);
  } catch (const std::invalid_argument& e) {
    // Shape mismatches between files are runtime errors, not usage errors.
    throw std::runtime_error(e.what());
  }

  if (!a.ap_csv.empty()) {
    WriteCsv(a.ap_csv, [&](std::ostream& s) {
      s << "query,ap\n";
      for (std::size_t q = 0; q < r.average_precision.size(); ++q) {
        s << q << ',' << r.average_precision[q] << '\n';
      }
    });
  }
  if (!a.pn_csv.empty()) {
    WriteCsv(a.pn_csv, [&](std::ostream& s) {
      s << "n,precision\n";
      for (std::size_t i = 0; i < r.pn_cutoffs.size(); ++i) {
        s << r.pn_cutoffs[i] << ',' << r.precision_at_n[i] << '\n';
      }
    });
  }
  if (!a.pr_csv.empty()) {
    WriteCsv(a.pr_csv, [&](std::ostream& s) {
      s << (by_rank ? "rank" : "radius") << ",precision,recall\n";
      for (const PrPoint& p : r.pr) s << p.cutoff << ',' << p.precision << ',' << p.recall << '\n';
    });
  }
  if (!a.index_out.empty()) r.index.Save(a.index_out);

  json pn = json::object();
  for (std::size_t i = 0; i < r.pn_cutoffs.size(); ++i) {
    pn[std::to_string(r.pn_cutoffs[i])] = r.precision_at_n[i];
  }
  return {{"map", r.map},
          {"queries", test.n()},
          {"database", retrieval.n()},
          {"bits", r.index.bits()},
          {"precision_at_n", pn}};
}

// --- sweep ---

struct SweepArgs {
  TrainArgs base;
  std::string train;
  std::string retrieval;
  std::string test;
  std::string parameter;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::string out;
};

void AddSweep(CLI::App& app, SweepArgs& a) {
  CLI::App* s = app.add_subcommand("sweep", "Inject, train and score MAP over a parameter grid");
  AddConfigFlags(s, a.base);
  s->add_option("--train", a.train, "Clean training set")->required();
  s->add_option("--retrieval", a.retrieval, "Database set")->required();
  s->add_option("--test", a.test, "Query set")->required();
  s->add_option("--param", a.parameter, "Swept parameter")
      ->required()
      ->check(CLI::IsMember(
          {"tau", "alpha", "beta", "gamma", "eta", "learning_rate", "contrastive_margin"}));
  s->add_option("--values", a.values, "Grid values, comma separated")->required()->delimiter(',');
  s->add_option("--seeds", a.seeds, "Seeds, comma separated")->required()->delimiter(',');
  s->add_option("--out", a.out, "Sweep CSV")->required();
}

json RunSweep(const SweepArgs& a) {
  // The swept parameter may be tau itself, so the base needs neither.
  const TrainConfig base = ResolveConfig(a.base, false, a.parameter != "tau");
  CheckDistinct({a.base.config, a.train, a.retrieval, a.test}, {a.out});
  const Dataset train = LoadDataset(a.train);
  const Dataset retrieval = LoadDataset(a.retrieval);
  const Dataset test = LoadDataset(a.test);
  const std::vector<SweepCell> cells = Sweep(train, retrieval, test, base, a.parameter, a.values, a.seeds);
  WriteCsv(a.out, [&](std::ostream& s) { WriteSweepCsv(cells, s); });

  json mean = json::array();
  std::size_t failed = 0;
  for (double v : a.values) {
    double sum = 0.0;
    std::size_t ok = 0;
    for (const SweepCell& c : cells) {
      if (c.value != v) continue;
      if (c.ok) {
        sum += c.map;
        ++ok;
      }
    }
    mean.push_back({{"value", v}, {"mean_map", ok ? json(sum / static_cast<double>(ok)) : json(nullptr)}});
  }
  for (const SweepCell& c : cells) failed += !c.ok;
  return {{"parameter", a.parameter},
          {"cells", cells.size()},
          {"failed", failed},
          {"mean_map", mean},
          {"seeds", {{"seeds", a.seeds}}}};
}

// --- boxplot ---

struct BoxplotArgs {
  std::string ckpt;
  std::string data;
  std::string mask;
  std::string codes = "relaxed";
  std::string out;
};

void AddBoxplot(CLI::App& app, BoxplotArgs& a) {
  CLI::App* s = app.add_subcommand("boxplot", "Quartiles of in- and out-of-category center scores");
  s->add_option("--ckpt", a.ckpt, "Checkpoint")->required();
  s->add_option("--data", a.data, "Dataset")->required();
  s->add_option("--mask", a.mask, "Noise mask separating clean and noisy rows");
  s->add_option("--codes", a.codes, "Score relaxed or binary codes")
      ->check(CLI::IsMember({"relaxed", "binary"}))
      ->capture_default_str();
  s->add_option("--out", a.out, "Quartile CSV");
}

json RunBoxplot(const BoxplotArgs& a, std::ostream& err) {
  CheckDistinct({a.ckpt, a.data, a.mask}, {a.out});
  const ModelParams params = LoadCheckpoint(a.ckpt);
  const Dataset data = LoadDataset(a.data);
  const ModelShape shape = params.Shape();
  if (data.d_x != shape.d_x || data.d_y != shape.d_y || data.m != shape.categories) {
    throw std::runtime_error(a.data + " does not match the checkpoint dimensions");
  }
  std::optional<NoiseMask> mask;
  if (!a.mask.empty()) {
    mask = LoadNoiseMask(a.mask);
    if (mask->n() != data.n()) throw std::runtime_error(a.mask + ": mask does not match " + a.data);
  }
  Eigen::MatrixXd codes = RelaxedCodes(params, data);
  if (a.codes == "binary") codes = codes.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  std::vector<Label> labels;
  labels.reserve(data.n());
  for (const Instance& inst : data.instances) labels.push_back(inst.label);
  const BoxplotReport report = BoxplotStats(codes, params.centers, labels, mask ? &*mask : nullptr);
  for (const std::string& name : report.omitted) err << "group " << name << " is empty, omitted\n";

  if (!a.out.empty()) {
    WriteCsv(a.out, [&](std::ostream& s) {
      s << "group,count,min,q1,median,q3,max\n";
      for (const BoxplotGroup& g : report.groups) {
        s << BoxplotGroupName(g) << ',' << g.stats.count << ',' << g.stats.min << ',' << g.stats.q1
          << ',' << g.stats.median << ',' << g.stats.q3 << ',' << g.stats.max << '\n';
      }
    });
  }
  json groups = json::object();
  for (const BoxplotGroup& g : report.groups) {
    groups[BoxplotGroupName(g)] = {{"count", g.stats.count}, {"median", g.stats.median}};
  }
  return {{"codes", a.codes}, {"groups", groups}, {"omitted", report.omitted}};
}

// --- inspect ---

json InspectFile(const std::string& path) {
  const std::vector<std::uint8_t> bytes = ReadFileBytes(path);
  const std::string magic(bytes.begin(), bytes.begin() + std::min<std::size_t>(4, bytes.size()));
  try {
    if (magic == "DCMH") {
      const Dataset ds = DecodeDataset(bytes);
      double labels = 0.0;
      for (const Instance& inst : ds.instances) {
        for (std::uint8_t v : inst.label) labels += v;
      }
      return {{"type", "dataset"},    {"n", ds.n()},   {"d_x", ds.d_x},
              {"d_y", ds.d_y},        {"m", ds.m},     {"seed", ds.seed},
              {"mean_labels", ds.n() ? labels / static_cast<double>(ds.n()) : 0.0}};
    }
    if (magic == "DCNM") {
      const NoiseMask mask = DecodeNoiseMask(bytes);
      json by_type = json::object();
      for (int t = 1; t <= 4; ++t) by_type[std::to_string(t)] = mask.CountOfType(t);
      return {{"type", "noise_mask"}, {"n", mask.n()}, {"m", mask.m},
              {"corrupted", mask.NumCorrupted()}, {"by_type", by_type}};
    }
    if (magic == "DCMP") {
      const ModelShape s = DecodeCheckpoint(bytes).Shape();
      return {{"type", "checkpoint"}, {"d_x", s.d_x},   {"d_y", s.d_y},
              {"hidden", s.hidden},   {"fusion", s.fusion}, {"bits", s.bits},
              {"categories", s.categories}};
    }
    if (magic == "DCIX") {
      const PackedCodeIndex index = PackedCodeIndex::Decode(bytes);
      const std::size_t m = index.labels().empty() ? 0 : index.labels().front().size();
      return {{"type", "index"}, {"n", index.size()}, {"bits", index.bits()}, {"m", m}};
    }
  } catch (const FormatError& e) {
    throw e.WithContext(path);
  }
  throw FormatError(path + ": unrecognized magic", 0);
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noisy-label robust cross-modal hashing"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", DCMH_VERSION);

  SynthArgs synth;
  InjectArgs inject;
  TrainArgs train;
  EvalArgs eval;
  SweepArgs sweep;
  BoxplotArgs boxplot;
  std::string inspect_path;
  AddSynth(app, synth);
  AddInject(app, inject);
  AddTrain(app, train);
  AddEval(app, eval);
  AddSweep(app, sweep);
  AddBoxplot(app, boxplot);
  app.add_subcommand("inspect", "Print the header of any dcmh file")
      ->add_option("--in", inspect_path, "File")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  try {
    json summary;
    if (name == "synth") summary = RunSynth(synth);
    else if (name == "inject") summary = RunInject(inject);
    else if (name == "train") summary = RunTrain(train, err);
    else if (name == "eval") summary = RunEval(eval);
    else if (name == "sweep") summary = RunSweep(sweep);
    else if (name == "boxplot") summary = RunBoxplot(boxplot, err);
    else summary = InspectFile(inspect_path);

    json line = {{"command", name}, {"status", "ok"}, {"result", summary}};
    line["repro"] = {{"argv", std::vector<std::string>(argv, argv + argc)},
                     {"flags", FlagSet(*sub)},
                     {"threads", WorkerThreads()},
                     {"versions", Versions()}};
    out << line.dump() << '\n';
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n\n" << sub->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace dcmh
