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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. `--only 1,4` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.h"
#include "dcmh/binary_io.h"
#include "dcmh/corrector.h"
#include "dcmh/dataset.h"
#include "dcmh/evaluate.h"
#include "dcmh/filter.h"
#include "dcmh/model.h"
#include "dcmh/retrieval.h"
#include "dcmh/trainer.h"
#include "oracles.h"

namespace dcmh {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

// Shared synthetic setup for the training criteria: single-label data with
// 8 categories, 2000 training instances at 40% noise, 32-bit codes.
struct Setup {
  DatasetSplits splits;
  NoisyDataset noisy;
  TrainConfig config;
};

Setup MakeSetup(std::uint64_t seed, double tau = 0.4) {
  SyntheticConfig sc;
  sc.n = 3000;
  sc.m = 8;
  sc.d_x = 32;
  sc.d_y = 32;
  sc.labels_per_instance = {1, 1};
  sc.cluster_spread = 0.3;
  sc.seed = seed;
  Setup s;
  s.splits = SplitDataset(GenerateSynthetic(sc), 2000, 800, 200);
  s.noisy = InjectNoise(s.splits.train, tau, seed);
  s.config.epochs = 40;
  s.config.warmup_epochs = 5;
  s.config.batch_size = 48;
  s.config.learning_rate = 0.5;
  s.config.tau = tau;
  s.config.bits = 32;
  s.config.loss.eta = 0.01;
  s.config.seed = seed;
  return s;
}

constexpr std::uint64_t kSeeds[] = {1, 2, 3};

// 1: analytic gradients against central differences.
Verdict GradientSuite() {
  const auto start = Clock::now();
  constexpr int kConfigs = 20;
  std::size_t checked = 0, failed = 0;
  double worst = 0.0;
  std::string where;
  for (testing::Term term : {testing::Term::kPointwise, testing::Term::kPairwise, testing::Term::kContrastive,
                             testing::Term::kCenter, testing::Term::kQuantization, testing::Term::kTotal}) {
    for (int c = 0; c < kConfigs; ++c) {
      const testing::GradProblem p = testing::MakeGradProblem(term, 100 + static_cast<std::uint64_t>(c));
      const testing::GradCheckResult r = testing::CheckGradients(p, 1e-5, 1e-4, 1e-8);
      checked += r.checked;
      failed += r.failed;
      if (r.worst_rel > worst) {
        worst = r.worst_rel;
        where = std::string(testing::TermName(term)) + " " + r.worst_where;
      }
    }
  }
  const double secs = Seconds(start);
  return {failed == 0 && secs < 60.0,
          "6 terms x 20 configs, " + std::to_string(checked) + " partials, " + std::to_string(failed) +
              " mismatches, worst rel " + Fmt("%.2e", worst) + " (" + where + "), " + Fmt("%.1f s", secs)};
}

// 2: exact flagged counts and planted recovery.
Verdict FilterExactness() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  std::size_t cases = 0, bad = 0;
  for (std::size_t z : {5, 48, 101}) {
    for (double tau : {0.0, 0.25, 0.4, 0.9}) {
      for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd codes = Eigen::MatrixXd::NullaryExpr(z, 8, [&] { return normal(rng); });
        const Eigen::MatrixXd centers = Eigen::MatrixXd::NullaryExpr(4, 8, [&] { return normal(rng); });
        std::vector<Label> labels;
        std::uniform_int_distribution<int> cat(0, 3);
        for (std::size_t i = 0; i < z; ++i) {
          Label l(4, 0);
          l[cat(rng)] = 1;
          l[cat(rng)] = 1;
          labels.push_back(l);
        }
        const Eigen::VectorXd consistency = Consistency(ComputeScores(codes, centers).scores, labels);
        const PartitionResult part = Partition(consistency, tau);
        // Oracle: sort by (consistency, index) and take the first floor(tau z).
        const auto want_count = static_cast<std::size_t>(std::floor(tau * static_cast<double>(z)));
        std::vector<std::size_t> order(z);
        for (std::size_t i = 0; i < z; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return consistency[a] != consistency[b] ? consistency[a] < consistency[b] : a < b;
        });
        std::vector<std::size_t> want(order.begin(), order.begin() + want_count);
        std::sort(want.begin(), want.end());
        ++cases;
        bad += part.noisy != want || part.clean.size() + part.noisy.size() != z;
      }
    }
  }
  std::size_t planted = 0, planted_bad = 0;
  for (std::size_t z : {48, 101}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const testing::PlantedBatch b = testing::MakePlantedBatch(z, 0.4, seed);
      const PartitionResult part = Partition(Consistency(ComputeScores(b.codes, b.centers).scores, b.labels), 0.4);
      ++planted;
      planted_bad += part.noisy != b.corrupted;
    }
  }
  return {bad == 0 && planted_bad == 0,
          std::to_string(cases - bad) + "/" + std::to_string(cases) + " grid batches exact, planted recovery " +
              std::to_string(planted - planted_bad) + "/" + std::to_string(planted) +
              " with precision = recall = 1"};
}

// 3: reconstruct against brute-force donor pair enumeration.
Verdict CorrectorOracle() {
  std::mt19937_64 rng(3);
  std::size_t bad = 0, corrected = 0, unlabeled = 0;
  constexpr int kBatches = 200;
  for (int trial = 0; trial < kBatches; ++trial) {
    std::uniform_int_distribution<Eigen::Index> size(0, 8);
    std::uniform_int_distribution<Eigen::Index> cats(2, 5);
    const Eigen::Index nn = size(rng), nc = size(rng), m = cats(rng);
    std::uniform_real_distribution<double> score(-1.0, 1.0);
    Eigen::MatrixXd noisy = Eigen::MatrixXd::NullaryExpr(nn, m, [&] { return score(rng); });
    Eigen::MatrixXd clean = Eigen::MatrixXd::NullaryExpr(nc, m, [&] { return score(rng); });
    if (trial % 7 == 0 && nc > 2) clean.row(2) = clean.row(0);  // exact match ties
    std::vector<Label> labels;
    std::uniform_int_distribution<Eigen::Index> pick(0, m - 1);
    for (Eigen::Index i = 0; i < nc; ++i) {
      Label l(static_cast<std::size_t>(m), 0);
      l[pick(rng)] = 1;
      labels.push_back(l);
    }
    const ReconstructionResult got = Reconstruct(noisy, clean, labels);
    const ReconstructionResult want = testing::BruteForceReconstruct(noisy, clean, labels);
    bool same = got.corrected == want.corrected && got.corrected_labels == want.corrected_labels &&
                got.unlabeled == want.unlabeled && got.decisions.size() == want.decisions.size();
    for (std::size_t d = 0; same && d < got.decisions.size(); ++d) {
      same = got.decisions[d].donors.first == want.decisions[d].donors.first &&
             got.decisions[d].donors.second == want.decisions[d].donors.second;
    }
    bad += !same;
    corrected += got.corrected.size();
    unlabeled += got.unlabeled.size();
  }
  return {bad == 0, std::to_string(kBatches - bad) + "/" + std::to_string(kBatches) + " batches match (" +
                        std::to_string(corrected) + " corrected, " + std::to_string(unlabeled) +
                        " unlabeled rows)"};
}

BinaryCode CodeFromBits(std::uint32_t v, std::size_t k) {
  BinaryCode c(k);
  for (std::size_t b = 0; b < k; ++b) c[b] = (v >> b) & 1u ? 1 : -1;
  return c;
}

// 4: Hamming identity and metric path equality.
Verdict MetricOracles() {
  const auto start = Clock::now();
  std::size_t bad = 0;
  std::uint64_t pairs = 0;
  // Exhaustive over every pair of codes for each k <= 16. The dot product is
  // split into an 8-bit low part and a high part, each from a naive table.
  for (std::size_t k = 1; k <= 16; ++k) {
    const std::size_t lo_bits = std::min<std::size_t>(k, 8), hi_bits = k - lo_bits;
    const std::uint32_t count = 1u << k;
    auto table = [](std::size_t bits) {
      std::vector<int> t((std::size_t{1} << bits) << bits);
      for (std::uint32_t a = 0; a < (1u << bits); ++a) {
        for (std::uint32_t b = 0; b < (1u << bits); ++b) {
          t[(a << bits) | b] = testing::Dot(CodeFromBits(a, bits), CodeFromBits(b, bits));
        }
      }
      return t;
    };
    const std::vector<int> lo = table(lo_bits), hi = table(hi_bits);
    std::vector<std::uint64_t> words(count);
    for (std::uint32_t v = 0; v < count; ++v) {
      const std::vector<std::uint64_t> w = PackCode(CodeFromBits(v, k));
      words[v] = w[0];
    }
    const std::uint32_t lo_mask = (1u << lo_bits) - 1;
    for (std::uint32_t a = 0; a < count; ++a) {
      for (std::uint32_t b = 0; b < count; ++b) {
        const int dot = lo[((a & lo_mask) << lo_bits) | (b & lo_mask)] +
                        hi[((a >> lo_bits) << hi_bits) | (b >> lo_bits)];
        const int d = PackedHammingDistance(std::span(&words[a], 1), std::span(&words[b], 1));
        bad += 2 * d != static_cast<int>(k) - dot;
      }
    }
    pairs += std::uint64_t{count} * count;
  }
  const double exhaustive_secs = Seconds(start);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 100000; ++i) {
    const BinaryCode a = testing::RandomCode(128, rng), b = testing::RandomCode(128, rng);
    const int want = 128 - testing::Dot(a, b);
    bad += 2 * HammingDistance(a, b) != want;
    bad += 2 * PackedHammingDistance(PackCode(a), PackCode(b)) != want;
  }

  std::size_t metric_bad = 0, metric_trials = 0;
  std::uniform_int_distribution<int> cat(0, 5);
  for (std::size_t k : {8, 16, 32, 70}) {
    for (int trial = 0; trial < 5; ++trial) {
      auto label = [&] {
        Label l(6, 0);
        l[cat(rng)] = 1;
        if (trial % 2) l[cat(rng)] = 1;
        return l;
      };
      std::vector<BinaryCode> db, queries;
      std::vector<Label> dbl, ql;
      for (int i = 0; i < 120; ++i) {
        db.push_back(testing::RandomCode(k, rng));
        dbl.push_back(label());
      }
      for (int i = 0; i < 6; ++i) db.push_back(db[static_cast<std::size_t>(i)]);  // exact ties
      for (int i = 0; i < 6; ++i) dbl.push_back(label());
      for (int i = 0; i < 15; ++i) {
        queries.push_back(testing::RandomCode(k, rng));
        ql.push_back(label());
      }
      const std::vector<std::size_t> ns{1, 10, 50, 126};
      const PackedCodeIndex index = PackedCodeIndex::Build(db, dbl);
      const std::vector<Ranking> rankings = RankAll(queries, index);
      const RelevanceMatrix rel = RelevanceMatrix::FromLabels(ql, dbl);
      const testing::NaiveMetrics want = testing::NaiveRetrievalMetrics(queries, ql, db, dbl, ns);
      bool same = MeanAveragePrecision(rankings, rel) == want.map && PrecisionAtN(rankings, rel, ns) == want.pn;
      const std::vector<PrPoint> pr = PrCurveByRadius(rankings, rel, k);
      same = same && pr.size() == want.pr.size();
      for (std::size_t r = 0; same && r < pr.size(); ++r) {
        same = pr[r].precision == want.pr[r].precision && pr[r].recall == want.pr[r].recall;
      }
      for (std::size_t q = 0; same && q < queries.size(); ++q) {
        const std::vector<std::size_t> order = testing::NaiveRanking(queries[q], db);
        same = std::equal(order.begin(), order.end(), rankings[q].order.begin(), rankings[q].order.end());
      }
      ++metric_trials;
      metric_bad += !same;
    }
  }
  const double ap = AveragePrecision(std::vector<std::uint8_t>{1, 0, 1});
  const bool ap_ok = std::abs(ap - 0.8333) <= 1e-4 && std::abs(ap - 5.0 / 6.0) <= 1e-12;
  return {bad == 0 && metric_bad == 0 && ap_ok,
          std::to_string(pairs) + " exhaustive pairs k<=16 (" + Fmt("%.1f s", exhaustive_secs) +
              ") and 1e5 pairs k=128 with " + std::to_string(bad) + " mismatches, packed = naive metrics " +
              std::to_string(metric_trials - metric_bad) + "/" + std::to_string(metric_trials) +
              ", AP(1,0,1) = " + Fmt("%.12f", ap)};
}

// 5: clean instances sit nearer their labeled centers than noisy ones after
// warm-up.
Verdict BoxplotGap() {
  const auto start = Clock::now();
  bool all = true;
  std::string detail;
  for (std::uint64_t seed : kSeeds) {
    const Setup s = MakeSetup(seed);
    const ModelParams p = Warmup(InitParams(s.config.ShapeFor(s.noisy.data), seed), s.noisy.data, s.config);
    std::vector<Label> labels;
    for (const Instance& inst : s.noisy.data.instances) labels.push_back(inst.label);
    const BoxplotReport r = BoxplotStats(RelaxedCodes(p, s.noisy.data), p.centers, labels, &s.noisy.mask);
    double median[2][2] = {};  // [noisy][in]
    for (const BoxplotGroup& g : r.groups) median[g.noisy][g.in_category] = g.stats.median;
    const double clean_gap = median[0][1] - median[0][0];
    const double noisy_gap = median[1][1] - median[1][0];
    const bool ok = r.groups.size() == 4 && clean_gap - noisy_gap >= 0.05;
    all = all && ok;
    detail += " seed " + std::to_string(seed) + ": clean " + Fmt("%.3f", clean_gap) + " vs noisy " +
              Fmt("%.3f", noisy_gap) + ";";
  }
  const double secs = Seconds(start);
  return {all && secs < 300.0, "median(in) - median(out)," + detail + " " + Fmt("%.1f s", secs)};
}

// 6: ablation direction.
Verdict Ablation() {
  const auto start = Clock::now();
  const Variant variants[] = {Variant::kFull, Variant::kNoFilter, Variant::kNoCorrection,
                              Variant::kDropUnconfident, Variant::kCleanOnly};
  double mean[5] = {};
  for (std::uint64_t seed : kSeeds) {
    const Setup s = MakeSetup(seed);
    for (int v = 0; v < 5; ++v) {
      TrainConfig c = s.config;
      c.variant = variants[v];
      const TrainResult r = Train(InitParams(c.ShapeFor(s.noisy.data), seed), s.noisy.data, c);
      const double map = EvaluateMap(r.params, s.splits.retrieval, s.splits.test);
      std::cerr << "ablation seed " << seed << " " << VariantName(variants[v]) << " map " << map << '\n';
      mean[v] += map / 3.0;
    }
  }
  const double secs = Seconds(start);
  bool ok = mean[0] >= mean[1] + 0.02;
  for (int v = 2; v < 5; ++v) ok = ok && mean[0] >= mean[v] - 0.005;
  std::string detail = "mean MAP";
  for (int v = 0; v < 5; ++v) detail += std::string(" ") + VariantName(variants[v]) + " " + Fmt("%.4f", mean[v]);
  return {ok && secs < 1800.0, detail + ", " + Fmt("%.1f s", secs)};
}

// 7: MAP does not rise with the noise ratio.
Verdict NoiseSweep() {
  const auto start = Clock::now();
  const std::vector<double> taus{0.1, 0.3, 0.5, 0.7};
  std::vector<double> mean(taus.size(), 0.0);
  bool cells_ok = true;
  for (std::uint64_t seed : kSeeds) {
    const Setup s = MakeSetup(seed);
    const std::vector<std::uint64_t> seeds{seed};
    const std::vector<SweepCell> cells =
        Sweep(s.splits.train, s.splits.retrieval, s.splits.test, s.config, "tau", taus, seeds);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      cells_ok = cells_ok && cells[i].ok;
      std::cerr << "sweep seed " << seed << " tau " << cells[i].value << " map " << cells[i].map << '\n';
      mean[i] += cells[i].map / 3.0;
    }
  }
  bool ok = cells_ok;
  std::string detail = "mean MAP";
  for (std::size_t i = 0; i < taus.size(); ++i) {
    detail += " tau " + Fmt("%.1f", taus[i]) + ": " + Fmt("%.4f", mean[i]);
    if (i > 0) ok = ok && mean[i] <= mean[i - 1] + 0.01;
  }
  return {ok, detail + ", " + Fmt("%.1f s", Seconds(start))};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int Cli(std::vector<std::string> args) {
  args.insert(args.begin(), "dcmh");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != kExitOk) std::cerr << err.str();
  return code;
}

// 8: repeated train/eval invocations are byte-identical.
Verdict Determinism() {
  const fs::path dir = fs::temp_directory_path() / "dcmh_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  bool ok = Cli({"synth", "--n", "900", "--m", "6", "--dx", "16", "--dy", "16", "--labels-max", "2", "--seed",
                 "5", "--split", "600,250,50", "--train-out", p("tr.dcmh"), "--retrieval-out", p("re.dcmh"),
                 "--test-out", p("te.dcmh")}) == kExitOk &&
            Cli({"inject", "--tau", "0.4", "--in", p("tr.dcmh"), "--out", p("noisy.dcmh"), "--mask",
                 p("mask.dcnm"), "--seed", "5"}) == kExitOk;
  const std::vector<std::string> variants{"full", "I", "R", "U", "RU"};
  std::size_t files = 0, differ = 0;
  for (const std::string& variant : variants) {
    for (const std::string run : {"a", "b"}) {
      const std::string tag = variant + run;
      ok = ok &&
           Cli({"train", "--data", p("noisy.dcmh"), "--mask", p("mask.dcnm"), "--seed", "11", "--tau", "0.4",
                "--variant", variant, "--epochs", "6", "--warmup-epochs", "2", "--lr", "0.3", "--eta", "0.01",
                "--hidden", "32", "--fusion", "16", "--bits", "16", "--ckpt", p(tag + ".dcmp"), "--report-csv",
                p(tag + "_report.csv"), "--loss-csv", p(tag + "_loss.csv"), "--filter-csv",
                p(tag + "_filter.csv"), "--corrector-csv", p(tag + "_corr.csv")}) == kExitOk &&
           Cli({"eval", "--ckpt", p(tag + ".dcmp"), "--retrieval", p("re.dcmh"), "--test", p("te.dcmh"), "--pn",
                "10,100,250", "--pn-csv", p(tag + "_pn.csv"), "--pr-csv", p(tag + "_pr.csv"), "--ap-csv",
                p(tag + "_ap.csv"), "--index-out", p(tag + ".dcix")}) == kExitOk;
    }
    for (const std::string suffix : {".dcmp", ".dcix", "_report.csv", "_loss.csv", "_filter.csv", "_corr.csv",
                                     "_pn.csv", "_pr.csv", "_ap.csv"}) {
      const std::string a = Slurp(p(variant + "a" + suffix));
      ++files;
      differ += a.empty() || a != Slurp(p(variant + "b" + suffix));
    }
  }
  fs::remove_all(dir);
  return {ok && differ == 0, std::to_string(files - differ) + "/" + std::to_string(files) +
                                 " checkpoint, index and metric files identical across repeated runs of 5 variants"};
}

// 9: save/load fidelity of every file format.
Verdict RoundTrips() {
  const fs::path dir = fs::temp_directory_path() / "dcmh_acceptance_roundtrip";
  fs::create_directories(dir);
  std::mt19937_64 rng(9);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  std::normal_distribution<double> normal(0.0, 3.0);
  std::size_t bad = 0;
  constexpr int kCases = 100;
  for (int c = 0; c < kCases; ++c) {
    const std::uint32_t m = static_cast<std::uint32_t>(uniform(1, 12));
    Dataset ds;
    ds.d_x = static_cast<std::uint32_t>(uniform(1, 20));
    ds.d_y = static_cast<std::uint32_t>(uniform(1, 20));
    ds.m = m;
    ds.seed = rng();
    const int n = uniform(1, 40);
    NoiseMask mask;
    mask.m = m;
    for (int i = 0; i < n; ++i) {
      Instance inst;
      for (std::uint32_t j = 0; j < ds.d_x; ++j) inst.x.push_back(static_cast<float>(normal(rng)));
      for (std::uint32_t j = 0; j < ds.d_y; ++j) inst.y.push_back(static_cast<float>(normal(rng)));
      if (i == 0) inst.x[0] = std::numeric_limits<float>::denorm_min();
      inst.label.assign(m, 0);
      inst.label[static_cast<std::size_t>(uniform(0, static_cast<int>(m) - 1))] = 1;
      for (auto& v : inst.label) v |= uniform(0, 3) == 0;
      const auto type = static_cast<std::uint8_t>(uniform(0, 4));
      mask.noise_type.push_back(type);
      mask.original_labels.push_back(type ? Label(inst.label.rbegin(), inst.label.rend()) : Label(m, 0));
      ds.instances.push_back(std::move(inst));
    }

    ModelShape shape;
    shape.d_x = ds.d_x;
    shape.d_y = ds.d_y;
    shape.hidden = static_cast<std::uint32_t>(uniform(1, 12));
    shape.fusion = static_cast<std::uint32_t>(uniform(1, 12));
    shape.bits = static_cast<std::uint32_t>(uniform(1, 70));
    shape.categories = m;
    ModelParams params = InitParams(shape, rng());
    ForEachTensor(params, [&](auto& t) { t = t.unaryExpr([&](double) { return normal(rng); }); });

    std::vector<BinaryCode> codes;
    std::vector<Label> labels;
    const std::size_t k = static_cast<std::size_t>(uniform(1, 200));
    for (int i = 0; i < n; ++i) {
      codes.push_back(testing::RandomCode(k, rng));
      labels.push_back(ds.instances[static_cast<std::size_t>(i)].label);
    }
    const PackedCodeIndex index = PackedCodeIndex::Build(codes, labels);

    const std::string base = (dir / ("case" + std::to_string(c))).string();
    SaveDataset(ds, base + ".dcmh");
    SaveNoiseMask(mask, base + ".dcnm");
    SaveCheckpoint(params, base + ".dcmp");
    index.Save(base + ".dcix");
    const Dataset ds2 = LoadDataset(base + ".dcmh");
    const NoiseMask mask2 = LoadNoiseMask(base + ".dcnm");
    const ModelParams params2 = LoadCheckpoint(base + ".dcmp");
    const PackedCodeIndex index2 = PackedCodeIndex::Load(base + ".dcix");
    bool same = ReadFileBytes(base + ".dcmh") == EncodeDataset(ds) && EncodeDataset(ds2) == EncodeDataset(ds) &&
                ds2.instances == ds.instances && ds2.seed == ds.seed;
    same = same && ReadFileBytes(base + ".dcnm") == EncodeNoiseMask(mask) && mask2 == mask &&
           EncodeNoiseMask(mask2) == EncodeNoiseMask(mask);
    same = same && ReadFileBytes(base + ".dcmp") == EncodeCheckpoint(params) &&
           EncodeCheckpoint(params2) == EncodeCheckpoint(params) && params2.Shape() == shape;
    same = same && ReadFileBytes(base + ".dcix") == index.Encode() && index2 == index &&
           index2.Encode() == index.Encode();
    for (std::size_t i = 0; same && i < codes.size(); ++i) same = index2.Unpack(i) == codes[i];
    bad += !same;
  }
  fs::remove_all(dir);
  return {bad == 0, std::to_string(kCases - bad) + "/" + std::to_string(kCases) +
                        " cases byte-identical for dataset, mask, checkpoint and index"};
}

}  // namespace
}  // namespace dcmh

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Criteria to run, comma separated")->delimiter(',')->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  using Check = dcmh::Verdict (*)();
  const Check checks[] = {dcmh::GradientSuite, dcmh::FilterExactness, dcmh::CorrectorOracle,
                          dcmh::MetricOracles, dcmh::BoxplotGap,      dcmh::Ablation,
                          dcmh::NoiseSweep,    dcmh::Determinism,     dcmh::RoundTrips};
  int failures = 0;
  for (int i = 1; i <= 9; ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), i) == only.end()) continue;
    dcmh::Verdict v;
    try {
      v = checks[i - 1]();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << "criterion " << i << ": " << (v.pass ? "PASS" : "FAIL") << " (" << v.detail << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
