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

#include "dcmh/trainer.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "dcmh/errors.h"
#include "dcmh/evaluate.h"
#include "dcmh/model.h"

namespace dcmh {
namespace {

struct Fixture {
  Dataset clean;
  NoisyDataset noisy;
  Dataset retrieval;
  Dataset test;
};

const Fixture& Data() {
  static const Fixture f = [] {
    SyntheticConfig c;
    c.n = 220;
    c.m = 4;
    c.d_x = 8;
    c.d_y = 6;
    c.labels_per_instance = {1, 2};
    c.cluster_spread = 0.2;
    c.seed = 5;
    const DatasetSplits s = SplitDataset(GenerateSynthetic(c), 125, 70, 25);
    Fixture out{s.train, InjectNoise(s.train, 0.4, 6), s.retrieval, s.test};
    return out;
  }();
  return f;
}

TrainConfig SmallConfig(Variant v = Variant::kFull) {
  TrainConfig c;
  c.epochs = 4;
  c.warmup_epochs = 1;
  c.batch_size = 16;  // 125 rows: the last batch has 13
  c.learning_rate = 0.1;
  c.tau = 0.4;
  c.variant = v;
  c.seed = 3;
  c.hidden = 12;
  c.fusion = 8;
  c.bits = 8;
  c.loss.eta = 0.05;
  return c;
}

std::vector<std::uint8_t> Bytes(const ModelParams& p) { return EncodeCheckpoint(p); }

ModelParams Init(const TrainConfig& c) { return InitParams(c.ShapeFor(Data().clean), c.seed); }

std::vector<std::vector<std::string>> ParseCsv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

TEST(Warmup, NoEpochsOrZeroRateKeepsParams) {
  TrainConfig c = SmallConfig();
  const ModelParams p = Init(c);
  c.warmup_epochs = 0;
  EXPECT_EQ(Bytes(Warmup(p, Data().noisy.data, c)), Bytes(p));
  c.warmup_epochs = 2;
  c.learning_rate = 0.0;
  EXPECT_EQ(Bytes(Warmup(p, Data().noisy.data, c)), Bytes(p));
  c.learning_rate = 0.1;
  EXPECT_NE(Bytes(Warmup(p, Data().noisy.data, c)), Bytes(p));
}

TEST(Warmup, UsesPointwiseCenterAndQuantizationOnly) {
  TrainConfig c = SmallConfig();
  c.epochs = 3;
  c.warmup_epochs = 2;
  std::ostringstream loss;
  TrainDiagnostics d;
  d.loss_csv = &loss;
  const TrainResult r = Train(Init(c), Data().noisy.data, c, nullptr, d);
  for (const auto& row : ParseCsv(loss.str())) {
    if (row[0] == "2") break;
    EXPECT_EQ(std::stod(row[3]), 0.0);  // L_a
    EXPECT_EQ(std::stod(row[4]), 0.0);  // L_u
    EXPECT_EQ(row[10], "0");  // corrected
    EXPECT_EQ(row[11], "0");  // unlabeled
  }
  EXPECT_TRUE(r.report.epochs[0].warmup);
  EXPECT_EQ(r.report.epochs[0].flagged, 0u);
  EXPECT_FALSE(r.report.epochs[2].warmup);
}

TEST(Train, SameSeedIsBitIdentical) {
  const TrainConfig c = SmallConfig();
  std::ostringstream a_csv, b_csv;
  const TrainResult a = Train(Init(c), Data().noisy.data, c, &Data().noisy.mask, {nullptr, nullptr, &a_csv});
  const TrainResult b = Train(Init(c), Data().noisy.data, c, &Data().noisy.mask, {nullptr, nullptr, &b_csv});
  EXPECT_EQ(Bytes(a.params), Bytes(b.params));
  EXPECT_EQ(a_csv.str(), b_csv.str());
  EXPECT_EQ(ReportToJson(a.report), ReportToJson(b.report));
  TrainConfig other = c;
  other.seed = 4;
  EXPECT_NE(Bytes(Train(Init(c), Data().noisy.data, other).params), Bytes(a.params));
}

TEST(Train, MaskIsDiagnosticsOnly) {
  const TrainConfig c = SmallConfig();
  const TrainResult with = Train(Init(c), Data().noisy.data, c, &Data().noisy.mask);
  const TrainResult without = Train(Init(c), Data().noisy.data, c);
  EXPECT_EQ(Bytes(with.params), Bytes(without.params));
  EXPECT_TRUE(with.report.epochs.back().filter_precision.has_value());
  EXPECT_FALSE(without.report.epochs.back().filter_precision.has_value());
}

TEST(Train, VariantIFlagsNothing) {
  const TrainConfig c = SmallConfig(Variant::kNoFilter);
  const TrainResult r = Train(Init(c), Data().noisy.data, c);
  ASSERT_EQ(r.report.epochs.size(), 4u);
  for (const EpochRecord& e : r.report.epochs) {
    EXPECT_EQ(e.flagged, 0u);
    EXPECT_EQ(e.corrected + e.unlabeled + e.dropped, 0u);
  }
}

TEST(Train, ZeroTauFullEqualsVariantI) {
  TrainConfig full = SmallConfig(Variant::kFull);
  full.tau = 0.0;
  TrainConfig plain = full;
  plain.variant = Variant::kNoFilter;
  EXPECT_EQ(Bytes(Train(Init(full), Data().clean, full).params),
            Bytes(Train(Init(plain), Data().clean, plain).params));
}

TEST(Train, BatchPartitionsAddUp) {
  for (Variant v : {Variant::kFull, Variant::kNoCorrection, Variant::kDropUnconfident,
                    Variant::kCleanOnly}) {
    const TrainConfig c = SmallConfig(v);
    std::ostringstream filter, loss;
    TrainDiagnostics d;
    d.filter_csv = &filter;
    d.loss_csv = &loss;
    Train(Init(c), Data().noisy.data, c, &Data().noisy.mask, d);

    // Flagged counts per (epoch, batch) from the filter log.
    std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> seen;
    for (const auto& row : ParseCsv(filter.str())) {
      auto& [size, flagged] = seen[{row[0], row[1]}];
      ++size;
      flagged += row[4] == "1";
      EXPECT_EQ(row.size(), 6u);  // corrupted bit present with a mask
    }
    ASSERT_FALSE(seen.empty());
    for (const auto& [key, value] : seen) {
      EXPECT_EQ(value.second, static_cast<std::size_t>(std::floor(0.4 * static_cast<double>(value.first))))
          << VariantName(v) << " batch size " << value.first;
    }
    for (const auto& row : ParseCsv(loss.str())) {
      if (row[0] == "0") continue;  // warm-up
      const std::size_t n_clean = std::stoul(row[8]), n_corr = std::stoul(row[9]),
                        n_unl = std::stoul(row[10]), n_drop = std::stoul(row[11]);
      const auto& [size, flagged] = seen.at({row[0], row[1]});
      EXPECT_EQ(n_clean + n_corr + n_unl + n_drop, size);
      EXPECT_EQ(n_clean, size - flagged);
      switch (v) {
        case Variant::kFull:
          EXPECT_EQ(n_corr + n_unl, flagged);
          EXPECT_EQ(n_drop, 0u);
          break;
        case Variant::kNoCorrection:
          EXPECT_EQ(n_unl, flagged);
          break;
        case Variant::kDropUnconfident:
          EXPECT_EQ(n_unl, 0u);
          EXPECT_EQ(n_corr + n_drop, flagged);
          break;
        case Variant::kCleanOnly:
          EXPECT_EQ(n_drop, flagged);
          break;
        default:
          break;
      }
    }
  }
}

TEST(Train, LoggedTotalMatchesComposition) {
  const TrainConfig c = SmallConfig();
  std::ostringstream loss;
  Train(Init(c), Data().noisy.data, c, nullptr, {nullptr, nullptr, &loss});
  const LossSpec& w = c.loss;
  std::size_t rows = 0;
  for (const auto& row : ParseCsv(loss.str())) {
    const double lo = std::stod(row[2]), la = std::stod(row[3]), lu = std::stod(row[4]),
                 lc = std::stod(row[5]), lq = std::stod(row[6]), total = std::stod(row[7]);
    EXPECT_NEAR(total, w.pointwise_weight * lo + w.alpha * la + w.beta * lu + w.gamma * lc + w.eta * lq,
                1e-9 * std::max(1.0, std::abs(total)));
    ++rows;
  }
  EXPECT_EQ(rows, 4u * 8u);
}

TEST(Train, CorrectorLogUsesDatasetIds) {
  const TrainConfig c = SmallConfig();
  std::ostringstream corr;
  Train(Init(c), Data().noisy.data, c, &Data().noisy.mask, {nullptr, &corr, nullptr});
  const auto rows = ParseCsv(corr.str());
  ASSERT_FALSE(rows.empty());
  for (const auto& row : rows) {
    EXPECT_LT(std::stoul(row[3]), Data().noisy.data.n());
    EXPECT_LT(std::stoul(row[4]), Data().noisy.data.n());
    if (row[5] == "1") EXPECT_TRUE(row[6] == "0" || row[6] == "1");
  }
}

TEST(Train, AlternateScopesRun) {
  TrainConfig c = SmallConfig();
  c.filter_scope = FilterScope::kGlobal;
  c.donor_scope = DonorScope::kCache;
  c.donor_cache_size = 20;
  const TrainResult r = Train(Init(c), Data().noisy.data, c, &Data().noisy.mask);
  // Globally flagged rows total floor(tau * n) per filtered epoch.
  EXPECT_EQ(r.report.epochs.back().flagged, 50u);
}

TEST(Train, RejectsBadInputs) {
  TrainConfig c = SmallConfig();
  c.warmup_epochs = 4;
  EXPECT_THROW(Train(Init(SmallConfig()), Data().noisy.data, c), std::invalid_argument);
  c = SmallConfig();
  c.batch_size = 1;
  EXPECT_THROW(Train(Init(c), Data().noisy.data, c), std::invalid_argument);
  c = SmallConfig();
  c.tau = 1.0;
  EXPECT_THROW(Train(Init(c), Data().noisy.data, c), std::invalid_argument);
  c = SmallConfig();
  Dataset empty = Data().noisy.data;
  empty.instances.clear();
  EXPECT_THROW(Train(Init(c), empty, c), std::invalid_argument);
}

TEST(Train, DivergenceAborts) {
  TrainConfig c = SmallConfig();
  c.learning_rate = 1e300;
  EXPECT_THROW(Train(Init(c), Data().noisy.data, c), NumericError);
}

TEST(Config, JsonRoundTrip) {
  TrainConfig c = SmallConfig(Variant::kDropUnconfident);
  c.loss.normalization = Normalization::kPlainSum;
  c.loss.cosine = CosineMode::kScaledDot;
  c.filter_scope = FilterScope::kGlobal;
  c.seed = 123456789012345ull;
  const nlohmann::json j = ConfigToJson(c);
  EXPECT_EQ(ConfigToJson(ConfigFromJson(j)), j);
  EXPECT_EQ(ConfigFromJson(j).variant, Variant::kDropUnconfident);
}

TEST(Config, RejectsUnknownKeysAndMissingSeed) {
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"seed", 1}, {"epoch", 3}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"seed", 1}, {"loss", {{"gama", 1}}}}),
               std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"epochs", 3}}), std::invalid_argument);
  EXPECT_NO_THROW(ConfigFromJson(nlohmann::json{{"epochs", 3}}, false));
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"seed", "x"}}), std::invalid_argument);
  EXPECT_THROW(ConfigFromJson(nlohmann::json{{"seed", 1}, {"variant", "Z"}}), std::invalid_argument);
}

TEST(Config, DefaultsAndVariantNames) {
  // Defaults: 5 warm-up epochs, batch 48.
  const TrainConfig c;
  EXPECT_EQ(c.warmup_epochs, 5u);
  EXPECT_EQ(c.batch_size, 48u);
  EXPECT_EQ(c.learning_rate, 0.005);
  for (const char* name : {"full", "I", "R", "U", "RU"}) {
    EXPECT_STREQ(VariantName(ParseVariant(name)), name);
  }
}

TEST(Sweep, CellsAreIndependent) {
  TrainConfig c = SmallConfig();
  c.epochs = 2;
  const std::vector<double> taus{0.3, 1.5, 0.3};
  const std::vector<std::uint64_t> seeds{7};
  const auto cells = Sweep(Data().clean, Data().retrieval, Data().test, c, "tau", taus, seeds);
  ASSERT_EQ(cells.size(), 3u);
  EXPECT_TRUE(cells[0].ok);
  EXPECT_FALSE(cells[1].ok);  // tau out of range, recorded not thrown
  EXPECT_FALSE(cells[1].error.empty());
  EXPECT_TRUE(cells[2].ok);
  EXPECT_EQ(cells[0].map, cells[2].map);

  const std::vector<double> one{0.3};
  EXPECT_EQ(Sweep(Data().clean, Data().retrieval, Data().test, c, "tau", one, seeds).size(), 1u);
  std::ostringstream csv;
  WriteSweepCsv(cells, csv);
  EXPECT_EQ(ParseCsv(csv.str()).size(), 3u);
  EXPECT_THROW(Sweep(Data().clean, Data().retrieval, Data().test, c, "nope", one, seeds),
               std::invalid_argument);
  EXPECT_THROW(Sweep(Data().clean, Data().retrieval, Data().test, c, "tau", {}, seeds),
               std::invalid_argument);
}

TEST(Sweep, FiveValueTauGrid) {
  TrainConfig c = SmallConfig();
  c.epochs = 2;
  const std::vector<double> taus{0.1, 0.3, 0.5, 0.7, 0.9};
  const std::vector<std::uint64_t> seeds{1};
  const auto cells = Sweep(Data().clean, Data().retrieval, Data().test, c, "tau", taus, seeds);
  ASSERT_EQ(cells.size(), 5u);
  for (const auto& cell : cells) EXPECT_TRUE(cell.ok) << cell.value << " " << cell.error;
}

TEST(Report, CsvHasOneRowPerEpoch) {
  const TrainConfig c = SmallConfig();
  const TrainResult r = Train(Init(c), Data().noisy.data, c, &Data().noisy.mask);
  std::ostringstream out;
  WriteReportCsv(r.report, out);
  const auto rows = ParseCsv(out.str());
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t e = 0; e < rows.size(); ++e) EXPECT_EQ(rows[e][0], std::to_string(e));
}

}  // namespace
}  // namespace dcmh
