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

// Training loop: warm-up on all labels, then per mini-batch
// forward -> scores -> filter -> reconstruct -> loss -> backward -> SGD, with
// switches for the ablation variants and per-batch audit streams.

#ifndef DCMH_TRAINER_H_
#define DCMH_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dcmh/dataset.h"
#include "dcmh/losses.h"
#include "dcmh/model.h"
#include "json.hpp"

namespace dcmh {

enum class Variant {
  kFull,            // filter, correct, unlabeled contrastive learning
  kNoFilter,        // "I": every label trusted
  kNoCorrection,    // "R": every flagged instance is unlabeled
  kDropUnconfident, // "U": corrected kept, unconfident dropped
  kCleanOnly,       // "RU": flagged instances dropped
};

enum class FilterScope { kBatch, kGlobal };
enum class DonorScope { kBatch, kCache };

const char* VariantName(Variant v);
Variant ParseVariant(const std::string& name);

struct TrainConfig {
  std::uint32_t epochs = 40;
  std::uint32_t warmup_epochs = 5;
  std::uint32_t batch_size = 48;
  double learning_rate = 0.005;
  double tau = 0.4;
  LossSpec loss;
  Variant variant = Variant::kFull;
  std::uint64_t seed = 0;
  FilterScope filter_scope = FilterScope::kBatch;
  DonorScope donor_scope = DonorScope::kBatch;
  std::size_t donor_cache_size = 512;
  // Network widths; d_x, d_y and categories come from the data.
  std::uint32_t hidden = 256;
  std::uint32_t fusion = 128;
  std::uint32_t bits = 32;

  // Throws std::invalid_argument unless warmup_epochs < epochs,
  // batch_size >= 2, 0 <= tau < 1 and the loss spec is valid.
  void Validate() const;
  ModelShape ShapeFor(const Dataset& ds) const;
};

// JSON mirror of TrainConfig. Unknown keys are rejected; missing keys keep
// their defaults except "seed", which is required unless `require_seed` is
// false.
nlohmann::json ConfigToJson(const TrainConfig& config);
TrainConfig ConfigFromJson(const nlohmann::json& j, bool require_seed = true);

struct EpochRecord {
  std::uint32_t epoch = 0;
  bool warmup = false;
  std::size_t batches = 0;
  LossBreakdown mean_loss;  // per-term mean over the epoch's batches
  std::size_t flagged = 0;
  std::size_t corrected = 0;
  std::size_t unlabeled = 0;
  std::size_t dropped = 0;
  // Audit figures; present only when a noise mask was supplied.
  std::optional<double> filter_precision;
  std::optional<double> filter_recall;
  std::optional<double> correction_accuracy;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  std::size_t zero_norm_rows = 0;      // zero-norm codes/centers seen by the filter
  std::size_t single_donor_steps = 0;  // corrections made from one clean donor
};

// Optional per-batch CSV sinks.
struct TrainDiagnostics {
  std::ostream* filter_csv = nullptr;     // epoch,batch,instance,t,flagged,corrupted
  std::ostream* corrector_csv = nullptr;  // epoch,batch,instance,donor_a,donor_b,agree,matches_clean
  std::ostream* loss_csv = nullptr;       // epoch,batch,L_o,...,total,partition sizes
};

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

// Runs `config.epochs` epochs; the first `warmup_epochs` train every label as
// clean with L_o + gamma L_c + eta L_q. `audit` feeds only the report and
// diagnostics, never a training decision.
TrainResult Train(ModelParams params, const Dataset& train,
                  const TrainConfig& config, const NoiseMask* audit = nullptr,
                  const TrainDiagnostics& diagnostics = {});

// Only the warm-up epochs of Train.
ModelParams Warmup(ModelParams params, const Dataset& train,
                   const TrainConfig& config);

void WriteReportCsv(const TrainReport& report, std::ostream& out);
nlohmann::json ReportToJson(const TrainReport& report);

struct SweepCell {
  std::string parameter;
  double value = 0.0;
  std::uint64_t seed = 0;
  bool ok = false;
  double map = 0.0;
  std::string error;
};

// Sweepable parameters: tau, alpha, beta, gamma, eta, learning_rate,
// contrastive_margin.
void SetSweepParameter(TrainConfig& config, const std::string& name, double value);

// For every (value, seed): inject noise into `clean_train` at the cell's tau,
// train from InitParams(seed), and score MAP of `test` against `retrieval`.
// A failing cell is recorded and the sweep continues.
std::vector<SweepCell> Sweep(const Dataset& clean_train, const Dataset& retrieval,
                             const Dataset& test, const TrainConfig& base,
                             const std::string& parameter,
                             std::span<const double> values,
                             std::span<const std::uint64_t> seeds);

void WriteSweepCsv(std::span<const SweepCell> cells, std::ostream& out);

}  // namespace dcmh

#endif  // DCMH_TRAINER_H_
