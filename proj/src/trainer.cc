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
#include <deque>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "dcmh/corrector.h"
#include "dcmh/evaluate.h"
#include "dcmh/filter.h"

namespace dcmh {
namespace {

using nlohmann::json;

constexpr int kCsvDigits = std::numeric_limits<double>::max_digits10;

// Independent RNG streams derived from the run seed.
enum Stream : std::uint64_t { kShuffleStream = 1, kAugmentStream = 2 };

std::mt19937_64 StreamRng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

const char* NormalizationName(Normalization n) {
  return n == Normalization::kBatchMean ? "batch_mean" : "plain_sum";
}

const char* CosineName(CosineMode c) {
  return c == CosineMode::kNormalized ? "normalized" : "scaled_dot";
}

// Rejects keys of `j` outside `allowed`.
void CheckKeys(const json& j, std::initializer_list<const char*> allowed,
               const char* where) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(where) + " must be a JSON object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) known |= it.key() == key;
    if (!known) {
      throw std::invalid_argument("unknown config key \"" + it.key() + "\" in " +
                                  where);
    }
  }
}

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

struct DonorEntry {
  std::size_t instance;
  Eigen::RowVectorXd scores;
  Label label;
};

struct EpochTally {
  LossBreakdown sum;
  std::size_t flagged_corrupt = 0;
  std::size_t corrupt_seen = 0;
  std::size_t corrected_right = 0;
};

class Trainer {
 public:
  Trainer(ModelParams params, const Dataset& train, const TrainConfig& config,
          const NoiseMask* audit, const TrainDiagnostics& diag)
      : params_(std::move(params)),
        train_(train),
        config_(config),
        audit_(audit),
        diag_(diag),
        shuffle_rng_(StreamRng(config.seed, kShuffleStream)),
        augment_rng_(StreamRng(config.seed, kAugmentStream)) {}

  TrainResult Run(std::uint32_t epochs) {
    for (std::ostream* out : {diag_.filter_csv, diag_.corrector_csv, diag_.loss_csv}) {
      if (out) out->precision(kCsvDigits);
    }
    if (diag_.filter_csv) {
      *diag_.filter_csv << "epoch,batch,instance,t,flagged,corrupted\n";
    }
    if (diag_.corrector_csv) {
      *diag_.corrector_csv
          << "epoch,batch,instance,donor_a,donor_b,agree,matches_clean\n";
    }
    if (diag_.loss_csv) {
      *diag_.loss_csv << "epoch,batch,L_o,L_a,L_u,L_c,L_q,total,n_clean,"
                         "n_corrected,n_unlabeled,n_dropped\n";
    }
    for (std::uint32_t e = 0; e < epochs; ++e) RunEpoch(e);
    return {std::move(params_), std::move(report_)};
  }

 private:
  void RunEpoch(std::uint32_t epoch) {
    const std::size_t n = train_.n();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), shuffle_rng_);

    const bool warmup = epoch < config_.warmup_epochs;
    const bool filtering = !warmup && config_.variant != Variant::kNoFilter;
    if (filtering && config_.filter_scope == FilterScope::kGlobal) {
      ComputeGlobalFlags();
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.warmup = warmup;
    EpochTally tally;
    const std::size_t z = config_.batch_size;
    for (std::size_t begin = 0, batch = 0; begin < n; begin += z, ++batch) {
      const std::size_t end = std::min(n, begin + z);
      std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                    order.begin() + static_cast<std::ptrdiff_t>(end));
      Step(epoch, batch, rows, filtering, rec, tally);
      ++rec.batches;
    }

    if (rec.batches > 0) {
      const double inv = 1.0 / static_cast<double>(rec.batches);
      rec.mean_loss = tally.sum;
      rec.mean_loss.pointwise *= inv;
      rec.mean_loss.pairwise *= inv;
      rec.mean_loss.contrastive *= inv;
      rec.mean_loss.center *= inv;
      rec.mean_loss.quantization *= inv;
      rec.mean_loss.total *= inv;
    }
    if (audit_ && filtering) {
      rec.filter_precision =
          rec.flagged == 0 ? 1.0
                           : static_cast<double>(tally.flagged_corrupt) /
                                 static_cast<double>(rec.flagged);
      rec.filter_recall =
          tally.corrupt_seen == 0 ? 1.0
                                  : static_cast<double>(tally.flagged_corrupt) /
                                        static_cast<double>(tally.corrupt_seen);
      if (rec.corrected > 0) {
        rec.correction_accuracy = static_cast<double>(tally.corrected_right) /
                                  static_cast<double>(rec.corrected);
      }
    }
    report_.epochs.push_back(rec);
  }

  void ComputeGlobalFlags() {
    const Eigen::MatrixXd codes = RelaxedCodes(params_, train_);
    const ScoreMatrix scores = ComputeScores(codes, params_.centers);
    report_.zero_norm_rows += scores.zero_norm_rows;
    std::vector<Label> labels;
    labels.reserve(train_.n());
    for (const Instance& inst : train_.instances) labels.push_back(inst.label);
    global_t_ = Consistency(scores.scores, labels);
    const PartitionResult part = Partition(global_t_, config_.tau);
    global_flags_.assign(train_.n(), 0);
    for (std::size_t i : part.noisy) global_flags_[i] = 1;
  }

  // The clean label an instance should have, for audits.
  const Label& TrueLabel(std::size_t instance) const {
    return audit_->corrupted(instance) ? audit_->original_labels[instance]
                                       : train_.instances[instance].label;
  }

  void Step(std::uint32_t epoch, std::size_t batch,
            const std::vector<std::size_t>& rows, bool filtering,
            EpochRecord& rec, EpochTally& tally) {
    const std::size_t z = rows.size();
    const Eigen::MatrixXd x = FeatureRows(train_, rows, true);
    const Eigen::MatrixXd y = FeatureRows(train_, rows, false);
    std::vector<Label> labels;
    labels.reserve(z);
    for (std::size_t r : rows) labels.push_back(train_.instances[r].label);

    std::vector<Role> roles(z, Role::kClean);
    std::vector<bool> keep(z, true);

    if (filtering) {
      const Eigen::MatrixXd codes = ForwardBatch(params_, x, y);
      const ScoreMatrix scores = ComputeScores(codes, params_.centers);
      report_.zero_norm_rows += scores.zero_norm_rows;

      PartitionResult part;
      if (config_.filter_scope == FilterScope::kGlobal) {
        part.consistency.resize(static_cast<Eigen::Index>(z));
        for (std::size_t i = 0; i < z; ++i) {
          part.consistency(static_cast<Eigen::Index>(i)) = global_t_(static_cast<Eigen::Index>(rows[i]));
          (global_flags_[rows[i]] ? part.noisy : part.clean).push_back(i);
        }
      } else {
        part = Partition(Consistency(scores.scores, labels), config_.tau);
      }
      rec.flagged += part.noisy.size();

      std::vector<bool> flagged(z, false);
      for (std::size_t i : part.noisy) flagged[i] = true;
      if (audit_) {
        for (std::size_t i = 0; i < z; ++i) {
          if (audit_->corrupted(rows[i])) {
            ++tally.corrupt_seen;
            if (flagged[i]) ++tally.flagged_corrupt;
          }
        }
      }
      if (diag_.filter_csv) {
        for (std::size_t i = 0; i < z; ++i) {
          *diag_.filter_csv << epoch << ',' << batch << ',' << rows[i] << ','
                            << part.consistency(static_cast<Eigen::Index>(i))
                            << ',' << (flagged[i] ? 1 : 0) << ',';
          if (audit_) *diag_.filter_csv << (audit_->corrupted(rows[i]) ? 1 : 0);
          *diag_.filter_csv << '\n';
        }
      }

      Relabel(epoch, batch, rows, scores.scores, part, labels, roles, keep, rec,
              tally);
    }

    TrainBatch tb;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < z; ++i) {
      if (keep[i]) kept.push_back(i);
    }
    rec.dropped += z - kept.size();
    if (kept.empty()) return;

    const auto nk = static_cast<Eigen::Index>(kept.size());
    tb.x.resize(nk, x.cols());
    tb.y.resize(nk, y.cols());
    std::vector<std::size_t> unlabeled;
    for (std::size_t r = 0; r < kept.size(); ++r) {
      const std::size_t i = kept[r];
      tb.x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(i));
      tb.y.row(static_cast<Eigen::Index>(r)) = y.row(static_cast<Eigen::Index>(i));
      tb.labels.push_back(roles[i] == Role::kUnlabeled ? Label{} : labels[i]);
      tb.roles.push_back(roles[i]);
      if (roles[i] == Role::kUnlabeled) unlabeled.push_back(i);
    }
    if (!unlabeled.empty()) {
      // Column statistics come from the whole batch.
      const AugmentedFeatures aug =
          Augment(x, y, config_.loss.augment, augment_rng_());
      const auto nu = static_cast<Eigen::Index>(unlabeled.size());
      tb.x_aug.resize(nu, x.cols());
      tb.y_aug.resize(nu, y.cols());
      for (Eigen::Index r = 0; r < nu; ++r) {
        tb.x_aug.row(r) = aug.x.row(static_cast<Eigen::Index>(unlabeled[static_cast<std::size_t>(r)]));
        tb.y_aug.row(r) = aug.y.row(static_cast<Eigen::Index>(unlabeled[static_cast<std::size_t>(r)]));
      }
    }

    const BackwardResult result = Backward(params_, tb, config_.loss);
    params_ = SgdStep(std::move(params_), result.grads, config_.learning_rate);

    const LossBreakdown& l = result.loss;
    tally.sum.pointwise += l.pointwise;
    tally.sum.pairwise += l.pairwise;
    tally.sum.contrastive += l.contrastive;
    tally.sum.center += l.center;
    tally.sum.quantization += l.quantization;
    tally.sum.total += l.total;
    if (diag_.loss_csv) {
      std::size_t counts[3] = {0, 0, 0};
      for (Role r : tb.roles) ++counts[static_cast<int>(r)];
      *diag_.loss_csv << epoch << ',' << batch << ',' << l.pointwise << ','
                      << l.pairwise << ',' << l.contrastive << ',' << l.center
                      << ',' << l.quantization << ',' << l.total << ','
                      << counts[0] << ',' << counts[1] << ',' << counts[2] << ','
                      << (z - kept.size()) << '\n';
    }
  }

  void Relabel(std::uint32_t epoch, std::size_t batch,
               const std::vector<std::size_t>& rows,
               const Eigen::MatrixXd& scores, const PartitionResult& part,
               std::vector<Label>& labels, std::vector<Role>& roles,
               std::vector<bool>& keep, EpochRecord& rec, EpochTally& tally) {
    switch (config_.variant) {
      case Variant::kNoCorrection:
        for (std::size_t i : part.noisy) roles[i] = Role::kUnlabeled;
        rec.unlabeled += part.noisy.size();
        break;
      case Variant::kCleanOnly:
        for (std::size_t i : part.noisy) keep[i] = false;
        break;
      case Variant::kFull:
      case Variant::kDropUnconfident: {
        // Donors: the batch's clean rows, then (optionally) the cache.
        std::vector<DonorEntry> donors;
        for (std::size_t i : part.clean) {
          donors.push_back({rows[i], scores.row(static_cast<Eigen::Index>(i)), labels[i]});
        }
        if (config_.donor_scope == DonorScope::kCache) {
          donors.insert(donors.end(), cache_.begin(), cache_.end());
        }
        Eigen::MatrixXd clean_scores(static_cast<Eigen::Index>(donors.size()),
                                     scores.cols());
        std::vector<Label> clean_labels;
        for (std::size_t d = 0; d < donors.size(); ++d) {
          clean_scores.row(static_cast<Eigen::Index>(d)) = donors[d].scores;
          clean_labels.push_back(donors[d].label);
        }
        Eigen::MatrixXd noisy_scores(static_cast<Eigen::Index>(part.noisy.size()),
                                     scores.cols());
        for (std::size_t r = 0; r < part.noisy.size(); ++r) {
          noisy_scores.row(static_cast<Eigen::Index>(r)) =
              scores.row(static_cast<Eigen::Index>(part.noisy[r]));
        }
        const ReconstructionResult rr =
            Reconstruct(noisy_scores, clean_scores, clean_labels);

        for (std::size_t c = 0; c < rr.corrected.size(); ++c) {
          const std::size_t i = part.noisy[rr.corrected[c]];
          labels[i] = rr.corrected_labels[c];
          roles[i] = Role::kCorrected;
          if (audit_ && labels[i] == TrueLabel(rows[i])) ++tally.corrected_right;
        }
        for (std::size_t u : rr.unlabeled) {
          const std::size_t i = part.noisy[u];
          if (config_.variant == Variant::kFull) {
            roles[i] = Role::kUnlabeled;
          } else {
            keep[i] = false;
          }
        }
        rec.corrected += rr.corrected.size();
        if (config_.variant == Variant::kFull) rec.unlabeled += rr.unlabeled.size();
        for (const DonorDecision& d : rr.decisions) {
          if (d.donors.single && d.agree) ++report_.single_donor_steps;
          if (diag_.corrector_csv) {
            const std::size_t i = part.noisy[d.noisy_pos];
            *diag_.corrector_csv << epoch << ',' << batch << ',' << rows[i] << ','
                                 << donors[d.donors.first].instance << ','
                                 << donors[d.donors.second].instance << ','
                                 << (d.agree ? 1 : 0) << ',';
            if (audit_ && d.agree) {
              *diag_.corrector_csv << (labels[i] == TrueLabel(rows[i]) ? 1 : 0);
            }
            *diag_.corrector_csv << '\n';
          }
        }
        if (config_.donor_scope == DonorScope::kCache) {
          for (std::size_t i : part.clean) {
            cache_.push_back({rows[i], scores.row(static_cast<Eigen::Index>(i)), labels[i]});
            while (cache_.size() > config_.donor_cache_size) cache_.pop_front();
          }
        }
        break;
      }
      case Variant::kNoFilter:
        break;
    }
  }

  ModelParams params_;
  const Dataset& train_;
  TrainConfig config_;
  const NoiseMask* audit_;
  TrainDiagnostics diag_;
  std::mt19937_64 shuffle_rng_;
  std::mt19937_64 augment_rng_;
  TrainReport report_;
  std::deque<DonorEntry> cache_;
  Eigen::VectorXd global_t_;
  std::vector<std::uint8_t> global_flags_;
};

void ValidateForTraining(const ModelParams& params, const Dataset& train,
                         const TrainConfig& config, const NoiseMask* audit) {
  config.Validate();
  if (train.n() == 0) throw std::invalid_argument("training set is empty");
  train.Validate();
  const ModelShape s = params.Shape();
  if (s.d_x != train.d_x || s.d_y != train.d_y || s.categories != train.m) {
    throw std::invalid_argument("model shape does not match the training set");
  }
  if (audit && (audit->n() != train.n() || audit->m != train.m)) {
    throw std::invalid_argument("noise mask does not match the training set");
  }
}

}  // namespace

const char* VariantName(Variant v) {
  switch (v) {
    case Variant::kFull:
      return "full";
    case Variant::kNoFilter:
      return "I";
    case Variant::kNoCorrection:
      return "R";
    case Variant::kDropUnconfident:
      return "U";
    case Variant::kCleanOnly:
      return "RU";
  }
  return "full";
}

Variant ParseVariant(const std::string& name) {
  for (Variant v : {Variant::kFull, Variant::kNoFilter, Variant::kNoCorrection,
                    Variant::kDropUnconfident, Variant::kCleanOnly}) {
    if (name == VariantName(v)) return v;
  }
  throw std::invalid_argument("unknown variant \"" + name +
                              "\" (expected full, I, R, U or RU)");
}

void TrainConfig::Validate() const {
  if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
  if (warmup_epochs >= epochs) {
    throw std::invalid_argument("warmup_epochs must be < epochs");
  }
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (!(tau >= 0.0 && tau < 1.0)) {
    throw std::invalid_argument("tau must lie in [0, 1)");
  }
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  }
  if (hidden == 0 || fusion == 0 || bits == 0) {
    throw std::invalid_argument("network widths must be positive");
  }
  loss.Validate();
}

ModelShape TrainConfig::ShapeFor(const Dataset& ds) const {
  ModelShape s;
  s.d_x = ds.d_x;
  s.d_y = ds.d_y;
  s.hidden = hidden;
  s.fusion = fusion;
  s.bits = bits;
  s.categories = ds.m;
  return s;
}

json ConfigToJson(const TrainConfig& c) {
  return json{
      {"epochs", c.epochs},
      {"warmup_epochs", c.warmup_epochs},
      {"batch_size", c.batch_size},
      {"learning_rate", c.learning_rate},
      {"tau", c.tau},
      {"variant", VariantName(c.variant)},
      {"seed", c.seed},
      {"filter_scope", c.filter_scope == FilterScope::kBatch ? "batch" : "global"},
      {"donor_scope", c.donor_scope == DonorScope::kBatch ? "batch" : "cache"},
      {"donor_cache_size", c.donor_cache_size},
      {"model", {{"hidden", c.hidden}, {"fusion", c.fusion}, {"bits", c.bits}}},
      {"loss",
       {{"pointwise_weight", c.loss.pointwise_weight},
        {"alpha", c.loss.alpha},
        {"beta", c.loss.beta},
        {"gamma", c.loss.gamma},
        {"eta", c.loss.eta},
        {"contrastive_margin", c.loss.contrastive_margin},
        {"normalization", NormalizationName(c.loss.normalization)},
        {"cosine", CosineName(c.loss.cosine)},
        {"augment",
         {{"noise_scale", c.loss.augment.noise_scale},
          {"mask_prob", c.loss.augment.mask_prob}}}}},
  };
}

TrainConfig ConfigFromJson(const json& j, bool require_seed) {
  CheckKeys(j,
            {"epochs", "warmup_epochs", "batch_size", "learning_rate", "tau",
             "variant", "seed", "filter_scope", "donor_scope",
             "donor_cache_size", "model", "loss"},
            "config");
  TrainConfig c;
  try {
    Read(j, "epochs", c.epochs);
    Read(j, "warmup_epochs", c.warmup_epochs);
    Read(j, "batch_size", c.batch_size);
    Read(j, "learning_rate", c.learning_rate);
    Read(j, "tau", c.tau);
    Read(j, "donor_cache_size", c.donor_cache_size);
    if (j.contains("seed")) {
      c.seed = j.at("seed").get<std::uint64_t>();
    } else if (require_seed) {
      throw std::invalid_argument("config is missing the required \"seed\"");
    }
    if (j.contains("variant")) c.variant = ParseVariant(j.at("variant").get<std::string>());
    if (j.contains("filter_scope")) {
      const auto s = j.at("filter_scope").get<std::string>();
      if (s != "batch" && s != "global") {
        throw std::invalid_argument("filter_scope must be batch or global");
      }
      c.filter_scope = s == "batch" ? FilterScope::kBatch : FilterScope::kGlobal;
    }
    if (j.contains("donor_scope")) {
      const auto s = j.at("donor_scope").get<std::string>();
      if (s != "batch" && s != "cache") {
        throw std::invalid_argument("donor_scope must be batch or cache");
      }
      c.donor_scope = s == "batch" ? DonorScope::kBatch : DonorScope::kCache;
    }
    if (j.contains("model")) {
      const json& m = j.at("model");
      CheckKeys(m, {"hidden", "fusion", "bits"}, "model");
      Read(m, "hidden", c.hidden);
      Read(m, "fusion", c.fusion);
      Read(m, "bits", c.bits);
    }
    if (j.contains("loss")) {
      const json& l = j.at("loss");
      CheckKeys(l,
                {"pointwise_weight", "alpha", "beta", "gamma", "eta",
                 "contrastive_margin", "normalization", "cosine", "augment"},
                "loss");
      Read(l, "pointwise_weight", c.loss.pointwise_weight);
      Read(l, "alpha", c.loss.alpha);
      Read(l, "beta", c.loss.beta);
      Read(l, "gamma", c.loss.gamma);
      Read(l, "eta", c.loss.eta);
      Read(l, "contrastive_margin", c.loss.contrastive_margin);
      if (l.contains("normalization")) {
        const auto s = l.at("normalization").get<std::string>();
        if (s != "batch_mean" && s != "plain_sum") {
          throw std::invalid_argument(
              "normalization must be batch_mean or plain_sum");
        }
        c.loss.normalization = s == "batch_mean" ? Normalization::kBatchMean
                                                 : Normalization::kPlainSum;
      }
      if (l.contains("cosine")) {
        const auto s = l.at("cosine").get<std::string>();
        if (s != "normalized" && s != "scaled_dot") {
          throw std::invalid_argument("cosine must be normalized or scaled_dot");
        }
        c.loss.cosine = s == "normalized" ? CosineMode::kNormalized
                                          : CosineMode::kScaledDot;
      }
      if (l.contains("augment")) {
        const json& a = l.at("augment");
        CheckKeys(a, {"noise_scale", "mask_prob"}, "loss.augment");
        Read(a, "noise_scale", c.loss.augment.noise_scale);
        Read(a, "mask_prob", c.loss.augment.mask_prob);
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  return c;
}

TrainResult Train(ModelParams params, const Dataset& train,
                  const TrainConfig& config, const NoiseMask* audit,
                  const TrainDiagnostics& diagnostics) {
  ValidateForTraining(params, train, config, audit);
  Trainer trainer(std::move(params), train, config, audit, diagnostics);
  return trainer.Run(config.epochs);
}

ModelParams Warmup(ModelParams params, const Dataset& train,
                   const TrainConfig& config) {
  if (config.warmup_epochs == 0) return params;
  ValidateForTraining(params, train, config, nullptr);
  Trainer trainer(std::move(params), train, config, nullptr, {});
  return trainer.Run(config.warmup_epochs).params;
}

void WriteReportCsv(const TrainReport& report, std::ostream& out) {
  out.precision(kCsvDigits);
  out << "epoch,warmup,batches,L_o,L_a,L_u,L_c,L_q,total,flagged,corrected,"
         "unlabeled,dropped,filter_precision,filter_recall,correction_accuracy\n";
  auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  for (const EpochRecord& r : report.epochs) {
    const LossBreakdown& l = r.mean_loss;
    out << r.epoch << ',' << (r.warmup ? 1 : 0) << ',' << r.batches << ','
        << l.pointwise << ',' << l.pairwise << ',' << l.contrastive << ','
        << l.center << ',' << l.quantization << ',' << l.total << ','
        << r.flagged << ',' << r.corrected << ',' << r.unlabeled << ','
        << r.dropped << ',';
    opt(r.filter_precision);
    out << ',';
    opt(r.filter_recall);
    out << ',';
    opt(r.correction_accuracy);
    out << '\n';
  }
}

json ReportToJson(const TrainReport& report) {
  json epochs = json::array();
  for (const EpochRecord& r : report.epochs) {
    json e{{"epoch", r.epoch},
           {"warmup", r.warmup},
           {"total_loss", r.mean_loss.total},
           {"flagged", r.flagged},
           {"corrected", r.corrected},
           {"unlabeled", r.unlabeled},
           {"dropped", r.dropped}};
    if (r.filter_precision) e["filter_precision"] = *r.filter_precision;
    if (r.filter_recall) e["filter_recall"] = *r.filter_recall;
    if (r.correction_accuracy) e["correction_accuracy"] = *r.correction_accuracy;
    epochs.push_back(std::move(e));
  }
  return json{{"epochs", std::move(epochs)},
              {"zero_norm_rows", report.zero_norm_rows},
              {"single_donor_steps", report.single_donor_steps}};
}

void SetSweepParameter(TrainConfig& config, const std::string& name,
                       double value) {
  if (name == "tau") {
    config.tau = value;
  } else if (name == "alpha") {
    config.loss.alpha = value;
  } else if (name == "beta") {
    config.loss.beta = value;
  } else if (name == "gamma") {
    config.loss.gamma = value;
  } else if (name == "eta") {
    config.loss.eta = value;
  } else if (name == "learning_rate") {
    config.learning_rate = value;
  } else if (name == "contrastive_margin") {
    config.loss.contrastive_margin = value;
  } else {
    throw std::invalid_argument("parameter \"" + name + "\" cannot be swept");
  }
}

std::vector<SweepCell> Sweep(const Dataset& clean_train, const Dataset& retrieval,
                             const Dataset& test, const TrainConfig& base,
                             const std::string& parameter,
                             std::span<const double> values,
                             std::span<const std::uint64_t> seeds) {
  if (values.empty() || seeds.empty()) {
    throw std::invalid_argument("sweep grid is empty");
  }
  TrainConfig probe = base;
  SetSweepParameter(probe, parameter, values.front());

  std::vector<SweepCell> cells;
  for (double value : values) {
    for (std::uint64_t seed : seeds) {
      SweepCell cell{parameter, value, seed, false, 0.0, ""};
      try {
        TrainConfig config = base;
        SetSweepParameter(config, parameter, value);
        config.seed = seed;
        config.Validate();
        const NoisyDataset noisy = InjectNoise(clean_train, config.tau, seed);
        TrainResult trained = Train(InitParams(config.ShapeFor(clean_train), seed),
                                    noisy.data, config);
        cell.map = EvaluateMap(trained.params, retrieval, test);
        cell.ok = true;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

void WriteSweepCsv(std::span<const SweepCell> cells, std::ostream& out) {
  out.precision(kCsvDigits);
  out << "parameter,value,seed,status,map,error\n";
  for (const SweepCell& c : cells) {
    std::string err = c.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out << c.parameter << ',' << c.value << ',' << c.seed << ','
        << (c.ok ? "ok" : "failed") << ',';
    if (c.ok) out << c.map;
    out << ',' << err << '\n';
  }
}

}  // namespace dcmh
