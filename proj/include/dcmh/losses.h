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

// The five training objectives, each evaluated on relaxed codes (and the
// category centers) with an optional analytic gradient, plus their weighted
// composition and the feature-space augmentation used by the contrastive
// term.
//
// Every gradient output is overwritten (resized and set), never accumulated.

#ifndef DCMH_LOSSES_H_
#define DCMH_LOSSES_H_

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcmh/dataset.h"

namespace dcmh {

// How the pairwise and quantization sums are normalized.
enum class Normalization {
  kPlainSum,  // plain sums
  kBatchMean,     // pairwise / n_r^2, quantization / batch size
};

// How cos(a, b) is evaluated inside the pairwise and contrastive terms.
enum class CosineMode {
  kNormalized,    // a.b / (|a| |b|), 0 if either norm is 0
  kScaledDot,     // a.b / k, exact only for +-1 codes
};

struct AugmentConfig {
  double noise_scale = 0.1;  // sigma, relative to the per-dimension std
  double mask_prob = 0.1;
};

struct LossSpec {
  double pointwise_weight = 1.0;
  double alpha = 1.0;   // pairwise, corrected set
  double beta = 0.15;   // contrastive, unlabeled set
  double gamma = 5.0;   // center separation
  double eta = 1.0;     // quantization
  double contrastive_margin = 0.1;
  AugmentConfig augment;
  Normalization normalization = Normalization::kBatchMean;
  CosineMode cosine = CosineMode::kNormalized;

  // Throws std::invalid_argument on negative/non-finite weights or a margin
  // outside [-1, 1).
  void Validate() const;
};

struct LossBreakdown {
  double pointwise = 0.0;
  double pairwise = 0.0;
  double contrastive = 0.0;
  double center = 0.0;
  double quantization = 0.0;
  double total = 0.0;
  bool has_pointwise = false;
  bool has_pairwise = false;
  bool has_contrastive = false;
  bool has_center = false;
  bool has_quantization = false;
};

// Role of one batch row in the step's objective.
enum class Role : std::uint8_t { kClean, kCorrected, kUnlabeled };

// Relaxed codes of one step. `labels[i]` is the label the step trains on
// (ignored for unlabeled rows); `aug_codes` holds one row per unlabeled row,
// in batch order.
struct CodeBatch {
  Eigen::MatrixXd codes;
  std::vector<Label> labels;
  std::vector<Role> roles;
  Eigen::MatrixXd aug_codes;
};

struct LossGradients {
  Eigen::MatrixXd codes;
  Eigen::MatrixXd aug_codes;
  Eigen::MatrixXd centers;
};

// -(1/n) sum_i sum_{j in Y_i} log softmax over {j} u N_i of (1/k) b_i.c.
double PointwiseLoss(const Eigen::MatrixXd& codes, std::span<const Label> labels,
                     const Eigen::MatrixXd& centers,
                     Eigen::MatrixXd* d_codes = nullptr,
                     Eigen::MatrixXd* d_centers = nullptr);

// sum_i sum_j (cos(b_i, b_j) - s_ij)^2 with s_ij the label similarity.
double PairwiseLoss(const Eigen::MatrixXd& codes, std::span<const Label> labels,
                    Normalization normalization, CosineMode cosine,
                    Eigen::MatrixXd* d_codes = nullptr);

// Pulls each code toward its augmented view and pushes cross pairs below
// `margin`.
double ContrastiveLoss(const Eigen::MatrixXd& codes,
                       const Eigen::MatrixXd& aug_codes, double margin,
                       CosineMode cosine, Eigen::MatrixXd* d_codes = nullptr,
                       Eigen::MatrixXd* d_aug_codes = nullptr);

// -mean_{i<j} |c_i - c_j|^2 - min_{i<j} |c_i - c_j|^2. Ties in the minimum
// resolve to the first pair in (i, j) lexicographic order. Requires m >= 2.
double CenterLoss(const Eigen::MatrixXd& centers,
                  Eigen::MatrixXd* d_centers = nullptr);

// sum_i |b_i - sgn(b_i)|^2, sgn treated as a constant.
double QuantizationLoss(const Eigen::MatrixXd& codes,
                        Normalization normalization,
                        Eigen::MatrixXd* d_codes = nullptr);

// Weighted composition. Terms whose partition is too small (no clean rows,
// fewer than two corrected rows, no unlabeled rows, m < 2, empty batch) are
// absent and contribute nothing.
LossBreakdown TotalLoss(const CodeBatch& batch, const Eigen::MatrixXd& centers,
                        const LossSpec& spec, LossGradients* grads = nullptr);

// Gaussian noise scaled by each column's standard deviation over the rows of
// the matrix, then independent coordinate dropout. Applied to each modality
// separately; deterministic in `seed`.
struct AugmentedFeatures {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};
AugmentedFeatures Augment(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const AugmentConfig& config, std::uint64_t seed);

// sgn with sgn(0) = +1, entrywise.
Eigen::MatrixXd SignOf(const Eigen::MatrixXd& codes);

}  // namespace dcmh

#endif  // DCMH_LOSSES_H_
