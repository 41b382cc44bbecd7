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

#include "dcmh/losses.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace dcmh {
namespace {

// cos(a, b) and its partials with respect to a and b.
struct CosineValue {
  double value = 0.0;
  Eigen::RowVectorXd d_a;
  Eigen::RowVectorXd d_b;
};

CosineValue Cosine(const Eigen::Ref<const Eigen::RowVectorXd>& a,
                   const Eigen::Ref<const Eigen::RowVectorXd>& b,
                   CosineMode mode, bool want_grad) {
  CosineValue out;
  const double dot = a.dot(b);
  if (mode == CosineMode::kScaledDot) {
    const double inv_k = 1.0 / static_cast<double>(a.size());
    out.value = dot * inv_k;
    if (want_grad) {
      out.d_a = b * inv_k;
      out.d_b = a * inv_k;
    }
    return out;
  }
  const double na2 = a.squaredNorm();
  const double nb2 = b.squaredNorm();
  if (na2 == 0.0 || nb2 == 0.0) {
    if (want_grad) {
      out.d_a = Eigen::RowVectorXd::Zero(a.size());
      out.d_b = Eigen::RowVectorXd::Zero(b.size());
    }
    return out;
  }
  const double inv = 1.0 / std::sqrt(na2 * nb2);
  out.value = dot * inv;
  if (want_grad) {
    out.d_a = b * inv - a * (out.value / na2);
    out.d_b = a * inv - b * (out.value / nb2);
  }
  return out;
}

void CheckRows(const Eigen::MatrixXd& codes, std::size_t labels,
               const char* what) {
  if (static_cast<std::size_t>(codes.rows()) != labels) {
    throw std::invalid_argument(std::string(what) +
                                ": code rows and label count differ");
  }
}

}  // namespace

void LossSpec::Validate() const {
  for (double w : {pointwise_weight, alpha, beta, gamma, eta}) {
    if (!std::isfinite(w) || w < 0.0) {
      throw std::invalid_argument("loss weights must be finite and >= 0");
    }
  }
  if (!(contrastive_margin >= -1.0 && contrastive_margin < 1.0)) {
    throw std::invalid_argument("contrastive margin must lie in [-1, 1)");
  }
  if (!(augment.noise_scale >= 0.0) || !std::isfinite(augment.noise_scale)) {
    throw std::invalid_argument("augmentation noise scale must be >= 0");
  }
  if (!(augment.mask_prob >= 0.0 && augment.mask_prob < 1.0)) {
    throw std::invalid_argument("augmentation mask probability must be in [0, 1)");
  }
}

Eigen::MatrixXd SignOf(const Eigen::MatrixXd& codes) {
  return codes.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
}

double PointwiseLoss(const Eigen::MatrixXd& codes, std::span<const Label> labels,
                     const Eigen::MatrixXd& centers, Eigen::MatrixXd* d_codes,
                     Eigen::MatrixXd* d_centers) {
  CheckRows(codes, labels.size(), "pointwise loss");
  const Eigen::Index n = codes.rows();
  const Eigen::Index k = codes.cols();
  const Eigen::Index m = centers.rows();
  if (d_codes) d_codes->setZero(n, k);
  if (d_centers) d_centers->setZero(m, centers.cols());
  if (n == 0) return 0.0;

  const double inv_k = 1.0 / static_cast<double>(k);
  const double inv_n = 1.0 / static_cast<double>(n);
  const Eigen::MatrixXd logits = codes * centers.transpose() * inv_k;
  const bool want_grad = d_codes || d_centers;

  double loss = 0.0;
  Eigen::RowVectorXd g(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Label& l = labels[i];
    if (static_cast<Eigen::Index>(l.size()) != m) {
      throw std::invalid_argument("pointwise loss: label length != m");
    }
    // Negatives share one max-shifted partial sum across positives.
    double neg_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index h = 0; h < m; ++h) {
      if (!l[h]) neg_max = std::max(neg_max, logits(i, h));
    }
    if (want_grad) g.setZero();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!l[j]) continue;
      const double zj = logits(i, j);
      const double shift = std::max(zj, neg_max);
      double denom = std::exp(zj - shift);
      for (Eigen::Index h = 0; h < m; ++h) {
        if (!l[h]) denom += std::exp(logits(i, h) - shift);
      }
      const double log_denom = shift + std::log(denom);
      loss += log_denom - zj;
      if (want_grad) {
        g(j) += std::exp(zj - log_denom) - 1.0;
        for (Eigen::Index h = 0; h < m; ++h) {
          if (!l[h]) g(h) += std::exp(logits(i, h) - log_denom);
        }
      }
    }
    if (want_grad) {
      g *= inv_n * inv_k;
      if (d_codes) d_codes->row(i) = g * centers;
      if (d_centers) d_centers->noalias() += g.transpose() * codes.row(i);
    }
  }
  return loss * inv_n;
}

double PairwiseLoss(const Eigen::MatrixXd& codes, std::span<const Label> labels,
                    Normalization normalization, CosineMode cosine,
                    Eigen::MatrixXd* d_codes) {
  CheckRows(codes, labels.size(), "pairwise loss");
  const Eigen::Index n = codes.rows();
  if (d_codes) d_codes->setZero(n, codes.cols());
  if (n == 0) return 0.0;
  const double scale = normalization == Normalization::kBatchMean
                           ? 1.0 / static_cast<double>(n * n)
                           : 1.0;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const CosineValue c =
          Cosine(codes.row(i), codes.row(j), cosine, d_codes != nullptr);
      const double r = c.value - LabelSimilarity(labels[i], labels[j]);
      loss += r * r;
      if (d_codes) {
        d_codes->row(i) += (2.0 * scale * r) * c.d_a;
        d_codes->row(j) += (2.0 * scale * r) * c.d_b;
      }
    }
  }
  return loss * scale;
}

double ContrastiveLoss(const Eigen::MatrixXd& codes,
                       const Eigen::MatrixXd& aug_codes, double margin,
                       CosineMode cosine, Eigen::MatrixXd* d_codes,
                       Eigen::MatrixXd* d_aug_codes) {
  if (codes.rows() != aug_codes.rows() || codes.cols() != aug_codes.cols()) {
    throw std::invalid_argument("contrastive loss: view shapes differ");
  }
  const Eigen::Index n = codes.rows();
  if (d_codes) d_codes->setZero(n, codes.cols());
  if (d_aug_codes) d_aug_codes->setZero(n, codes.cols());
  if (n == 0) return 0.0;
  const bool want_grad = d_codes || d_aug_codes;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_n2 = inv_n * inv_n;

  double same = 0.0;
  double cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const CosineValue s =
          Cosine(codes.row(i), aug_codes.row(j), cosine, want_grad);
      double weight = 0.0;
      if (i == j) {
        same += 1.0 - s.value;
        weight = -inv_n;
      } else if (s.value > margin) {
        cross += s.value - margin;
        weight = inv_n2;
      }
      if (want_grad && weight != 0.0) {
        if (d_codes) d_codes->row(i) += weight * s.d_a;
        if (d_aug_codes) d_aug_codes->row(j) += weight * s.d_b;
      }
    }
  }
  return same * inv_n + cross * inv_n2;
}

double CenterLoss(const Eigen::MatrixXd& centers, Eigen::MatrixXd* d_centers) {
  const Eigen::Index m = centers.rows();
  if (m < 2) throw std::invalid_argument("center loss needs m >= 2");
  const double pairs = static_cast<double>(m * (m - 1) / 2);
  double sum = 0.0;
  double min_d = std::numeric_limits<double>::infinity();
  Eigen::Index min_i = 0, min_j = 1;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double d = (centers.row(i) - centers.row(j)).squaredNorm();
      sum += d;
      if (d < min_d) {
        min_d = d;
        min_i = i;
        min_j = j;
      }
    }
  }
  if (d_centers) {
    d_centers->setZero(m, centers.cols());
    // d/dc_i of -(1/P) sum_{j != i} |c_i - c_j|^2.
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        if (i == j) continue;
        d_centers->row(i) -= (2.0 / pairs) * (centers.row(i) - centers.row(j));
      }
    }
    const Eigen::RowVectorXd diff = centers.row(min_i) - centers.row(min_j);
    d_centers->row(min_i) -= 2.0 * diff;
    d_centers->row(min_j) += 2.0 * diff;
  }
  return -sum / pairs - min_d;
}

double QuantizationLoss(const Eigen::MatrixXd& codes,
                        Normalization normalization, Eigen::MatrixXd* d_codes) {
  const Eigen::Index n = codes.rows();
  if (n == 0) {
    if (d_codes) d_codes->setZero(0, codes.cols());
    return 0.0;
  }
  const double scale = normalization == Normalization::kBatchMean
                           ? 1.0 / static_cast<double>(n)
                           : 1.0;
  const Eigen::MatrixXd residual = codes - SignOf(codes);
  if (d_codes) *d_codes = (2.0 * scale) * residual;
  return scale * residual.squaredNorm();
}

LossBreakdown TotalLoss(const CodeBatch& batch, const Eigen::MatrixXd& centers,
                        const LossSpec& spec, LossGradients* grads) {
  const Eigen::Index n = batch.codes.rows();
  const Eigen::Index k = batch.codes.cols();
  if (batch.roles.size() != static_cast<std::size_t>(n) ||
      batch.labels.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("code batch: roles/labels do not match rows");
  }
  if (n > 0 && centers.cols() != k) {
    throw std::invalid_argument("code batch: code length != center length");
  }

  std::vector<Eigen::Index> clean, corrected, unlabeled;
  for (Eigen::Index i = 0; i < n; ++i) {
    switch (batch.roles[i]) {
      case Role::kClean:
        clean.push_back(i);
        break;
      case Role::kCorrected:
        corrected.push_back(i);
        break;
      case Role::kUnlabeled:
        unlabeled.push_back(i);
        break;
    }
  }
  if (batch.aug_codes.rows() != static_cast<Eigen::Index>(unlabeled.size())) {
    throw std::invalid_argument(
        "code batch: need one augmented code per unlabeled row");
  }

  auto gather = [&](const std::vector<Eigen::Index>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), k);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out.row(static_cast<Eigen::Index>(r)) = batch.codes.row(rows[r]);
    }
    return out;
  };
  auto gather_labels = [&](const std::vector<Eigen::Index>& rows) {
    std::vector<Label> out;
    out.reserve(rows.size());
    for (Eigen::Index r : rows) out.push_back(batch.labels[r]);
    return out;
  };

  if (grads) {
    grads->codes.setZero(n, k);
    grads->aug_codes.setZero(batch.aug_codes.rows(), k);
    grads->centers.setZero(centers.rows(), centers.cols());
  }
  auto scatter = [&](const std::vector<Eigen::Index>& rows,
                     const Eigen::MatrixXd& g, double weight) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      grads->codes.row(rows[r]) += weight * g.row(static_cast<Eigen::Index>(r));
    }
  };

  LossBreakdown out;
  Eigen::MatrixXd g_codes, g_aux, g_centers;
  if (!clean.empty()) {
    out.has_pointwise = true;
    out.pointwise = PointwiseLoss(gather(clean), gather_labels(clean), centers,
                                  grads ? &g_codes : nullptr,
                                  grads ? &g_centers : nullptr);
    out.total += spec.pointwise_weight * out.pointwise;
    if (grads) {
      scatter(clean, g_codes, spec.pointwise_weight);
      grads->centers += spec.pointwise_weight * g_centers;
    }
  }
  if (corrected.size() >= 2) {
    out.has_pairwise = true;
    out.pairwise =
        PairwiseLoss(gather(corrected), gather_labels(corrected),
                     spec.normalization, spec.cosine, grads ? &g_codes : nullptr);
    out.total += spec.alpha * out.pairwise;
    if (grads) scatter(corrected, g_codes, spec.alpha);
  }
  if (!unlabeled.empty()) {
    out.has_contrastive = true;
    out.contrastive = ContrastiveLoss(
        gather(unlabeled), batch.aug_codes, spec.contrastive_margin,
        spec.cosine, grads ? &g_codes : nullptr, grads ? &g_aux : nullptr);
    out.total += spec.beta * out.contrastive;
    if (grads) {
      scatter(unlabeled, g_codes, spec.beta);
      grads->aug_codes += spec.beta * g_aux;
    }
  }
  if (centers.rows() >= 2) {
    out.has_center = true;
    out.center = CenterLoss(centers, grads ? &g_centers : nullptr);
    out.total += spec.gamma * out.center;
    if (grads) grads->centers += spec.gamma * g_centers;
  }
  if (n > 0) {
    out.has_quantization = true;
    out.quantization = QuantizationLoss(batch.codes, spec.normalization,
                                        grads ? &g_codes : nullptr);
    out.total += spec.eta * out.quantization;
    if (grads) grads->codes += spec.eta * g_codes;
  }
  return out;
}

AugmentedFeatures Augment(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const AugmentConfig& config, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto apply = [&](const Eigen::MatrixXd& f) {
    Eigen::MatrixXd out = f;
    const Eigen::Index rows = f.rows();
    if (rows == 0) return out;
    if (config.noise_scale > 0.0) {
      const Eigen::RowVectorXd mean = f.colwise().mean();
      const Eigen::RowVectorXd stddev =
          ((f.rowwise() - mean).array().square().colwise().sum() /
           static_cast<double>(rows))
              .sqrt();
      std::normal_distribution<double> normal(0.0, 1.0);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index d = 0; d < f.cols(); ++d) {
          out(i, d) += config.noise_scale * stddev(d) * normal(rng);
        }
      }
    }
    if (config.mask_prob > 0.0) {
      std::bernoulli_distribution drop(config.mask_prob);
      for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index d = 0; d < f.cols(); ++d) {
          if (drop(rng)) out(i, d) = 0.0;
        }
      }
    }
    return out;
  };
  AugmentedFeatures out;
  out.x = apply(x);
  out.y = apply(y);
  return out;
}

}  // namespace dcmh
