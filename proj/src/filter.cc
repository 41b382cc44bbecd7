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

#include "dcmh/filter.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dcmh {

ScoreMatrix ComputeScores(const Eigen::MatrixXd& codes,
                          const Eigen::MatrixXd& centers) {
  if (codes.cols() != centers.cols()) {
    throw std::invalid_argument("code length != center length");
  }
  ScoreMatrix out;
  auto unit_rows = [&](const Eigen::MatrixXd& m) {
    Eigen::MatrixXd u = m;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double norm = m.row(i).norm();
      if (norm == 0.0) {
        ++out.zero_norm_rows;
        u.row(i).setZero();
      } else {
        u.row(i) /= norm;
      }
    }
    return u;
  };
  const Eigen::MatrixXd b = unit_rows(codes);
  const Eigen::MatrixXd c = unit_rows(centers);
  out.scores = (b * c.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
  return out;
}

Eigen::VectorXd Consistency(const Eigen::MatrixXd& scores,
                            std::span<const Label> labels) {
  if (static_cast<std::size_t>(scores.rows()) != labels.size()) {
    throw std::invalid_argument("score rows and labels differ in count");
  }
  Eigen::VectorXd t(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const Label& l = labels[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(l.size()) != scores.cols()) {
      throw std::invalid_argument("label length != number of centers");
    }
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      if (l[static_cast<std::size_t>(j)]) {
        sum += scores(i, j);
        ++count;
      }
    }
    if (count == 0) {
      throw std::invalid_argument("row " + std::to_string(i) +
                                  " has an empty label");
    }
    t(i) = sum / count;
  }
  return t;
}

std::size_t FlaggedCount(double tau, std::size_t z) {
  return static_cast<std::size_t>(std::floor(tau * static_cast<double>(z)));
}

PartitionResult Partition(const Eigen::VectorXd& consistency, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) {
    throw std::invalid_argument("noise ratio must lie in [0, 1)");
  }
  const std::size_t z = static_cast<std::size_t>(consistency.size());
  const std::size_t flagged = FlaggedCount(tau, z);

  std::vector<std::size_t> order(z);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return consistency(static_cast<Eigen::Index>(a)) <
           consistency(static_cast<Eigen::Index>(b));
  });

  PartitionResult out;
  out.consistency = consistency;
  out.noisy.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(flagged));
  out.clean.assign(order.begin() + static_cast<std::ptrdiff_t>(flagged), order.end());
  std::sort(out.noisy.begin(), out.noisy.end());
  std::sort(out.clean.begin(), out.clean.end());
  out.threshold = flagged == 0
                      ? -std::numeric_limits<double>::infinity()
                      : consistency(static_cast<Eigen::Index>(order[flagged - 1]));
  return out;
}

}  // namespace dcmh
