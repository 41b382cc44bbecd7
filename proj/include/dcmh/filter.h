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

// Label filter: cosine scores of relaxed codes against the category centers,
// per-instance consistency between a label and its score row, and the split
// of a batch into clean and noisy sets at a fixed noise ratio.

#ifndef DCMH_FILTER_H_
#define DCMH_FILTER_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcmh/dataset.h"

namespace dcmh {

struct ScoreMatrix {
  // batch x m, entries in [-1, 1].
  Eigen::MatrixXd scores;
  // Number of code or center rows with zero norm; their cosines are 0.
  std::size_t zero_norm_rows = 0;
};

ScoreMatrix ComputeScores(const Eigen::MatrixXd& codes,
                          const Eigen::MatrixXd& centers);

// Mean score over each row's positive categories. Throws
// std::invalid_argument on an all-zero label.
Eigen::VectorXd Consistency(const Eigen::MatrixXd& scores,
                            std::span<const Label> labels);

struct PartitionResult {
  Eigen::VectorXd consistency;
  std::vector<std::size_t> clean;  // ascending
  std::vector<std::size_t> noisy;  // ascending
  // Largest flagged consistency, -inf when nothing is flagged.
  double threshold = 0.0;
};

// Flags floor(tau * z) rows with the smallest consistency; equal values are
// flagged lower index first. Requires 0 <= tau < 1.
PartitionResult Partition(const Eigen::VectorXd& consistency, double tau);

// floor(tau * z).
std::size_t FlaggedCount(double tau, std::size_t z);

}  // namespace dcmh

#endif  // DCMH_FILTER_H_
