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

// Label reconstruction for filtered-noisy instances. Each noisy instance is
// matched against the clean set by the inner product of score rows; if its
// two best-matching clean donors carry the same label, that label is
// adopted, otherwise the instance is treated as unlabeled.

#ifndef DCMH_CORRECTOR_H_
#define DCMH_CORRECTOR_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dcmh/dataset.h"

namespace dcmh {

// m_i = D_c d_i: one raw inner product per clean row.
Eigen::VectorXd MatchConsistency(const Eigen::Ref<const Eigen::RowVectorXd>& score_row,
                                 const Eigen::MatrixXd& clean_scores);

struct DonorPair {
  std::size_t first = 0;   // best match
  std::size_t second = 0;  // runner-up; equals `first` when only one donor
  bool single = false;
};

// The two largest entries, larger first; ties go to the lower index.
// Throws std::invalid_argument on an empty vector.
DonorPair TopTwoDonors(const Eigen::VectorXd& match);

struct DonorDecision {
  std::size_t noisy_pos = 0;  // row of the noisy input
  DonorPair donors;
  bool agree = false;
  Eigen::VectorXd match;
};

struct ReconstructionResult {
  // Positions into the noisy input, ascending.
  std::vector<std::size_t> corrected;
  std::vector<Label> corrected_labels;  // parallel to `corrected`
  std::vector<std::size_t> unlabeled;
  std::vector<DonorDecision> decisions;  // one per noisy row when donors exist
  bool no_donors = false;
};

// A lone clean donor counts as agreeing with itself. With no clean rows
// every noisy row becomes unlabeled.
ReconstructionResult Reconstruct(const Eigen::MatrixXd& noisy_scores,
                                 const Eigen::MatrixXd& clean_scores,
                                 std::span<const Label> clean_labels);

}  // namespace dcmh

#endif  // DCMH_CORRECTOR_H_
