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

#include "dcmh/corrector.h"

#include <stdexcept>

namespace dcmh {

Eigen::VectorXd MatchConsistency(const Eigen::Ref<const Eigen::RowVectorXd>& score_row,
                                 const Eigen::MatrixXd& clean_scores) {
  if (clean_scores.rows() > 0 && clean_scores.cols() != score_row.size()) {
    throw std::invalid_argument("score rows differ in length");
  }
  return clean_scores * score_row.transpose();
}

DonorPair TopTwoDonors(const Eigen::VectorXd& match) {
  if (match.size() == 0) throw std::invalid_argument("no donors to rank");
  DonorPair out;
  if (match.size() == 1) {
    out.single = true;
    return out;
  }
  std::size_t best = 0;
  std::size_t second = 1;
  if (match(1) > match(0)) std::swap(best, second);
  for (Eigen::Index i = 2; i < match.size(); ++i) {
    const auto idx = static_cast<std::size_t>(i);
    if (match(i) > match(static_cast<Eigen::Index>(best))) {
      second = best;
      best = idx;
    } else if (match(i) > match(static_cast<Eigen::Index>(second))) {
      second = idx;
    }
  }
  out.first = best;
  out.second = second;
  return out;
}

ReconstructionResult Reconstruct(const Eigen::MatrixXd& noisy_scores,
                                 const Eigen::MatrixXd& clean_scores,
                                 std::span<const Label> clean_labels) {
  if (static_cast<std::size_t>(clean_scores.rows()) != clean_labels.size()) {
    throw std::invalid_argument("clean scores and labels differ in count");
  }
  ReconstructionResult out;
  const Eigen::Index n = noisy_scores.rows();
  if (clean_scores.rows() == 0) {
    out.no_donors = n > 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      out.unlabeled.push_back(static_cast<std::size_t>(i));
    }
    return out;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    DonorDecision d;
    d.noisy_pos = static_cast<std::size_t>(i);
    d.match = MatchConsistency(noisy_scores.row(i), clean_scores);
    d.donors = TopTwoDonors(d.match);
    d.agree = clean_labels[d.donors.first] == clean_labels[d.donors.second];
    if (d.agree) {
      out.corrected.push_back(d.noisy_pos);
      out.corrected_labels.push_back(clean_labels[d.donors.first]);
    } else {
      out.unlabeled.push_back(d.noisy_pos);
    }
    out.decisions.push_back(std::move(d));
  }
  return out;
}

}  // namespace dcmh
