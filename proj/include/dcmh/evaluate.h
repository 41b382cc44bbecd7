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

// End-to-end retrieval evaluation of a trained model: hash both sets with
// the network, index the retrieval set and score the test queries.

#ifndef DCMH_EVALUATE_H_
#define DCMH_EVALUATE_H_

#include <cstddef>
#include <vector>

#include "dcmh/dataset.h"
#include "dcmh/model.h"
#include "dcmh/retrieval.h"

namespace dcmh {

struct EvalOptions {
  std::vector<std::size_t> pn_cutoffs;
  // Rank-based PR points at these cutoffs instead of one per Hamming radius.
  bool pr_by_rank = false;
  std::vector<std::size_t> pr_rank_cutoffs;
};

struct EvalResult {
  double map = 0.0;
  std::vector<double> average_precision;  // per test query
  std::vector<std::size_t> pn_cutoffs;
  std::vector<double> precision_at_n;
  std::vector<PrPoint> pr;
  PackedCodeIndex index;
};

// Throws std::invalid_argument naming both shapes when the datasets do not
// match the checkpoint.
EvalResult Evaluate(const ModelParams& params, const Dataset& retrieval,
                    const Dataset& test, const EvalOptions& options = {});

// MAP only.
double EvaluateMap(const ModelParams& params, const Dataset& retrieval,
                   const Dataset& test);

}  // namespace dcmh

#endif  // DCMH_EVALUATE_H_
