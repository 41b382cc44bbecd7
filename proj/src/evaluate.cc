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

#include "dcmh/evaluate.h"

#include <stdexcept>
#include <string>

namespace dcmh {
namespace {

std::string Dims(std::uint32_t dx, std::uint32_t dy, std::uint32_t m) {
  return "(d_x=" + std::to_string(dx) + ", d_y=" + std::to_string(dy) +
         ", m=" + std::to_string(m) + ")";
}

void CheckCompatible(const ModelParams& params, const Dataset& ds,
                     const char* role) {
  const ModelShape s = params.Shape();
  if (ds.d_x != s.d_x || ds.d_y != s.d_y || ds.m != s.categories) {
    throw std::invalid_argument(std::string(role) + " set dimensions " +
                                Dims(ds.d_x, ds.d_y, ds.m) +
                                " do not match checkpoint " +
                                Dims(s.d_x, s.d_y, s.categories));
  }
}

std::vector<Label> LabelsOf(const Dataset& ds) {
  std::vector<Label> out;
  out.reserve(ds.n());
  for (const Instance& inst : ds.instances) out.push_back(inst.label);
  return out;
}

}  // namespace

EvalResult Evaluate(const ModelParams& params, const Dataset& retrieval,
                    const Dataset& test, const EvalOptions& options) {
  CheckCompatible(params, retrieval, "retrieval");
  CheckCompatible(params, test, "test");
  EvalResult out;
  const std::vector<BinaryCode> db_codes = HashDataset(params, retrieval);
  const std::vector<BinaryCode> query_codes = HashDataset(params, test);
  out.index = PackedCodeIndex::Build(db_codes, LabelsOf(retrieval));
  const std::vector<Ranking> rankings = RankAll(query_codes, out.index);
  const std::vector<Label> query_labels = LabelsOf(test);
  const RelevanceMatrix relevance =
      RelevanceMatrix::FromLabels(query_labels, out.index.labels());
  out.map = MeanAveragePrecision(rankings, relevance, &out.average_precision);
  out.pn_cutoffs = options.pn_cutoffs;
  if (!options.pn_cutoffs.empty()) {
    out.precision_at_n = PrecisionAtN(rankings, relevance, options.pn_cutoffs);
  }
  out.pr = options.pr_by_rank
               ? PrCurveByRank(rankings, relevance, options.pr_rank_cutoffs)
               : PrCurveByRadius(rankings, relevance, out.index.bits());
  return out;
}

double EvaluateMap(const ModelParams& params, const Dataset& retrieval,
                   const Dataset& test) {
  return Evaluate(params, retrieval, test).map;
}

}  // namespace dcmh
