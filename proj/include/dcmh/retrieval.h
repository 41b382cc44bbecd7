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

// Hamming-space retrieval over bit-packed codes and the evaluation metrics
// built on it: MAP over full rankings, precision at N, precision-recall by
// Hamming radius (or by rank), and the in/out-category score statistics.
//
// A code entry +1 is stored as bit 1; bit b of a code lives in word b / 64 at
// position b % 64. Unused tail bits are zero.

#ifndef DCMH_RETRIEVAL_H_
#define DCMH_RETRIEVAL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcmh/dataset.h"
#include "dcmh/model.h"

namespace dcmh {

std::size_t WordsForBits(std::size_t bits);
std::vector<std::uint64_t> PackCode(const BinaryCode& code);
BinaryCode UnpackCode(std::span<const std::uint64_t> words, std::size_t bits);

// popcount(a xor b). Throws std::invalid_argument on a length mismatch.
int HammingDistance(const BinaryCode& a, const BinaryCode& b);
int PackedHammingDistance(std::span<const std::uint64_t> a,
                          std::span<const std::uint64_t> b);

class PackedCodeIndex {
 public:
  PackedCodeIndex() = default;

  // `labels` may be empty (no relevance information) or hold one label per
  // code. Database ids default to 0..n-1.
  static PackedCodeIndex Build(std::span<const BinaryCode> codes,
                               std::vector<Label> labels = {});

  std::size_t size() const { return ids_.size(); }
  std::uint32_t bits() const { return bits_; }
  std::size_t words_per_code() const { return words_; }
  std::span<const std::uint64_t> code(std::size_t row) const {
    return {words_data_.data() + row * words_, words_};
  }
  BinaryCode Unpack(std::size_t row) const { return UnpackCode(code(row), bits_); }
  const std::vector<std::uint32_t>& ids() const { return ids_; }
  const std::vector<Label>& labels() const { return labels_; }

  // Index file: "DCIX", u32 version, u32 n, u32 k, packed words, then the
  // label matrix as u8 (m recovered from the remaining length).
  std::vector<std::uint8_t> Encode() const;
  static PackedCodeIndex Decode(std::span<const std::uint8_t> bytes);
  void Save(const std::string& path) const;
  static PackedCodeIndex Load(const std::string& path);

  friend bool operator==(const PackedCodeIndex&, const PackedCodeIndex&) = default;

 private:
  std::uint32_t bits_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> words_data_;
  std::vector<std::uint32_t> ids_;
  std::vector<Label> labels_;
};

// Database rows in ascending Hamming distance, ties by ascending id.
// distances[r] is the distance of order[r].
struct Ranking {
  std::vector<std::uint32_t> order;
  std::vector<std::uint32_t> distances;
};

Ranking Rank(std::span<const std::uint64_t> query, const PackedCodeIndex& index);
// One ranking per query, evaluated in parallel.
std::vector<Ranking> RankAll(std::span<const BinaryCode> queries,
                             const PackedCodeIndex& index);

// Query x database relevance: share at least one category.
class RelevanceMatrix {
 public:
  RelevanceMatrix(std::size_t queries, std::size_t database)
      : queries_(queries), database_(database), rel_(queries * database, 0) {}
  static RelevanceMatrix FromLabels(std::span<const Label> query_labels,
                                    std::span<const Label> db_labels);

  bool operator()(std::size_t q, std::size_t db) const {
    return rel_[q * database_ + db] != 0;
  }
  void Set(std::size_t q, std::size_t db, bool v) { rel_[q * database_ + db] = v; }
  std::size_t queries() const { return queries_; }
  std::size_t database() const { return database_; }
  std::size_t RelevantCount(std::size_t q) const;

 private:
  std::size_t queries_;
  std::size_t database_;
  std::vector<std::uint8_t> rel_;
};

// Average precision of one relevance sequence in ranked order; 0 when
// nothing is relevant.
double AveragePrecision(std::span<const std::uint8_t> ranked_relevance);

// MAP over the full ranking. Throws std::invalid_argument on no queries.
double MeanAveragePrecision(std::span<const Ranking> rankings,
                            const RelevanceMatrix& relevance,
                            std::vector<double>* per_query = nullptr);

// Mean over queries of (relevant in top N) / N, one value per N. Throws on
// N = 0 or N above the database size.
std::vector<double> PrecisionAtN(std::span<const Ranking> rankings,
                                 const RelevanceMatrix& relevance,
                                 std::span<const std::size_t> ns);

struct PrPoint {
  std::size_t cutoff = 0;  // Hamming radius, or rank for the rank-based curve
  double precision = 0.0;
  double recall = 0.0;
};

// One point per radius 0..bits. A query that retrieves nothing scores
// precision 1 and recall 0; a query with nothing relevant scores recall 0.
std::vector<PrPoint> PrCurveByRadius(std::span<const Ranking> rankings,
                                     const RelevanceMatrix& relevance,
                                     std::size_t bits);

// One point per cutoff: the top `cutoff` items are retrieved.
std::vector<PrPoint> PrCurveByRank(std::span<const Ranking> rankings,
                                   const RelevanceMatrix& relevance,
                                   std::span<const std::size_t> cutoffs);

struct Quartiles {
  std::size_t count = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

// Linear interpolation between order statistics at p * (n - 1). Throws on an
// empty input.
Quartiles ComputeQuartiles(std::vector<double> values);

struct BoxplotGroup {
  bool noisy = false;
  bool in_category = false;
  Quartiles stats;
};

struct BoxplotReport {
  std::vector<BoxplotGroup> groups;  // order: clean/in, clean/out, noisy/in, noisy/out
  std::vector<std::string> omitted;  // empty groups, by name
};

// Per instance, the mean cosine score to the centers of its labeled
// categories (in) and to all other centers (out), summarized per
// {clean, noisy} x {in, out}. Without a mask every instance is clean.
BoxplotReport BoxplotStats(const Eigen::MatrixXd& codes,
                           const Eigen::MatrixXd& centers,
                           std::span<const Label> labels,
                           const NoiseMask* mask);

std::string BoxplotGroupName(const BoxplotGroup& g);

}  // namespace dcmh

#endif  // DCMH_RETRIEVAL_H_
