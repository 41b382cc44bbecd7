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

#include "dcmh/retrieval.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "dcmh/binary_io.h"
#include "dcmh/errors.h"
#include "dcmh/filter.h"
#include "dcmh/parallel.h"

namespace dcmh {
namespace {

constexpr char kIndexMagic[] = "DCIX";
constexpr std::uint32_t kVersion = 1;

void CheckRankings(std::span<const Ranking> rankings,
                   const RelevanceMatrix& relevance) {
  if (rankings.empty()) throw std::invalid_argument("no queries to evaluate");
  if (rankings.size() != relevance.queries()) {
    throw std::invalid_argument("rankings and relevance differ in query count");
  }
  for (const Ranking& r : rankings) {
    if (r.order.size() != relevance.database()) {
      throw std::invalid_argument("ranking does not cover the database");
    }
  }
}

}  // namespace

std::size_t WordsForBits(std::size_t bits) { return (bits + 63) / 64; }

std::vector<std::uint64_t> PackCode(const BinaryCode& code) {
  std::vector<std::uint64_t> words(WordsForBits(code.size()), 0);
  for (std::size_t b = 0; b < code.size(); ++b) {
    if (code[b] != 1 && code[b] != -1) {
      throw std::invalid_argument("binary code entries must be +1 or -1");
    }
    if (code[b] > 0) words[b / 64] |= std::uint64_t{1} << (b % 64);
  }
  return words;
}

BinaryCode UnpackCode(std::span<const std::uint64_t> words, std::size_t bits) {
  BinaryCode out(bits);
  for (std::size_t b = 0; b < bits; ++b) {
    out[b] = (words[b / 64] >> (b % 64)) & 1u ? 1 : -1;
  }
  return out;
}

int PackedHammingDistance(std::span<const std::uint64_t> a,
                          std::span<const std::uint64_t> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("packed codes differ in length");
  }
  int d = 0;
  for (std::size_t w = 0; w < a.size(); ++w) d += std::popcount(a[w] ^ b[w]);
  return d;
}

int HammingDistance(const BinaryCode& a, const BinaryCode& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("codes differ in length: " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  return PackedHammingDistance(PackCode(a), PackCode(b));
}

PackedCodeIndex PackedCodeIndex::Build(std::span<const BinaryCode> codes,
                                       std::vector<Label> labels) {
  if (!labels.empty() && labels.size() != codes.size()) {
    throw std::invalid_argument("index labels must match codes one to one");
  }
  PackedCodeIndex index;
  index.bits_ = codes.empty() ? 0 : static_cast<std::uint32_t>(codes[0].size());
  index.words_ = WordsForBits(index.bits_);
  index.words_data_.reserve(codes.size() * index.words_);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i].size() != index.bits_) {
      throw std::invalid_argument("index codes differ in length");
    }
    const auto packed = PackCode(codes[i]);
    index.words_data_.insert(index.words_data_.end(), packed.begin(), packed.end());
    index.ids_.push_back(static_cast<std::uint32_t>(i));
  }
  index.labels_ = std::move(labels);
  return index;
}

std::vector<std::uint8_t> PackedCodeIndex::Encode() const {
  ByteWriter w;
  w.PutMagic(kIndexMagic);
  w.PutU32(kVersion);
  w.PutU32(static_cast<std::uint32_t>(size()));
  w.PutU32(bits_);
  for (std::uint64_t word : words_data_) w.PutU64(word);
  for (const Label& l : labels_) w.PutBytes(l);
  return w.Release();
}

PackedCodeIndex PackedCodeIndex::Decode(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.ExpectMagic(kIndexMagic);
  r.ExpectVersion(kVersion);
  const std::uint32_t n = r.U32();
  PackedCodeIndex index;
  index.bits_ = r.U32();
  index.words_ = WordsForBits(index.bits_);
  const std::uint64_t word_bytes = 8ull * n * index.words_;
  if (word_bytes > r.remaining()) {
    throw FormatError("truncated payload: header declares " + std::to_string(n) +
                          " codes of " + std::to_string(index.bits_) + " bits",
                      r.offset());
  }
  index.words_data_.resize(static_cast<std::size_t>(n) * index.words_);
  const std::uint64_t tail_mask =
      index.bits_ % 64 == 0 ? 0 : ~((std::uint64_t{1} << (index.bits_ % 64)) - 1);
  for (std::size_t i = 0; i < index.words_data_.size(); ++i) {
    const std::size_t at = r.offset();
    index.words_data_[i] = r.U64();
    if ((i % index.words_) + 1 == index.words_ &&
        (index.words_data_[i] & tail_mask) != 0) {
      throw FormatError("nonzero tail bits in packed code", at);
    }
  }
  for (std::uint32_t i = 0; i < n; ++i) index.ids_.push_back(i);
  if (n > 0 && r.remaining() > 0) {
    if (r.remaining() % n != 0) {
      throw FormatError("label matrix is not " + std::to_string(n) +
                            " whole rows",
                        r.offset());
    }
    const std::size_t m = r.remaining() / n;
    index.labels_.assign(n, Label(m, 0));
    for (Label& l : index.labels_) r.Bytes(l);
  }
  r.ExpectEnd();
  return index;
}

void PackedCodeIndex::Save(const std::string& path) const {
  WriteFileBytes(path, Encode());
}

PackedCodeIndex PackedCodeIndex::Load(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return Decode(bytes);
  } catch (const FormatError& e) {
    throw e.WithContext(path);
  }
}

Ranking Rank(std::span<const std::uint64_t> query, const PackedCodeIndex& index) {
  if (query.size() != index.words_per_code()) {
    throw std::invalid_argument("query length does not match index");
  }
  const std::size_t n = index.size();
  std::vector<std::uint32_t> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = static_cast<std::uint32_t>(PackedHammingDistance(query, index.code(i)));
  }
  // Counting sort over distances 0..bits keeps ascending id order within
  // each distance bucket.
  std::vector<std::size_t> start(index.bits() + 2, 0);
  for (std::uint32_t d : dist) ++start[d + 1];
  for (std::size_t b = 1; b < start.size(); ++b) start[b] += start[b - 1];
  Ranking out;
  out.order.resize(n);
  out.distances.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pos = start[dist[i]]++;
    out.order[pos] = index.ids()[i];
    out.distances[pos] = dist[i];
  }
  return out;
}

std::vector<Ranking> RankAll(std::span<const BinaryCode> queries,
                             const PackedCodeIndex& index) {
  std::vector<Ranking> out(queries.size());
  ParallelFor(queries.size(), [&](std::size_t q) {
    if (queries[q].size() != index.bits()) {
      throw std::invalid_argument("query code length " +
                                  std::to_string(queries[q].size()) +
                                  " != index code length " +
                                  std::to_string(index.bits()));
    }
    out[q] = Rank(PackCode(queries[q]), index);
  });
  return out;
}

RelevanceMatrix RelevanceMatrix::FromLabels(std::span<const Label> query_labels,
                                            std::span<const Label> db_labels) {
  RelevanceMatrix rel(query_labels.size(), db_labels.size());
  for (std::size_t q = 0; q < query_labels.size(); ++q) {
    for (std::size_t d = 0; d < db_labels.size(); ++d) {
      rel.Set(q, d, LabelSimilarity(query_labels[q], db_labels[d]) > 0);
    }
  }
  return rel;
}

std::size_t RelevanceMatrix::RelevantCount(std::size_t q) const {
  std::size_t c = 0;
  for (std::size_t d = 0; d < database_; ++d) c += (*this)(q, d);
  return c;
}

double AveragePrecision(std::span<const std::uint8_t> ranked_relevance) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < ranked_relevance.size(); ++r) {
    if (ranked_relevance[r]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

double MeanAveragePrecision(std::span<const Ranking> rankings,
                            const RelevanceMatrix& relevance,
                            std::vector<double>* per_query) {
  CheckRankings(rankings, relevance);
  std::vector<double> ap(rankings.size());
  ParallelFor(rankings.size(), [&](std::size_t q) {
    std::vector<std::uint8_t> seq(rankings[q].order.size());
    for (std::size_t r = 0; r < seq.size(); ++r) {
      seq[r] = relevance(q, rankings[q].order[r]);
    }
    ap[q] = AveragePrecision(seq);
  });
  double sum = 0.0;
  for (double v : ap) sum += v;
  if (per_query) *per_query = ap;
  return sum / static_cast<double>(ap.size());
}

std::vector<double> PrecisionAtN(std::span<const Ranking> rankings,
                                 const RelevanceMatrix& relevance,
                                 std::span<const std::size_t> ns) {
  CheckRankings(rankings, relevance);
  for (std::size_t n : ns) {
    if (n == 0) throw std::invalid_argument("precision cutoff N must be >= 1");
    if (n > relevance.database()) {
      throw std::invalid_argument("precision cutoff N=" + std::to_string(n) +
                                  " exceeds database size " +
                                  std::to_string(relevance.database()));
    }
  }
  std::vector<double> out;
  for (std::size_t n : ns) {
    double sum = 0.0;
    for (std::size_t q = 0; q < rankings.size(); ++q) {
      std::size_t hits = 0;
      for (std::size_t r = 0; r < n; ++r) hits += relevance(q, rankings[q].order[r]);
      sum += static_cast<double>(hits) / static_cast<double>(n);
    }
    out.push_back(sum / static_cast<double>(rankings.size()));
  }
  return out;
}

std::vector<PrPoint> PrCurveByRadius(std::span<const Ranking> rankings,
                                     const RelevanceMatrix& relevance,
                                     std::size_t bits) {
  CheckRankings(rankings, relevance);
  std::vector<PrPoint> out(bits + 1);
  for (std::size_t r = 0; r <= bits; ++r) out[r].cutoff = r;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    const Ranking& rk = rankings[q];
    const std::size_t total = relevance.RelevantCount(q);
    std::size_t retrieved = 0;
    std::size_t hits = 0;
    for (std::size_t radius = 0; radius <= bits; ++radius) {
      while (retrieved < rk.order.size() && rk.distances[retrieved] <= radius) {
        hits += relevance(q, rk.order[retrieved]);
        ++retrieved;
      }
      out[radius].precision +=
          retrieved == 0 ? 1.0
                         : static_cast<double>(hits) / static_cast<double>(retrieved);
      out[radius].recall +=
          total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
    }
  }
  for (PrPoint& p : out) {
    p.precision /= static_cast<double>(rankings.size());
    p.recall /= static_cast<double>(rankings.size());
  }
  return out;
}

std::vector<PrPoint> PrCurveByRank(std::span<const Ranking> rankings,
                                   const RelevanceMatrix& relevance,
                                   std::span<const std::size_t> cutoffs) {
  CheckRankings(rankings, relevance);
  std::vector<PrPoint> out;
  for (std::size_t cutoff : cutoffs) {
    if (cutoff > relevance.database()) {
      throw std::invalid_argument("rank cutoff exceeds database size");
    }
    PrPoint p;
    p.cutoff = cutoff;
    for (std::size_t q = 0; q < rankings.size(); ++q) {
      const std::size_t total = relevance.RelevantCount(q);
      std::size_t hits = 0;
      for (std::size_t r = 0; r < cutoff; ++r) hits += relevance(q, rankings[q].order[r]);
      p.precision += cutoff == 0 ? 1.0
                                 : static_cast<double>(hits) / static_cast<double>(cutoff);
      p.recall += total == 0 ? 0.0
                             : static_cast<double>(hits) / static_cast<double>(total);
    }
    p.precision /= static_cast<double>(rankings.size());
    p.recall /= static_cast<double>(rankings.size());
    out.push_back(p);
  }
  return out;
}

Quartiles ComputeQuartiles(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("no values to summarize");
  std::sort(values.begin(), values.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  Quartiles q;
  q.count = values.size();
  q.min = values.front();
  q.q1 = at(0.25);
  q.median = at(0.5);
  q.q3 = at(0.75);
  q.max = values.back();
  return q;
}

std::string BoxplotGroupName(const BoxplotGroup& g) {
  return std::string(g.noisy ? "noisy" : "clean") + "/" +
         (g.in_category ? "in" : "out");
}

BoxplotReport BoxplotStats(const Eigen::MatrixXd& codes,
                           const Eigen::MatrixXd& centers,
                           std::span<const Label> labels,
                           const NoiseMask* mask) {
  if (static_cast<std::size_t>(codes.rows()) != labels.size()) {
    throw std::invalid_argument("codes and labels differ in count");
  }
  if (mask && mask->n() != labels.size()) {
    throw std::invalid_argument("noise mask does not match the instances");
  }
  const Eigen::MatrixXd scores = ComputeScores(codes, centers).scores;
  // [noisy][in_category]
  std::vector<double> values[2][2];
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const Label& l = labels[static_cast<std::size_t>(i)];
    double sum[2] = {0.0, 0.0};
    int count[2] = {0, 0};
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const int in = l[static_cast<std::size_t>(j)] ? 1 : 0;
      sum[in] += scores(i, j);
      ++count[in];
    }
    const int noisy = mask && mask->corrupted(static_cast<std::size_t>(i)) ? 1 : 0;
    for (int in = 0; in < 2; ++in) {
      if (count[in] > 0) values[noisy][in].push_back(sum[in] / count[in]);
    }
  }
  BoxplotReport report;
  for (int noisy = 0; noisy < 2; ++noisy) {
    for (int in = 1; in >= 0; --in) {
      BoxplotGroup g;
      g.noisy = noisy == 1;
      g.in_category = in == 1;
      if (values[noisy][in].empty()) {
        report.omitted.push_back(BoxplotGroupName(g));
        continue;
      }
      g.stats = ComputeQuartiles(values[noisy][in]);
      report.groups.push_back(g);
    }
  }
  return report;
}

}  // namespace dcmh
