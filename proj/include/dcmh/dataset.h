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

// Two-modality multi-label datasets: synthesis, label-noise injection,
// label similarity and the DCMH/DCNM binary formats.

#ifndef DCMH_DATASET_H_
#define DCMH_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dcmh {

// Multi-hot label vector, one byte per category, entries in {0, 1}.
using Label = std::vector<std::uint8_t>;

struct Instance {
  std::vector<float> x;  // text-modality feature
  std::vector<float> y;  // image-modality feature
  Label label;

  friend bool operator==(const Instance&, const Instance&) = default;
};

enum class Split { kUnspecified, kTrain, kRetrieval, kTest };

const char* SplitName(Split split);

struct Dataset {
  std::uint32_t d_x = 0;
  std::uint32_t d_y = 0;
  std::uint32_t m = 0;
  std::uint64_t seed = 0;
  // Not persisted; loaded datasets come back as kUnspecified.
  Split split = Split::kUnspecified;
  std::vector<Instance> instances;

  std::size_t n() const { return instances.size(); }

  // Throws std::invalid_argument on mismatched dimensions, non-binary or
  // empty labels.
  void Validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Records which training instances were corrupted and how. Used for audits
// and tests only; training never reads it.
struct NoiseMask {
  std::uint32_t m = 0;
  // 0 = clean, 1..4 = corruption type.
  std::vector<std::uint8_t> noise_type;
  // Pre-corruption label for corrupted rows, all zeros for clean rows.
  std::vector<Label> original_labels;

  std::size_t n() const { return noise_type.size(); }
  bool corrupted(std::size_t i) const { return noise_type[i] != 0; }
  std::size_t NumCorrupted() const;
  std::size_t CountOfType(int type) const;

  friend bool operator==(const NoiseMask&, const NoiseMask&) = default;
};

struct LabelRange {
  std::uint32_t min = 1;
  std::uint32_t max = 1;
};

struct SyntheticConfig {
  std::uint32_t n = 0;
  std::uint32_t m = 0;
  std::uint32_t d_x = 0;
  std::uint32_t d_y = 0;
  LabelRange labels_per_instance;
  double cluster_spread = 0.0;
  std::uint64_t seed = 0;
};

// Per-category unit-norm prototypes for both modalities.
struct Prototypes {
  std::vector<std::vector<float>> x;
  std::vector<std::vector<float>> y;
};

// The prototypes GenerateSynthetic uses for the same (m, d_x, d_y, seed).
Prototypes MakePrototypes(std::uint32_t m, std::uint32_t d_x,
                          std::uint32_t d_y, std::uint64_t seed);

// Each instance draws a label cardinality uniformly from the configured range
// and that many distinct categories; each modality feature is the mean of
// the categories' prototypes plus isotropic Gaussian noise of scale
// `cluster_spread`. Deterministic in `config.seed`.
Dataset GenerateSynthetic(const SyntheticConfig& config);

struct DatasetSplits {
  Dataset train;
  Dataset retrieval;
  Dataset test;
};

// Consecutive slices [train | retrieval | test] of `ds`, tagged by split.
DatasetSplits SplitDataset(const Dataset& ds, std::size_t n_train,
                           std::size_t n_retrieval, std::size_t n_test);

// round(tau * n), half-up.
std::size_t NoisyCount(double tau, std::size_t n);

struct NoisyDataset {
  Dataset data;
  NoiseMask mask;
};

// Corrupts NoisyCount(tau, n) instances chosen uniformly without
// replacement, split as evenly as possible over the four corruption types:
//   1: same cardinality, keeps a nonempty proper subset of the originals
//   2: same cardinality, all categories new
//   3: different cardinality, keeps at least one original
//   4: different cardinality, all categories new
// An instance that cannot take its assigned type (for example a label that
// already covers every category cannot take type 2) trades types with
// another selected instance, or is replaced by an unselected one.
NoisyDataset InjectNoise(const Dataset& ds, double tau, std::uint64_t seed);

// +1 if the labels share at least one category, -1 otherwise.
int LabelSimilarity(std::span<const std::uint8_t> a,
                    std::span<const std::uint8_t> b);

std::vector<std::uint8_t> EncodeDataset(const Dataset& ds);
Dataset DecodeDataset(std::span<const std::uint8_t> bytes);
void SaveDataset(const Dataset& ds, const std::string& path);
Dataset LoadDataset(const std::string& path);

// The mask format has no m field; m is recovered from the record size.
std::vector<std::uint8_t> EncodeNoiseMask(const NoiseMask& mask);
NoiseMask DecodeNoiseMask(std::span<const std::uint8_t> bytes);
void SaveNoiseMask(const NoiseMask& mask, const std::string& path);
NoiseMask LoadNoiseMask(const std::string& path);

// Inspection-only CSV: one row per instance, features then labels.
void ExportCsv(const Dataset& ds, std::ostream& out);

}  // namespace dcmh

#endif  // DCMH_DATASET_H_
