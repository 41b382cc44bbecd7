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

#include "dcmh/dataset.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>
#include <utility>

#include "dcmh/binary_io.h"
#include "dcmh/errors.h"

namespace dcmh {
namespace {

constexpr char kDatasetMagic[] = "DCMH";
constexpr char kMaskMagic[] = "DCNM";
constexpr std::uint32_t kVersion = 1;

std::vector<double> UnitGaussianVector(std::uint32_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double& e : v) {
      e = normal(rng);
      norm2 += e * e;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& e : v) e *= inv;
  return v;
}

std::vector<float> ToFloat(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

std::size_t Cardinality(const Label& l) {
  return static_cast<std::size_t>(std::count(l.begin(), l.end(), 1));
}

// Uniform integer in [lo, hi].
std::size_t UniformIn(std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// `count` distinct elements of `pool`, chosen uniformly.
std::vector<std::size_t> Choose(std::vector<std::size_t> pool,
                                std::size_t count, std::mt19937_64& rng) {
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(pool[i], pool[UniformIn(i, pool.size() - 1, rng)]);
  }
  pool.resize(count);
  return pool;
}

bool TypeFeasible(int type, std::size_t c, std::size_t m) {
  const std::size_t free = m - c;
  switch (type) {
    case 1:
      return c >= 2 && free >= 1;
    case 2:
      return free >= c;
    case 3:
      return m >= 2;
    case 4:
      return free >= 2 || (free == 1 && c != 1);
    default:
      return false;
  }
}

Label Corrupt(const Label& original, int type, std::mt19937_64& rng) {
  const std::size_t m = original.size();
  std::vector<std::size_t> kept_pool, new_pool;
  for (std::size_t j = 0; j < m; ++j) {
    (original[j] ? kept_pool : new_pool).push_back(j);
  }
  const std::size_t c = kept_pool.size();
  const std::size_t free = new_pool.size();

  std::size_t new_card = c;
  std::size_t keep = 0;
  switch (type) {
    case 1:
      keep = UniformIn(std::max<std::size_t>(1, c > free ? c - free : 0),
                       c - 1, rng);
      break;
    case 2:
      keep = 0;
      break;
    case 3: {
      // Uniform over [1, m] \ {c}.
      new_card = UniformIn(1, m - 1, rng);
      if (new_card >= c) ++new_card;
      const std::size_t lo =
          std::max<std::size_t>(1, new_card > free ? new_card - free : 0);
      keep = UniformIn(lo, std::min(c, new_card), rng);
      break;
    }
    case 4: {
      // Uniform over [1, free] \ {c}.
      const std::size_t options = c <= free ? free - 1 : free;
      new_card = UniformIn(1, options, rng);
      if (c <= free && new_card >= c) ++new_card;
      keep = 0;
      break;
    }
    default:
      throw std::invalid_argument("unknown corruption type");
  }

  Label out(m, 0);
  for (std::size_t j : Choose(kept_pool, keep, rng)) out[j] = 1;
  for (std::size_t j : Choose(new_pool, new_card - keep, rng)) out[j] = 1;
  return out;
}

void CheckLabel(const Label& l, std::size_t m, std::size_t row) {
  if (l.size() != m) {
    throw std::invalid_argument("instance " + std::to_string(row) +
                                ": label length " + std::to_string(l.size()) +
                                " != m " + std::to_string(m));
  }
  bool any = false;
  for (std::uint8_t v : l) {
    if (v > 1) {
      throw std::invalid_argument("instance " + std::to_string(row) +
                                  ": label entry is not 0/1");
    }
    any |= v == 1;
  }
  if (!any) {
    throw std::invalid_argument("instance " + std::to_string(row) +
                                ": label has no positive category");
  }
}

}  // namespace

const char* SplitName(Split split) {
  switch (split) {
    case Split::kTrain:
      return "train";
    case Split::kRetrieval:
      return "retrieval";
    case Split::kTest:
      return "test";
    case Split::kUnspecified:
      break;
  }
  return "unspecified";
}

void Dataset::Validate() const {
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const Instance& inst = instances[i];
    if (inst.x.size() != d_x || inst.y.size() != d_y) {
      throw std::invalid_argument("instance " + std::to_string(i) +
                                  ": feature dimensions do not match header");
    }
    CheckLabel(inst.label, m, i);
  }
}

std::size_t NoiseMask::NumCorrupted() const {
  return noise_type.size() -
         static_cast<std::size_t>(
             std::count(noise_type.begin(), noise_type.end(), 0));
}

std::size_t NoiseMask::CountOfType(int type) const {
  return static_cast<std::size_t>(
      std::count(noise_type.begin(), noise_type.end(), type));
}

Prototypes MakePrototypes(std::uint32_t m, std::uint32_t d_x,
                          std::uint32_t d_y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Prototypes p;
  for (std::uint32_t j = 0; j < m; ++j) {
    p.x.push_back(ToFloat(UnitGaussianVector(d_x, rng)));
    p.y.push_back(ToFloat(UnitGaussianVector(d_y, rng)));
  }
  return p;
}

Dataset GenerateSynthetic(const SyntheticConfig& config) {
  const auto& range = config.labels_per_instance;
  if (config.m < 2 || config.n < config.m) {
    throw std::invalid_argument("synthetic data needs n >= m >= 2");
  }
  if (config.d_x < 4 || config.d_y < 4) {
    throw std::invalid_argument("synthetic feature dimensions must be >= 4");
  }
  if (range.min < 1 || range.min > range.max || range.max > config.m) {
    throw std::invalid_argument(
        "labels_per_instance must satisfy 1 <= min <= max <= m");
  }
  if (!(config.cluster_spread >= 0.0) || !std::isfinite(config.cluster_spread)) {
    throw std::invalid_argument("cluster_spread must be finite and >= 0");
  }

  std::mt19937_64 rng(config.seed);
  // Prototypes are drawn first from the same stream MakePrototypes uses.
  std::vector<std::vector<double>> proto_x, proto_y;
  for (std::uint32_t j = 0; j < config.m; ++j) {
    proto_x.push_back(UnitGaussianVector(config.d_x, rng));
    proto_y.push_back(UnitGaussianVector(config.d_y, rng));
  }

  std::vector<std::size_t> all_categories(config.m);
  std::iota(all_categories.begin(), all_categories.end(), 0);

  auto make_feature = [&](const std::vector<std::vector<double>>& protos,
                          const std::vector<std::size_t>& cats,
                          std::uint32_t dim) {
    std::vector<double> f(dim, 0.0);
    for (std::size_t c : cats) {
      for (std::uint32_t d = 0; d < dim; ++d) f[d] += protos[c][d];
    }
    for (double& e : f) e /= static_cast<double>(cats.size());
    if (config.cluster_spread > 0.0) {
      std::normal_distribution<double> noise(0.0, config.cluster_spread);
      for (double& e : f) e += noise(rng);
    }
    return ToFloat(f);
  };

  Dataset ds;
  ds.d_x = config.d_x;
  ds.d_y = config.d_y;
  ds.m = config.m;
  ds.seed = config.seed;
  ds.instances.reserve(config.n);
  for (std::uint32_t i = 0; i < config.n; ++i) {
    const std::size_t card = UniformIn(range.min, range.max, rng);
    std::vector<std::size_t> cats = Choose(all_categories, card, rng);
    std::sort(cats.begin(), cats.end());
    Instance inst;
    inst.label.assign(config.m, 0);
    for (std::size_t c : cats) inst.label[c] = 1;
    inst.x = make_feature(proto_x, cats, config.d_x);
    inst.y = make_feature(proto_y, cats, config.d_y);
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

DatasetSplits SplitDataset(const Dataset& ds, std::size_t n_train,
                           std::size_t n_retrieval, std::size_t n_test) {
  if (n_train + n_retrieval + n_test > ds.n()) {
    throw std::invalid_argument("split sizes exceed dataset size");
  }
  auto slice = [&](std::size_t begin, std::size_t count, Split split) {
    Dataset out;
    out.d_x = ds.d_x;
    out.d_y = ds.d_y;
    out.m = ds.m;
    out.seed = ds.seed;
    out.split = split;
    out.instances.assign(ds.instances.begin() + begin,
                         ds.instances.begin() + begin + count);
    return out;
  };
  return {slice(0, n_train, Split::kTrain),
          slice(n_train, n_retrieval, Split::kRetrieval),
          slice(n_train + n_retrieval, n_test, Split::kTest)};
}

std::size_t NoisyCount(double tau, std::size_t n) {
  return static_cast<std::size_t>(std::floor(tau * static_cast<double>(n) + 0.5));
}

NoisyDataset InjectNoise(const Dataset& ds, double tau, std::uint64_t seed) {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("noise ratio must lie in [0, 1]");
  }
  ds.Validate();
  const std::size_t n = ds.n();
  const std::size_t m = ds.m;
  const std::size_t count = NoisyCount(tau, n);
  if (tau > 0.0 && count < 4) {
    throw std::invalid_argument(
        "noise ratio selects fewer than 4 instances; every corruption type "
        "must be represented");
  }

  NoisyDataset out{ds, {}};
  out.mask.m = ds.m;
  out.mask.noise_type.assign(n, 0);
  out.mask.original_labels.assign(n, Label(m, 0));
  if (count == 0) return out;

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<int> types;
  types.reserve(count);
  const std::size_t base = count / 4;
  const std::size_t extra = count % 4;
  for (int t = 1; t <= 4; ++t) {
    const std::size_t quota = base + (static_cast<std::size_t>(t) <= extra);
    types.insert(types.end(), quota, t);
  }

  auto card = [&](std::size_t pos) {
    return Cardinality(ds.instances[order[pos]].label);
  };
  for (std::size_t i = 0; i < count; ++i) {
    if (TypeFeasible(types[i], card(i), m)) continue;
    bool fixed = false;
    for (std::size_t j = 0; j < count && !fixed; ++j) {
      if (types[j] != types[i] && TypeFeasible(types[i], card(j), m) &&
          TypeFeasible(types[j], card(i), m)) {
        std::swap(order[i], order[j]);
        fixed = true;
      }
    }
    for (std::size_t r = count; r < n && !fixed; ++r) {
      if (TypeFeasible(types[i], card(r), m)) {
        std::swap(order[i], order[r]);
        fixed = true;
      }
    }
    if (fixed) continue;
    // Quotas cannot be kept; resample this instance into a type it can take.
    const std::vector<int> fallback =
        types[i] == 1 ? std::vector<int>{3}
                      : types[i] == 3 ? std::vector<int>{1} : std::vector<int>{1, 3};
    for (int t : fallback) {
      if (!fixed && TypeFeasible(t, card(i), m)) {
        types[i] = t;
        fixed = true;
      }
    }
    if (!fixed) {
      throw std::invalid_argument("no corruption type is feasible for instance " +
                                  std::to_string(order[i]));
    }
  }

  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t row = order[i];
    Label& label = out.data.instances[row].label;
    out.mask.original_labels[row] = label;
    out.mask.noise_type[row] = static_cast<std::uint8_t>(types[i]);
    label = Corrupt(label, types[i], rng);
  }
  return out;
}

int LabelSimilarity(std::span<const std::uint8_t> a,
                    std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("label length mismatch: " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] && b[j]) return 1;
  }
  return -1;
}

std::vector<std::uint8_t> EncodeDataset(const Dataset& ds) {
  ds.Validate();
  ByteWriter w;
  w.PutMagic(kDatasetMagic);
  w.PutU32(kVersion);
  w.PutU32(static_cast<std::uint32_t>(ds.n()));
  w.PutU32(ds.d_x);
  w.PutU32(ds.d_y);
  w.PutU32(ds.m);
  w.PutU64(ds.seed);
  for (const Instance& inst : ds.instances) {
    for (float v : inst.x) w.PutF32(v);
    for (float v : inst.y) w.PutF32(v);
    w.PutBytes(inst.label);
  }
  return w.Release();
}

Dataset DecodeDataset(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.ExpectMagic(kDatasetMagic);
  r.ExpectVersion(kVersion);
  const std::uint32_t n = r.U32();
  Dataset ds;
  ds.d_x = r.U32();
  ds.d_y = r.U32();
  ds.m = r.U32();
  ds.seed = r.U64();
  const std::uint64_t record =
      4ull * ds.d_x + 4ull * ds.d_y + static_cast<std::uint64_t>(ds.m);
  if (record * n > r.remaining()) {
    throw FormatError("truncated payload: header declares " +
                          std::to_string(n) + " records of " +
                          std::to_string(record) + " bytes",
                      r.offset());
  }
  ds.instances.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::size_t start = r.offset();
    Instance& inst = ds.instances[i];
    inst.x.resize(ds.d_x);
    inst.y.resize(ds.d_y);
    inst.label.resize(ds.m);
    for (float& v : inst.x) v = r.F32();
    for (float& v : inst.y) v = r.F32();
    r.Bytes(inst.label);
    try {
      CheckLabel(inst.label, ds.m, i);
    } catch (const std::invalid_argument& e) {
      throw FormatError(e.what(), start);
    }
  }
  r.ExpectEnd();
  return ds;
}

void SaveDataset(const Dataset& ds, const std::string& path) {
  WriteFileBytes(path, EncodeDataset(ds));
}

Dataset LoadDataset(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return DecodeDataset(bytes);
  } catch (const FormatError& e) {
    throw e.WithContext(path);
  }
}

std::vector<std::uint8_t> EncodeNoiseMask(const NoiseMask& mask) {
  if (mask.original_labels.size() != mask.n()) {
    throw std::invalid_argument("noise mask rows are inconsistent");
  }
  ByteWriter w;
  w.PutMagic(kMaskMagic);
  w.PutU32(kVersion);
  w.PutU32(static_cast<std::uint32_t>(mask.n()));
  for (std::size_t i = 0; i < mask.n(); ++i) {
    if (mask.original_labels[i].size() != mask.m) {
      throw std::invalid_argument("noise mask label length != m");
    }
    w.PutU8(mask.noise_type[i]);
    w.PutBytes(mask.original_labels[i]);
  }
  return w.Release();
}

NoiseMask DecodeNoiseMask(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.ExpectMagic(kMaskMagic);
  r.ExpectVersion(kVersion);
  const std::uint32_t n = r.U32();
  NoiseMask mask;
  if (n == 0) {
    r.ExpectEnd();
    return mask;
  }
  if (r.remaining() % n != 0 || r.remaining() / n < 2) {
    throw FormatError("payload of " + std::to_string(r.remaining()) +
                          " bytes is not " + std::to_string(n) +
                          " whole records",
                      r.offset());
  }
  mask.m = static_cast<std::uint32_t>(r.remaining() / n - 1);
  mask.noise_type.resize(n);
  mask.original_labels.assign(n, Label(mask.m, 0));
  for (std::uint32_t i = 0; i < n; ++i) {
    const std::size_t start = r.offset();
    mask.noise_type[i] = r.U8();
    if (mask.noise_type[i] > 4) {
      throw FormatError("noise type out of range", start);
    }
    r.Bytes(mask.original_labels[i]);
  }
  r.ExpectEnd();
  return mask;
}

void SaveNoiseMask(const NoiseMask& mask, const std::string& path) {
  WriteFileBytes(path, EncodeNoiseMask(mask));
}

NoiseMask LoadNoiseMask(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return DecodeNoiseMask(bytes);
  } catch (const FormatError& e) {
    throw e.WithContext(path);
  }
}

void ExportCsv(const Dataset& ds, std::ostream& out) {
  for (std::uint32_t d = 0; d < ds.d_x; ++d) out << "x" << d << ',';
  for (std::uint32_t d = 0; d < ds.d_y; ++d) out << "y" << d << ',';
  for (std::uint32_t j = 0; j < ds.m; ++j) {
    out << "l" << j << (j + 1 < ds.m ? "," : "\n");
  }
  for (const Instance& inst : ds.instances) {
    for (float v : inst.x) out << v << ',';
    for (float v : inst.y) out << v << ',';
    for (std::uint32_t j = 0; j < ds.m; ++j) {
      out << static_cast<int>(inst.label[j]) << (j + 1 < ds.m ? "," : "\n");
    }
  }
}

}  // namespace dcmh
