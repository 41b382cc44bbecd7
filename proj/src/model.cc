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

#include "dcmh/model.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "dcmh/binary_io.h"
#include "dcmh/errors.h"

namespace dcmh {
namespace {

constexpr char kCheckpointMagic[] = "DCMP";
constexpr std::uint32_t kVersion = 1;

struct RowActivations {
  Eigen::RowVectorXd a1x, h1x, a1y, h1y, fused, code;
};

Eigen::RowVectorXd Relu(const Eigen::RowVectorXd& v) {
  return v.cwiseMax(0.0);
}

// The single forward path; every public entry point goes through it so that
// batched and single-instance codes agree bit for bit.
RowActivations ForwardRow(const ModelParams& p, const Eigen::RowVectorXd& x,
                          const Eigen::RowVectorXd& y) {
  RowActivations act;
  act.a1x = x * p.w1x + p.b1x.transpose();
  act.h1x = Relu(act.a1x);
  act.a1y = y * p.w1y + p.b1y.transpose();
  act.h1y = Relu(act.a1y);
  act.fused = (act.h1x * p.w2x + p.b2x.transpose()) +
              (act.h1y * p.w2y + p.b2y.transpose());
  act.code = (act.fused * p.wh + p.bh.transpose()).array().tanh().matrix();
  return act;
}

void CheckInputs(const ModelParams& p, Eigen::Index x_cols, Eigen::Index y_cols) {
  if (x_cols != p.w1x.rows() || y_cols != p.w1y.rows()) {
    throw std::invalid_argument(
        "feature dimensions (" + std::to_string(x_cols) + ", " +
        std::to_string(y_cols) + ") do not match model (" +
        std::to_string(p.w1x.rows()) + ", " + std::to_string(p.w1y.rows()) +
        ")");
  }
}

void CheckFinite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains non-finite values");
  }
}

struct BatchActivations {
  Eigen::MatrixXd a1x, h1x, a1y, h1y, fused, codes;
};

BatchActivations ForwardCached(const ModelParams& p, const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& y) {
  CheckInputs(p, x.cols(), y.cols());
  if (x.rows() != y.rows()) {
    throw std::invalid_argument("modalities have different row counts");
  }
  CheckFinite(x, "text features");
  CheckFinite(y, "image features");
  const Eigen::Index n = x.rows();
  BatchActivations b;
  b.a1x.resize(n, p.w1x.cols());
  b.h1x.resize(n, p.w1x.cols());
  b.a1y.resize(n, p.w1y.cols());
  b.h1y.resize(n, p.w1y.cols());
  b.fused.resize(n, p.wh.rows());
  b.codes.resize(n, p.wh.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVectorXd xr = x.row(i);
    const Eigen::RowVectorXd yr = y.row(i);
    RowActivations act = ForwardRow(p, xr, yr);
    b.a1x.row(i) = act.a1x;
    b.h1x.row(i) = act.h1x;
    b.a1y.row(i) = act.a1y;
    b.h1y.row(i) = act.h1y;
    b.fused.row(i) = act.fused;
    b.codes.row(i) = act.code;
  }
  return b;
}

// Accumulates parameter gradients for dL/dcodes flowing back through `act`.
void BackpropInto(const ModelParams& p, const BatchActivations& act,
                  const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                  const Eigen::MatrixXd& d_codes, GradientSet& g) {
  if (act.codes.rows() == 0) return;
  const Eigen::MatrixXd d_pre =
      d_codes.cwiseProduct((1.0 - act.codes.array().square()).matrix());
  g.wh.noalias() += act.fused.transpose() * d_pre;
  g.bh += d_pre.colwise().sum().transpose();
  const Eigen::MatrixXd d_fused = d_pre * p.wh.transpose();

  auto branch = [&](const Eigen::MatrixXd& in, const Eigen::MatrixXd& a1,
                    const Eigen::MatrixXd& h1, const Eigen::MatrixXd& w2,
                    Eigen::MatrixXd& gw1, Eigen::VectorXd& gb1,
                    Eigen::MatrixXd& gw2, Eigen::VectorXd& gb2) {
    gw2.noalias() += h1.transpose() * d_fused;
    gb2 += d_fused.colwise().sum().transpose();
    const Eigen::MatrixXd d_a1 =
        (d_fused * w2.transpose())
            .cwiseProduct((a1.array() > 0.0).cast<double>().matrix());
    gw1.noalias() += in.transpose() * d_a1;
    gb1 += d_a1.colwise().sum().transpose();
  };
  branch(x, act.a1x, act.h1x, p.w2x, g.w1x, g.b1x, g.w2x, g.b2x);
  branch(y, act.a1y, act.h1y, p.w2y, g.w1y, g.b1y, g.w2y, g.b2y);
}

}  // namespace

void ModelShape::Validate() const {
  if (d_x == 0 || d_y == 0 || hidden == 0 || fusion == 0 || bits == 0 ||
      categories == 0) {
    throw std::invalid_argument("model dimensions must all be positive");
  }
}

NetworkTensors NetworkTensors::Zeros(const ModelShape& s) {
  NetworkTensors t;
  t.w1x.setZero(s.d_x, s.hidden);
  t.b1x.setZero(s.hidden);
  t.w2x.setZero(s.hidden, s.fusion);
  t.b2x.setZero(s.fusion);
  t.w1y.setZero(s.d_y, s.hidden);
  t.b1y.setZero(s.hidden);
  t.w2y.setZero(s.hidden, s.fusion);
  t.b2y.setZero(s.fusion);
  t.wh.setZero(s.fusion, s.bits);
  t.bh.setZero(s.bits);
  t.centers.setZero(s.categories, s.bits);
  return t;
}

ModelShape NetworkTensors::Shape() const {
  ModelShape s;
  s.d_x = static_cast<std::uint32_t>(w1x.rows());
  s.d_y = static_cast<std::uint32_t>(w1y.rows());
  s.hidden = static_cast<std::uint32_t>(w1x.cols());
  s.fusion = static_cast<std::uint32_t>(wh.rows());
  s.bits = static_cast<std::uint32_t>(wh.cols());
  s.categories = static_cast<std::uint32_t>(centers.rows());
  return s;
}

ModelParams InitParams(const ModelShape& shape, std::uint64_t seed) {
  shape.Validate();
  ModelParams p{NetworkTensors::Zeros(shape)};
  std::mt19937_64 rng(seed);
  auto fill = [&](auto& tensor, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (Eigen::Index r = 0; r < tensor.rows(); ++r) {
      for (Eigen::Index c = 0; c < tensor.cols(); ++c) tensor(r, c) = u(rng);
    }
  };
  // He-uniform weights for the ReLU layers, zero biases.
  auto fan_in = [](std::uint32_t n) { return std::sqrt(6.0 / static_cast<double>(n)); };
  fill(p.w1x, fan_in(shape.d_x));
  fill(p.w2x, fan_in(shape.hidden));
  fill(p.w1y, fan_in(shape.d_y));
  fill(p.w2y, fan_in(shape.hidden));
  fill(p.wh, fan_in(shape.fusion));
  fill(p.centers, 1.0);
  return p;
}

RealCode Forward(const ModelParams& params, std::span<const double> x,
                 std::span<const double> y) {
  CheckInputs(params, static_cast<Eigen::Index>(x.size()),
              static_cast<Eigen::Index>(y.size()));
  const Eigen::RowVectorXd xr = Eigen::Map<const Eigen::RowVectorXd>(
      x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::RowVectorXd yr = Eigen::Map<const Eigen::RowVectorXd>(
      y.data(), static_cast<Eigen::Index>(y.size()));
  CheckFinite(xr, "text features");
  CheckFinite(yr, "image features");
  return ForwardRow(params, xr, yr).code.transpose();
}

Eigen::MatrixXd ForwardBatch(const ModelParams& params, const Eigen::MatrixXd& x,
                             const Eigen::MatrixXd& y) {
  return ForwardCached(params, x, y).codes;
}

BinaryCode Binarize(const Eigen::Ref<const Eigen::VectorXd>& code) {
  BinaryCode out(static_cast<std::size_t>(code.size()));
  for (Eigen::Index i = 0; i < code.size(); ++i) {
    out[static_cast<std::size_t>(i)] = code(i) >= 0.0 ? 1 : -1;
  }
  return out;
}

BinaryCode HashUnseen(const ModelParams& params, std::span<const double> x,
                      std::span<const double> y) {
  return Binarize(Forward(params, x, y));
}

Eigen::MatrixXd FeatureRows(const Dataset& ds, std::span<const std::size_t> rows,
                            bool text_modality) {
  const std::size_t count = rows.empty() ? ds.n() : rows.size();
  const Eigen::Index dim = text_modality ? ds.d_x : ds.d_y;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), dim);
  for (std::size_t r = 0; r < count; ++r) {
    const Instance& inst = ds.instances[rows.empty() ? r : rows[r]];
    const std::vector<float>& f = text_modality ? inst.x : inst.y;
    for (Eigen::Index d = 0; d < dim; ++d) {
      out(static_cast<Eigen::Index>(r), d) = f[static_cast<std::size_t>(d)];
    }
  }
  return out;
}

Eigen::MatrixXd RelaxedCodes(const ModelParams& params, const Dataset& ds) {
  return ForwardBatch(params, FeatureRows(ds, {}, true),
                      FeatureRows(ds, {}, false));
}

std::vector<BinaryCode> HashDataset(const ModelParams& params, const Dataset& ds) {
  const Eigen::MatrixXd codes = RelaxedCodes(params, ds);
  std::vector<BinaryCode> out;
  out.reserve(ds.n());
  for (Eigen::Index i = 0; i < codes.rows(); ++i) {
    out.push_back(Binarize(codes.row(i).transpose()));
  }
  return out;
}

BackwardResult Backward(const ModelParams& params, const TrainBatch& batch,
                        const LossSpec& spec) {
  if (batch.x.rows() == 0) throw std::invalid_argument("empty batch");
  spec.Validate();
  const BatchActivations main = ForwardCached(params, batch.x, batch.y);
  BatchActivations aug;
  if (batch.x_aug.rows() > 0) aug = ForwardCached(params, batch.x_aug, batch.y_aug);

  CodeBatch codes;
  codes.codes = main.codes;
  codes.labels = batch.labels;
  codes.roles = batch.roles;
  codes.aug_codes = batch.x_aug.rows() > 0
                        ? aug.codes
                        : Eigen::MatrixXd(0, params.wh.cols());

  LossGradients lg;
  BackwardResult out;
  out.loss = TotalLoss(codes, params.centers, spec, &lg);
  if (!std::isfinite(out.loss.total)) {
    throw NumericError("non-finite loss in backward pass");
  }
  out.grads = GradientSet{NetworkTensors::Zeros(params.Shape())};
  BackpropInto(params, main, batch.x, batch.y, lg.codes, out.grads);
  if (batch.x_aug.rows() > 0) {
    BackpropInto(params, aug, batch.x_aug, batch.y_aug, lg.aug_codes, out.grads);
  }
  out.grads.centers = lg.centers;
  return out;
}

ModelParams SgdStep(ModelParams params, const GradientSet& grads, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("learning rate must be finite and >= 0");
  }
  if (!(grads.Shape() == params.Shape())) {
    throw std::invalid_argument("gradient shapes do not match parameters");
  }
  bool finite = true;
  ForEachTensor(grads, [&](const auto& g) { finite = finite && g.allFinite(); });
  if (!finite) throw NumericError("non-finite gradient; training aborted");

  params.w1x -= lr * grads.w1x;
  params.b1x -= lr * grads.b1x;
  params.w2x -= lr * grads.w2x;
  params.b2x -= lr * grads.b2x;
  params.w1y -= lr * grads.w1y;
  params.b1y -= lr * grads.b1y;
  params.w2y -= lr * grads.w2y;
  params.b2y -= lr * grads.b2y;
  params.wh -= lr * grads.wh;
  params.bh -= lr * grads.bh;
  params.centers -= lr * grads.centers;
  params.centers = params.centers.cwiseMax(-1.0).cwiseMin(1.0);
  return params;
}

std::vector<std::uint8_t> EncodeCheckpoint(const ModelParams& params) {
  const ModelShape s = params.Shape();
  ByteWriter w;
  w.PutMagic(kCheckpointMagic);
  w.PutU32(kVersion);
  for (std::uint32_t d : {s.d_x, s.d_y, s.hidden, s.fusion, s.bits, s.categories}) {
    w.PutU32(d);
  }
  ForEachTensor(params, [&](const auto& t) {
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        w.PutF32(static_cast<float>(t(r, c)));
      }
    }
  });
  return w.Release();
}

ModelParams DecodeCheckpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.ExpectMagic(kCheckpointMagic);
  r.ExpectVersion(kVersion);
  const std::size_t dims_at = r.offset();
  ModelShape s;
  s.d_x = r.U32();
  s.d_y = r.U32();
  s.hidden = r.U32();
  s.fusion = r.U32();
  s.bits = r.U32();
  s.categories = r.U32();
  try {
    s.Validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what(), dims_at);
  }
  const std::uint64_t floats =
      static_cast<std::uint64_t>(s.d_x + s.d_y + 2) * s.hidden +
      2ull * s.hidden * s.fusion + 2ull * s.fusion +
      static_cast<std::uint64_t>(s.fusion + 1 + s.categories) * s.bits;
  if (floats * 4 > r.remaining()) {
    throw FormatError("truncated payload: dimensions declare " +
                          std::to_string(floats) + " parameters",
                      r.offset());
  }
  ModelParams p{NetworkTensors::Zeros(s)};
  ForEachTensor(p, [&](auto& t) {
    for (Eigen::Index row = 0; row < t.rows(); ++row) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(row, c) = r.F32();
    }
  });
  r.ExpectEnd();
  return p;
}

void SaveCheckpoint(const ModelParams& params, const std::string& path) {
  WriteFileBytes(path, EncodeCheckpoint(params));
}

ModelParams LoadCheckpoint(const std::string& path) {
  const auto bytes = ReadFileBytes(path);
  try {
    return DecodeCheckpoint(bytes);
  } catch (const FormatError& e) {
    throw e.WithContext(path);
  }
}

}  // namespace dcmh
