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

// The two-modality hashing network: per-modality two-layer MLPs, additive
// fusion, a tanh hash head and the learnable category centers, together with
// hand-derived gradients and plain SGD.
//
// Rows are instances throughout: a batch of z instances is a z x d matrix.

#ifndef DCMH_MODEL_H_
#define DCMH_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcmh/dataset.h"
#include "dcmh/losses.h"

namespace dcmh {

struct ModelShape {
  std::uint32_t d_x = 0;
  std::uint32_t d_y = 0;
  std::uint32_t hidden = 256;
  std::uint32_t fusion = 128;
  std::uint32_t bits = 32;
  std::uint32_t categories = 0;

  void Validate() const;
  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

// Storage shared by parameters and their gradients, in checkpoint order.
struct NetworkTensors {
  Eigen::MatrixXd w1x;  // d_x x hidden
  Eigen::VectorXd b1x;
  Eigen::MatrixXd w2x;  // hidden x fusion
  Eigen::VectorXd b2x;
  Eigen::MatrixXd w1y;  // d_y x hidden
  Eigen::VectorXd b1y;
  Eigen::MatrixXd w2y;  // hidden x fusion
  Eigen::VectorXd b2y;
  Eigen::MatrixXd wh;   // fusion x bits
  Eigen::VectorXd bh;
  Eigen::MatrixXd centers;  // categories x bits

  // All-zero tensors of the given shape.
  static NetworkTensors Zeros(const ModelShape& shape);
  ModelShape Shape() const;
};

// Calls fn(tensor) for each tensor in declaration (checkpoint) order.
template <typename Tensors, typename Fn>
void ForEachTensor(Tensors& t, Fn&& fn) {
  fn(t.w1x);
  fn(t.b1x);
  fn(t.w2x);
  fn(t.b2x);
  fn(t.w1y);
  fn(t.b1y);
  fn(t.w2y);
  fn(t.b2y);
  fn(t.wh);
  fn(t.bh);
  fn(t.centers);
}

struct ModelParams : NetworkTensors {};
struct GradientSet : NetworkTensors {};

// Weights and biases uniform in +-1/sqrt(fan_in), centers uniform in [-1, 1].
ModelParams InitParams(const ModelShape& shape, std::uint64_t seed);

using RealCode = Eigen::VectorXd;
using BinaryCode = std::vector<std::int8_t>;

// Relaxed code of one instance. Throws std::invalid_argument on a dimension
// mismatch or non-finite input.
RealCode Forward(const ModelParams& params, std::span<const double> x,
                 std::span<const double> y);

// Row-wise Forward; row i is bit-identical to Forward on that row alone.
Eigen::MatrixXd ForwardBatch(const ModelParams& params, const Eigen::MatrixXd& x,
                             const Eigen::MatrixXd& y);

// Entrywise sgn with sgn(0) = +1.
BinaryCode Binarize(const Eigen::Ref<const Eigen::VectorXd>& code);

// Binarize(Forward(...)); labels are never consulted.
BinaryCode HashUnseen(const ModelParams& params, std::span<const double> x,
                      std::span<const double> y);

// Binary codes for every instance of `ds`.
std::vector<BinaryCode> HashDataset(const ModelParams& params, const Dataset& ds);
// Relaxed codes for every instance of `ds`, one row each.
Eigen::MatrixXd RelaxedCodes(const ModelParams& params, const Dataset& ds);

// Feature matrices for the given rows of `ds` (all rows when empty).
Eigen::MatrixXd FeatureRows(const Dataset& ds, std::span<const std::size_t> rows,
                            bool text_modality);

// Inputs of one optimization step. `x_aug`/`y_aug` hold the augmented
// features of the unlabeled rows, in row order.
struct TrainBatch {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  std::vector<Label> labels;
  std::vector<Role> roles;
  Eigen::MatrixXd x_aug;
  Eigen::MatrixXd y_aug;
};

struct BackwardResult {
  LossBreakdown loss;
  GradientSet grads;
};

// Total objective and its gradient with respect to every parameter,
// centers included. Throws std::invalid_argument on an empty batch.
BackwardResult Backward(const ModelParams& params, const TrainBatch& batch,
                        const LossSpec& spec);

// p <- p - lr * g, then centers clamped to [-1, 1]. Throws NumericError on a
// non-finite gradient.
ModelParams SgdStep(ModelParams params, const GradientSet& grads, double lr);

std::vector<std::uint8_t> EncodeCheckpoint(const ModelParams& params);
ModelParams DecodeCheckpoint(std::span<const std::uint8_t> bytes);
void SaveCheckpoint(const ModelParams& params, const std::string& path);
ModelParams LoadCheckpoint(const std::string& path);

}  // namespace dcmh

#endif  // DCMH_MODEL_H_
