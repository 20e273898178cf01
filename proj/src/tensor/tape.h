// Copyright 2026 The NMN-CL Authors.
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

#ifndef NMN_TENSOR_TAPE_H_
#define NMN_TENSOR_TAPE_H_

#include <cstdint>
#include <span>
#include <vector>

#include "tensor/matrix.h"

namespace nmn {

// Dense gradient buffers, one per registered parameter.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const std::vector<const Matrix *> &shapes);

  size_t size() const { return grads_.size(); }
  Matrix &operator[](size_t id) { return grads_[id]; }
  const Matrix &operator[](size_t id) const { return grads_[id]; }

  void Zero();
  // this += other (identical layout required).
  void Accumulate(const Gradients &other);
  void Scale(double factor);
  double SquaredNorm() const;

 private:
  std::vector<Matrix> grads_;
};

// Handle to a node on a tape.
struct Var {
  int32_t index = -1;
  bool valid() const { return index >= 0; }
};

// Records primitive applications in evaluation order and replays them in
// reverse to accumulate gradients. A tape is single-use per forward pass and
// not thread-safe; give each concurrent example its own tape.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  // Leaves.
  Var Constant(Matrix value);
  Var Input(Matrix value);
  // Parameter leaves reference external storage, which must outlive the tape.
  Var Parameter(size_t id, const Matrix &value);

  // Linear algebra.
  Var MatMul(Var a, Var b);
  Var Transpose(Var a);
  // Adds column vector bias to every column of m.
  Var AddColumn(Var m, Var bias);
  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Scale(Var a, double factor);
  Var OneMinus(Var a);

  // Elementwise.
  Var Relu(Var a);
  Var Sigmoid(Var a);
  Var Hadamard(Var a, Var b);
  Var ElemMin(Var a, Var b);

  // Column-vector ops.
  Var Softmax(Var a);
  // a / sum(a); the sum must be positive.
  Var Normalize(Var a);
  Var Concat(std::span<const Var> parts);
  Var MaxVal(Var a);
  Var MinVal(Var a);
  Var MeanVal(Var a);
  Var Sum(Var a);
  // n x 1 vector that is zero except entry index holding the scalar s.
  Var Place(Var scalar, size_t n, size_t index);

  // Losses (1 x 1 outputs).
  // -sum_j target_j * log(p_j + eps)
  Var CrossEntropy(Var probs, const Matrix &target, double eps);
  // -(t log(p + eps) + (1 - t) log(1 - p + eps))
  Var BinaryCrossEntropy(Var prob, double target, double eps);

  const Matrix &value(Var v) const;
  double scalar(Var v) const;
  size_t size() const { return nodes_.size(); }

  // Seeds d(loss) = scale and propagates to every node. Parameter gradients
  // are added into *into (may be null). Can be called once per forward.
  void Backward(Var loss, Gradients *into, double scale = 1.0);
  // Gradient of the last Backward's loss with respect to node v.
  const Matrix &grad(Var v) const;

 private:
  enum class Op : uint8_t {
    kConstant,
    kInput,
    kParameter,
    kMatMul,
    kTranspose,
    kAddColumn,
    kAdd,
    kSub,
    kScale,
    kOneMinus,
    kRelu,
    kSigmoid,
    kHadamard,
    kElemMin,
    kSoftmax,
    kNormalize,
    kConcat,
    kMaxVal,
    kMinVal,
    kMeanVal,
    kSum,
    kPlace,
    kCrossEntropy,
    kBinaryCrossEntropy,
  };

  struct Node {
    Op op;
    int32_t a = -1;
    int32_t b = -1;
    Matrix value{};
    const Matrix *external = nullptr;
    size_t param_id = 0;
    size_t index = 0;
    double number = 0.0;
    double eps = 0.0;
    std::vector<int32_t> parts{};
    Matrix aux{};
  };

  Var Push(Node node);
  const Matrix &Value(int32_t i) const;
  void Check(Var v, const char *op) const;
  void RequireVector(Var v, const char *op) const;
  void RequireSameShape(Var a, Var b, const char *op) const;

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
  bool backward_done_ = false;
};

}  // namespace nmn

#endif  // NMN_TENSOR_TAPE_H_
