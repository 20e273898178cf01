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

#include "tensor/tape.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "util/error.h"

namespace nmn {

namespace {

double StableSigmoid(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

}  // namespace

Gradients::Gradients(const std::vector<const Matrix *> &shapes) {
  grads_.reserve(shapes.size());
  for (const Matrix *m : shapes) grads_.emplace_back(m->rows(), m->cols());
}

void Gradients::Zero() {
  for (Matrix &g : grads_) g.Fill(0.0);
}

void Gradients::Accumulate(const Gradients &other) {
  if (other.grads_.size() != grads_.size()) {
    Fail(ErrorCode::kShape, "gradient layouts differ");
  }
  for (size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].values();
    auto src = other.grads_[i].values();
    for (size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
}

void Gradients::Scale(double factor) {
  for (Matrix &g : grads_) {
    for (double &v : g.values()) v *= factor;
  }
}

double Gradients::SquaredNorm() const {
  double total = 0.0;
  for (const Matrix &g : grads_) {
    for (double v : g.values()) total += v * v;
  }
  return total;
}

Var Tape::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

const Matrix &Tape::Value(int32_t i) const {
  const Node &n = nodes_[i];
  return n.external ? *n.external : n.value;
}

const Matrix &Tape::value(Var v) const {
  Check(v, "value");
  return Value(v.index);
}

double Tape::scalar(Var v) const {
  const Matrix &m = value(v);
  if (m.size() != 1) {
    Fail(ErrorCode::kShape, "expected a scalar node, got " + m.ShapeString());
  }
  return m[0];
}

void Tape::Check(Var v, const char *op) const {
  if (!v.valid() || static_cast<size_t>(v.index) >= nodes_.size()) {
    Fail(ErrorCode::kState, std::string(op) + ": invalid tape variable");
  }
}

void Tape::RequireVector(Var v, const char *op) const {
  Check(v, op);
  const Matrix &m = Value(v.index);
  if (m.cols() != 1) {
    Fail(ErrorCode::kShape,
         std::string(op) + " expects a column vector, got " + m.ShapeString());
  }
  if (m.empty()) Fail(ErrorCode::kShape, std::string(op) + " of empty vector");
}

void Tape::RequireSameShape(Var a, Var b, const char *op) const {
  Check(a, op);
  Check(b, op);
  const Matrix &x = Value(a.index);
  const Matrix &y = Value(b.index);
  if (!x.SameShape(y)) {
    Fail(ErrorCode::kShape, std::string(op) + ": shape mismatch " +
                                x.ShapeString() + " vs " + y.ShapeString());
  }
}

Var Tape::Constant(Matrix value) {
  Node n{Op::kConstant};
  n.value = std::move(value);
  return Push(std::move(n));
}

Var Tape::Input(Matrix value) {
  Node n{Op::kInput};
  n.value = std::move(value);
  return Push(std::move(n));
}

Var Tape::Parameter(size_t id, const Matrix &value) {
  Node n{Op::kParameter};
  n.external = &value;
  n.param_id = id;
  return Push(std::move(n));
}

Var Tape::MatMul(Var a, Var b) {
  Check(a, "matmul");
  Check(b, "matmul");
  const Matrix &x = Value(a.index);
  const Matrix &y = Value(b.index);
  if (x.cols() != y.rows()) {
    Fail(ErrorCode::kShape, "matmul: dimension mismatch " + x.ShapeString() +
                                " * " + y.ShapeString());
  }
  Matrix out(x.rows(), y.cols());
  const size_t inner = x.cols();
  const size_t m = y.cols();
  for (size_t i = 0; i < x.rows(); ++i) {
    double *row = &out(i, 0);
    for (size_t p = 0; p < inner; ++p) {
      const double xv = x(i, p);
      if (xv == 0.0) continue;
      const double *yrow = y.data().data() + p * m;
      for (size_t j = 0; j < m; ++j) row[j] += xv * yrow[j];
    }
  }
  Node n{Op::kMatMul, a.index, b.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Transpose(Var a) {
  Check(a, "transpose");
  const Matrix &x = Value(a.index);
  Matrix out(x.cols(), x.rows());
  for (size_t i = 0; i < x.rows(); ++i) {
    for (size_t j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
  }
  Node n{Op::kTranspose, a.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::AddColumn(Var m, Var bias) {
  Check(m, "add_column");
  RequireVector(bias, "add_column");
  const Matrix &x = Value(m.index);
  const Matrix &b = Value(bias.index);
  if (b.rows() != x.rows()) {
    Fail(ErrorCode::kShape, "add_column: bias " + b.ShapeString() +
                                " does not match " + x.ShapeString());
  }
  Matrix out = x;
  for (size_t i = 0; i < x.rows(); ++i) {
    for (size_t j = 0; j < x.cols(); ++j) out(i, j) += b[i];
  }
  Node n{Op::kAddColumn, m.index, bias.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Add(Var a, Var b) {
  RequireSameShape(a, b, "add");
  Matrix out = Value(a.index);
  const Matrix &y = Value(b.index);
  for (size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  Node n{Op::kAdd, a.index, b.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Sub(Var a, Var b) {
  RequireSameShape(a, b, "sub");
  Matrix out = Value(a.index);
  const Matrix &y = Value(b.index);
  for (size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  Node n{Op::kSub, a.index, b.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Scale(Var a, double factor) {
  Check(a, "scale");
  Matrix out = Value(a.index);
  for (double &v : out.values()) v *= factor;
  Node n{Op::kScale, a.index};
  n.number = factor;
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::OneMinus(Var a) {
  Check(a, "one_minus");
  Matrix out = Value(a.index);
  for (double &v : out.values()) v = 1.0 - v;
  Node n{Op::kOneMinus, a.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Relu(Var a) {
  Check(a, "relu");
  Matrix out = Value(a.index);
  for (double &v : out.values()) v = v > 0.0 ? v : 0.0;
  Node n{Op::kRelu, a.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Sigmoid(Var a) {
  Check(a, "sigmoid");
  Matrix out = Value(a.index);
  for (double &v : out.values()) v = StableSigmoid(v);
  Node n{Op::kSigmoid, a.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Hadamard(Var a, Var b) {
  RequireSameShape(a, b, "hadamard");
  Matrix out = Value(a.index);
  const Matrix &y = Value(b.index);
  for (size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  Node n{Op::kHadamard, a.index, b.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::ElemMin(Var a, Var b) {
  RequireSameShape(a, b, "elemmin");
  Matrix out = Value(a.index);
  const Matrix &y = Value(b.index);
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], y[i]);
  Node n{Op::kElemMin, a.index, b.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Softmax(Var a) {
  RequireVector(a, "softmax");
  Matrix out = Value(a.index);
  double top = out[0];
  for (double v : out.values()) top = std::max(top, v);
  double total = 0.0;
  for (double &v : out.values()) {
    v = std::exp(v - top);
    total += v;
  }
  for (double &v : out.values()) v /= total;
  Node n{Op::kSoftmax, a.index};
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::Normalize(Var a) {
  RequireVector(a, "normalize");
  Matrix out = Value(a.index);
  double total = 0.0;
  for (double v : out.values()) total += v;
  if (!(total > 0.0) || !std::isfinite(total)) {
    Fail(ErrorCode::kNumerical, "normalize: entries sum to " + std::to_string(total));
  }
  for (double &v : out.values()) v /= total;
  Node n{Op::kNormalize, a.index};
  n.value = std::move(out);
  n.number = total;
  return Push(std::move(n));
}

Var Tape::Concat(std::span<const Var> parts) {
  if (parts.empty()) Fail(ErrorCode::kShape, "concat of no parts");
  std::vector<double> values;
  Node n{Op::kConcat};
  for (Var p : parts) {
    RequireVector(p, "concat");
    const Matrix &m = Value(p.index);
    values.insert(values.end(), m.values().begin(), m.values().end());
    n.parts.push_back(p.index);
  }
  n.value = Matrix::Column(std::move(values));
  return Push(std::move(n));
}

Var Tape::MaxVal(Var a) {
  RequireVector(a, "maxval");
  const Matrix &x = Value(a.index);
  size_t best = 0;
  for (size_t i = 1; i < x.size(); ++i) {
    if (x[i] > x[best]) best = i;
  }
  Node n{Op::kMaxVal, a.index};
  n.index = best;
  n.value = Matrix(1, 1, x[best]);
  return Push(std::move(n));
}

Var Tape::MinVal(Var a) {
  RequireVector(a, "minval");
  const Matrix &x = Value(a.index);
  size_t best = 0;
  for (size_t i = 1; i < x.size(); ++i) {
    if (x[i] < x[best]) best = i;
  }
  Node n{Op::kMinVal, a.index};
  n.index = best;
  n.value = Matrix(1, 1, x[best]);
  return Push(std::move(n));
}

Var Tape::MeanVal(Var a) {
  RequireVector(a, "meanval");
  const Matrix &x = Value(a.index);
  double total = 0.0;
  for (double v : x.values()) total += v;
  Node n{Op::kMeanVal, a.index};
  n.value = Matrix(1, 1, total / static_cast<double>(x.size()));
  return Push(std::move(n));
}

Var Tape::Sum(Var a) {
  Check(a, "sum");
  double total = 0.0;
  for (double v : Value(a.index).values()) total += v;
  Node n{Op::kSum, a.index};
  n.value = Matrix(1, 1, total);
  return Push(std::move(n));
}

Var Tape::Place(Var scalar, size_t size, size_t index) {
  Check(scalar, "place");
  const Matrix &s = Value(scalar.index);
  if (s.size() != 1) {
    Fail(ErrorCode::kShape, "place expects a scalar, got " + s.ShapeString());
  }
  if (index >= size) {
    Fail(ErrorCode::kShape, "place index " + std::to_string(index) +
                                " out of range " + std::to_string(size));
  }
  Matrix out(size, 1);
  out[index] = s[0];
  Node n{Op::kPlace, scalar.index};
  n.index = index;
  n.value = std::move(out);
  return Push(std::move(n));
}

Var Tape::CrossEntropy(Var probs, const Matrix &target, double eps) {
  RequireVector(probs, "cross_entropy");
  const Matrix &p = Value(probs.index);
  if (!p.SameShape(target)) {
    Fail(ErrorCode::kShape, "cross_entropy: target " + target.ShapeString() +
                                " vs output " + p.ShapeString());
  }
  double loss = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (target[i] != 0.0) loss -= target[i] * std::log(p[i] + eps);
  }
  Node n{Op::kCrossEntropy, probs.index};
  n.aux = target;
  n.eps = eps;
  n.value = Matrix(1, 1, loss);
  return Push(std::move(n));
}

Var Tape::BinaryCrossEntropy(Var prob, double target, double eps) {
  Check(prob, "binary_cross_entropy");
  const Matrix &p = Value(prob.index);
  if (p.size() != 1) {
    Fail(ErrorCode::kShape,
         "binary_cross_entropy expects a scalar, got " + p.ShapeString());
  }
  const double loss = -(target * std::log(p[0] + eps) +
                        (1.0 - target) * std::log(1.0 - p[0] + eps));
  Node n{Op::kBinaryCrossEntropy, prob.index};
  n.number = target;
  n.eps = eps;
  n.value = Matrix(1, 1, loss);
  return Push(std::move(n));
}

const Matrix &Tape::grad(Var v) const {
  Check(v, "grad");
  if (!backward_done_) Fail(ErrorCode::kState, "grad requested before backward");
  return grads_[v.index];
}

void Tape::Backward(Var loss, Gradients *into, double scale) {
  if (nodes_.empty()) Fail(ErrorCode::kState, "backward before forward");
  Check(loss, "backward");
  const Matrix &seed = Value(loss.index);
  if (seed.size() != 1) {
    Fail(ErrorCode::kShape,
         "backward needs a scalar loss, got " + seed.ShapeString());
  }
  if (backward_done_) Fail(ErrorCode::kState, "backward called twice");
  backward_done_ = true;

  grads_.clear();
  grads_.reserve(nodes_.size());
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Matrix &v = Value(static_cast<int32_t>(i));
    grads_.emplace_back(v.rows(), v.cols());
  }
  grads_[loss.index][0] = scale;

  for (int32_t i = loss.index; i >= 0; --i) {
    const Node &n = nodes_[i];
    const Matrix &g = grads_[i];
    bool nonzero = false;
    for (double v : g.values()) {
      if (v != 0.0) {
        nonzero = true;
        break;
      }
    }
    if (!nonzero) continue;
    const Matrix &out = Value(i);

    switch (n.op) {
      case Op::kConstant:
      case Op::kInput:
        break;
      case Op::kParameter:
        if (into != nullptr) {
          Matrix &dst = (*into)[n.param_id];
          if (!dst.SameShape(g)) {
            Fail(ErrorCode::kShape, "gradient buffer shape mismatch for "
                                    "parameter " + std::to_string(n.param_id));
          }
          for (size_t j = 0; j < g.size(); ++j) dst[j] += g[j];
        }
        break;
      case Op::kMatMul: {
        const Matrix &x = Value(n.a);
        const Matrix &y = Value(n.b);
        Matrix &gx = grads_[n.a];
        Matrix &gy = grads_[n.b];
        // gx += g * y^T ; gy += x^T * g
        for (size_t r = 0; r < x.rows(); ++r) {
          for (size_t c = 0; c < y.cols(); ++c) {
            const double gv = g(r, c);
            if (gv == 0.0) continue;
            for (size_t p = 0; p < x.cols(); ++p) {
              gx(r, p) += gv * y(p, c);
              gy(p, c) += x(r, p) * gv;
            }
          }
        }
        break;
      }
      case Op::kTranspose: {
        Matrix &ga = grads_[n.a];
        for (size_t r = 0; r < g.rows(); ++r) {
          for (size_t c = 0; c < g.cols(); ++c) ga(c, r) += g(r, c);
        }
        break;
      }
      case Op::kAddColumn: {
        Matrix &gm = grads_[n.a];
        Matrix &gb = grads_[n.b];
        for (size_t r = 0; r < g.rows(); ++r) {
          for (size_t c = 0; c < g.cols(); ++c) {
            gm(r, c) += g(r, c);
            gb[r] += g(r, c);
          }
        }
        break;
      }
      case Op::kAdd: {
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) ga[j] += g[j];
        Matrix &gb = grads_[n.b];
        for (size_t j = 0; j < g.size(); ++j) gb[j] += g[j];
        break;
      }
      case Op::kSub: {
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) ga[j] += g[j];
        Matrix &gb = grads_[n.b];
        for (size_t j = 0; j < g.size(); ++j) gb[j] -= g[j];
        break;
      }
      case Op::kScale: {
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) ga[j] += n.number * g[j];
        break;
      }
      case Op::kOneMinus: {
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) ga[j] -= g[j];
        break;
      }
      case Op::kRelu: {
        const Matrix &x = Value(n.a);
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) {
          if (x[j] > 0.0) ga[j] += g[j];
        }
        break;
      }
      case Op::kSigmoid: {
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) {
          ga[j] += g[j] * out[j] * (1.0 - out[j]);
        }
        break;
      }
      case Op::kHadamard: {
        const Matrix &x = Value(n.a);
        const Matrix &y = Value(n.b);
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) ga[j] += g[j] * y[j];
        Matrix &gb = grads_[n.b];
        for (size_t j = 0; j < g.size(); ++j) gb[j] += g[j] * x[j];
        break;
      }
      case Op::kElemMin: {
        // Ties route to the first argument.
        const Matrix &x = Value(n.a);
        const Matrix &y = Value(n.b);
        Matrix &ga = grads_[n.a];
        Matrix &gb = grads_[n.b];
        for (size_t j = 0; j < g.size(); ++j) {
          if (x[j] <= y[j]) {
            ga[j] += g[j];
          } else {
            gb[j] += g[j];
          }
        }
        break;
      }
      case Op::kSoftmax: {
        double dot = 0.0;
        for (size_t j = 0; j < g.size(); ++j) dot += g[j] * out[j];
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) {
          ga[j] += out[j] * (g[j] - dot);
        }
        break;
      }
      case Op::kNormalize: {
        double dot = 0.0;
        for (size_t j = 0; j < g.size(); ++j) dot += g[j] * out[j];
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < g.size(); ++j) ga[j] += (g[j] - dot) / n.number;
        break;
      }
      case Op::kConcat: {
        size_t offset = 0;
        for (int32_t part : n.parts) {
          Matrix &gp = grads_[part];
          for (size_t j = 0; j < gp.size(); ++j) gp[j] += g[offset + j];
          offset += gp.size();
        }
        break;
      }
      case Op::kMaxVal:
      case Op::kMinVal:
        grads_[n.a][n.index] += g[0];
        break;
      case Op::kMeanVal: {
        Matrix &ga = grads_[n.a];
        const double share = g[0] / static_cast<double>(ga.size());
        for (size_t j = 0; j < ga.size(); ++j) ga[j] += share;
        break;
      }
      case Op::kSum: {
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < ga.size(); ++j) ga[j] += g[0];
        break;
      }
      case Op::kPlace:
        grads_[n.a][0] += g[n.index];
        break;
      case Op::kCrossEntropy: {
        const Matrix &p = Value(n.a);
        Matrix &ga = grads_[n.a];
        for (size_t j = 0; j < p.size(); ++j) {
          if (n.aux[j] != 0.0) ga[j] -= g[0] * n.aux[j] / (p[j] + n.eps);
        }
        break;
      }
      case Op::kBinaryCrossEntropy: {
        const double p = Value(n.a)[0];
        const double t = n.number;
        grads_[n.a][0] +=
            g[0] * (-t / (p + n.eps) + (1.0 - t) / (1.0 - p + n.eps));
        break;
      }
    }
  }
}

}  // namespace nmn
