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

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "doctest.h"
#include "tensor/tape.h"
#include "util/error.h"
#include "util/random.h"

using namespace nmn;

namespace {

Matrix Col(std::vector<double> v) { return Matrix::Column(std::move(v)); }

// Central-difference gradient of f with respect to every entry of x0.
Matrix NumericGrad(const std::function<double(const Matrix &)> &f, Matrix x0, double h = 1e-6) {
  Matrix g(x0.rows(), x0.cols());
  for (size_t i = 0; i < x0.size(); ++i) {
    const double keep = x0[i];
    x0[i] = keep + h;
    const double up = f(x0);
    x0[i] = keep - h;
    const double down = f(x0);
    x0[i] = keep;
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// Builds loss = sum_j w_j * op(x)_j on a tape; returns value and dL/dx.
struct Probe {
  std::function<Var(Tape &, Var)> op;
  Matrix weights;

  double Value(const Matrix &x) const {
    Tape tape;
    const Var out = op(tape, tape.Input(x));
    double s = 0.0;
    const Matrix &v = tape.value(out);
    for (size_t i = 0; i < v.size(); ++i) s += weights[i] * v[i];
    return s;
  }

  Matrix Grad(const Matrix &x) const {
    Tape tape;
    const Var in = tape.Input(x);
    const Var out = op(tape, in);
    const Var loss = tape.Sum(tape.Hadamard(out, tape.Constant(weights)));
    tape.Backward(loss, nullptr);
    return tape.grad(in);
  }
};

void CheckProbe(const Probe &p, const Matrix &x) {
  const Matrix analytic = p.Grad(x);
  const Matrix numeric = NumericGrad([&](const Matrix &m) { return p.Value(m); }, x);
  for (size_t i = 0; i < x.size(); ++i) {
    CHECK(analytic[i] == doctest::Approx(numeric[i]).epsilon(1e-6));
  }
}

}  // namespace

TEST_CASE("softmax of zeros is uniform") {
  Tape tape;
  const Matrix &v = tape.value(tape.Softmax(tape.Constant(Col({0, 0, 0, 0}))));
  for (size_t i = 0; i < 4; ++i) CHECK(v[i] == 0.25);
}

TEST_CASE("softmax stays finite and normalized for extreme logits") {
  Tape tape;
  const Matrix &v = tape.value(tape.Softmax(tape.Constant(Col({1000, -1000, 999}))));
  CHECK(v.AllFinite());
  CHECK(v[0] + v[1] + v[2] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v[0] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
}

TEST_CASE("softmax of an empty vector is rejected") {
  Tape tape;
  CHECK_THROWS_AS(tape.Softmax(tape.Constant(Matrix(0, 1))), Error);
}

TEST_CASE("sigmoid is symmetric and saturates without overflow") {
  Tape tape;
  const Matrix &v = tape.value(tape.Sigmoid(tape.Constant(Col({-800, 0, 800, 2}))));
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 0.5);
  CHECK(v[2] == 1.0);
  CHECK(v[3] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-15));
}

TEST_CASE("reductions and elementwise primitives") {
  Tape tape;
  const Var a = tape.Constant(Col({0.2, -0.5, 0.9}));
  const Var b = tape.Constant(Col({0.4, -0.7, 0.1}));
  CHECK(tape.scalar(tape.MaxVal(a)) == 0.9);
  CHECK(tape.scalar(tape.MinVal(a)) == -0.5);
  CHECK(tape.scalar(tape.MeanVal(a)) == doctest::Approx(0.2));
  const Matrix &m = tape.value(tape.ElemMin(a, b));
  CHECK(m[0] == 0.2);
  CHECK(m[1] == -0.7);
  CHECK(m[2] == 0.1);
  const Matrix &r = tape.value(tape.Relu(a));
  CHECK(r[1] == 0.0);
  const Matrix &h = tape.value(tape.Hadamard(a, b));
  CHECK(h[1] == doctest::Approx(0.35));
  const Var parts[] = {a, b};
  CHECK(tape.value(tape.Concat(parts)).size() == 6);
}

TEST_CASE("shape mismatches are errors") {
  Tape tape;
  const Var a = tape.Constant(Col({1, 2}));
  const Var b = tape.Constant(Col({1, 2, 3}));
  CHECK_THROWS_AS(tape.Hadamard(a, b), Error);
  CHECK_THROWS_AS(tape.MatMul(a, b), Error);
  try {
    tape.Add(a, b);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kShape);
  }
}

TEST_CASE("normalize divides by the sum and rejects non-positive sums") {
  Tape tape;
  const Matrix &v = tape.value(tape.Normalize(tape.Constant(Col({1, 3}))));
  CHECK(v[0] == 0.25);
  CHECK(v[1] == 0.75);
  try {
    tape.Normalize(tape.Constant(Col({0, 0})));
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kNumerical);
  }
}

TEST_CASE("losses match their closed forms") {
  Tape tape;
  const Var p = tape.Constant(Col({0.2, 0.5, 0.3}));
  const double ce = tape.scalar(tape.CrossEntropy(p, Col({0.5, 0.5, 0}), 0.0));
  CHECK(ce == doctest::Approx(-(0.5 * std::log(0.2) + 0.5 * std::log(0.5))));
  const Var b = tape.Constant(Col({0.8}));
  CHECK(tape.scalar(tape.BinaryCrossEntropy(b, 1.0, 0.0)) == doctest::Approx(-std::log(0.8)));
  CHECK(tape.scalar(tape.BinaryCrossEntropy(b, 0.0, 0.0)) == doctest::Approx(-std::log(0.2)));
  // eps keeps log(0) finite.
  const Var zero = tape.Constant(Col({0.0, 1.0}));
  CHECK(std::isfinite(tape.scalar(tape.CrossEntropy(zero, Col({1, 0}), 1e-12))));
}

TEST_CASE("primitive gradients agree with central differences") {
  Rng rng(7);
  auto random_col = [&](size_t n, double lo, double hi) {
    Matrix m(n, 1);
    for (double &v : m.values()) v = rng.Uniform(lo, hi);
    return m;
  };
  const Matrix w = random_col(5, -1, 1);
  const Matrix other = random_col(5, -1, 1);
  const std::vector<std::function<Var(Tape &, Var)>> ops = {
      [](Tape &t, Var x) { return t.Softmax(x); },
      [](Tape &t, Var x) { return t.Sigmoid(x); },
      [](Tape &t, Var x) { return t.Relu(x); },
      [](Tape &t, Var x) { return t.Normalize(t.Sigmoid(x)); },
      [](Tape &t, Var x) { return t.OneMinus(t.Scale(x, 3.0)); },
      [&](Tape &t, Var x) { return t.Hadamard(x, t.Constant(other)); },
      [&](Tape &t, Var x) { return t.ElemMin(x, t.Constant(other)); },
      [&](Tape &t, Var x) { return t.Sub(t.Add(x, x), t.Constant(other)); },
  };
  for (const auto &op : ops) {
    Probe p{op, w};
    // Keep away from relu and min kinks.
    CheckProbe(p, random_col(5, 0.05, 0.9));
  }
  // Scalar-valued reductions.
  const std::vector<std::function<Var(Tape &, Var)>> reductions = {
      [](Tape &t, Var x) { return t.MaxVal(x); },
      [](Tape &t, Var x) { return t.MinVal(x); },
      [](Tape &t, Var x) { return t.MeanVal(x); },
      [](Tape &t, Var x) { return t.Sum(x); },
      [](Tape &t, Var x) { return t.CrossEntropy(t.Softmax(x), Col({0.25, 0.25, 0, 0.5, 0}), 1e-12); },
      [](Tape &t, Var x) { return t.BinaryCrossEntropy(t.MeanVal(t.Sigmoid(x)), 0.3, 1e-12); },
  };
  for (const auto &op : reductions) {
    Probe p{op, Col({1.0})};
    CheckProbe(p, Col({0.1, 0.7, 0.4, 0.95, 0.2}));
  }
}

TEST_CASE("matmul, transpose, add-column and place gradients") {
  Rng rng(11);
  Matrix A(3, 4);
  for (double &v : A.values()) v = rng.Normal();
  Matrix bias(3, 1);
  for (double &v : bias.values()) v = rng.Normal();
  Matrix c(3, 1);
  for (double &v : c.values()) v = rng.Normal();
  Probe vec{[&](Tape &t, Var x) {
              Var y = t.AddColumn(t.MatMul(t.Constant(A), x), t.Constant(bias));
              Var s = t.MatMul(t.Transpose(y), y);
              return t.Add(t.Place(s, 2, 1), t.Place(t.MeanVal(y), 2, 0));
            },
            Col({0.3, -1.2})};
  Matrix x(4, 1);
  for (double &v : x.values()) v = rng.Normal();
  CheckProbe(vec, x);
  // Matrix input: the bias is added to every column.
  Probe mat{[&](Tape &t, Var X) {
              Var Y = t.AddColumn(t.MatMul(t.Constant(A), X), t.Constant(bias));
              return t.MatMul(t.Transpose(t.Sigmoid(Y)), t.Constant(c));
            },
            Col({0.7, -0.4})};
  Matrix X(4, 2);
  for (double &v : X.values()) v = rng.Normal();
  CheckProbe(mat, X);
}

TEST_CASE("parameter gradients accumulate into the buffer with scale") {
  const Matrix w = Col({0.5, -0.25});
  Tape tape;
  const Var p = tape.Parameter(0, w);
  const Var loss = tape.Sum(tape.Hadamard(p, p));
  Gradients grads({&w});
  tape.Backward(loss, &grads, 0.5);
  CHECK(grads[0][0] == doctest::Approx(0.5));
  CHECK(grads[0][1] == doctest::Approx(-0.25));
  CHECK_THROWS_AS(tape.Backward(loss, &grads), Error);
}

TEST_CASE("gradient requested before backward is a state error") {
  Tape tape;
  const Var a = tape.Input(Col({1.0}));
  try {
    tape.grad(a);
    FAIL("expected an error");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kState);
  }
}
