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
#include <string>
#include <vector>

#include "doctest.h"
#include "executor/executor.h"
#include "support/formula_oracle.h"
#include "util/error.h"
#include "util/random.h"

using namespace nmn;
using namespace nmn::testing;
using K = ModuleKind;

namespace {

const Dims kDims{6, 4, 7};

struct Fixture {
  ParameterRegistry reg;
  SceneExample ex;
};

std::vector<double> RandomVec(size_t n, Rng &rng) {
  std::vector<double> v(n);
  for (double &x : v) x = rng.Normal();
  return v;
}

Fixture MakeFixture(uint64_t seed) {
  Fixture f;
  f.reg = ParameterRegistry::Create(kDims, seed);
  Rng rng(seed);
  for (size_t id = 0; id < f.reg.num_params(); ++id) {
    for (double &v : f.reg.mutable_param(id).values()) v += 0.2 * rng.Normal();
  }
  f.ex.program = ParseProgram(
      "select[cat] -> a0 ; filter_attr[red](a0) -> a1 ; exist(a1) -> b0 ; answer_logic(b0)");
  f.ex.features = Matrix(kDims.features, kDims.objects);
  for (double &v : f.ex.features.values()) v = rng.Normal();
  f.ex.embeddings["cat"] = RandomVec(kDims.features, rng);
  f.ex.embeddings["red"] = RandomVec(kDims.features, rng);
  f.ex.gold = kNoIndex;
  f.ex.targets[0] = StepTarget{ValueType::kAttention, {1, 0, 1, 0}};
  f.ex.targets[1] = StepTarget{ValueType::kAttention, {0, 0, 1, 0}};
  f.ex.targets[2] = StepTarget{ValueType::kBoolean, {1.0}};
  return f;
}

struct Expected {
  double answer, select, filter, exist;
};

// Chains the scalar-loop oracle through the program and applies the loss
// formulas by hand.
Expected HandLosses(const Fixture &f, double eps) {
  const auto &E = f.ex.embeddings;
  const Vec a0 = ModuleOracle(f.reg, K::kSelect, f.ex.features, E.at("cat"), {});
  const Vec a1 = ModuleOracle(f.reg, K::kFilterAttr, f.ex.features, E.at("red"), {a0});
  const Vec b0 = ModuleOracle(f.reg, K::kExist, f.ex.features, {}, {a1});
  const Vec ans = ModuleOracle(f.reg, K::kAnswerLogic, f.ex.features, {}, {b0});
  auto ce_norm = [&](const Vec &out, const Vec &target) {
    double so = 0.0, st = 0.0;
    for (double v : out) so += v;
    for (double v : target) st += v;
    double loss = 0.0;
    for (size_t j = 0; j < out.size(); ++j) {
      if (target[j] != 0.0) loss -= target[j] / st * std::log(out[j] / so + eps);
    }
    return loss;
  };
  Expected e;
  e.answer = -std::log(ans[kNoIndex] + eps);
  e.select = ce_norm(a0, {1, 0, 1, 0});
  e.filter = ce_norm(a1, {0, 0, 1, 0});
  e.exist = -std::log(b0[0] + eps);
  return e;
}

ErrorCode CodeOf(const std::function<void()> &fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("losses match hand formulas for mean and sum reductions") {
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    const Fixture f = MakeFixture(seed);
    const Expected e = HandLosses(f, kLogFloor);
    LossOptions mean;
    const ExampleLoss m = RunExample(f.reg, f.ex, mean, nullptr);
    CHECK(m.answer == doctest::Approx(e.answer).epsilon(1e-12));
    CHECK(m.total ==
          doctest::Approx(e.answer + (e.select + e.filter + e.exist) / 3.0).epsilon(1e-12));
    REQUIRE(m.per_module.size() == 4);
    CHECK(m.per_module[0].first == K::kSelect);
    CHECK(m.per_module[0].second == doctest::Approx(e.select).epsilon(1e-12));
    CHECK(m.per_module[1].second == doctest::Approx(e.filter).epsilon(1e-12));
    CHECK(m.per_module[2].second == doctest::Approx(e.exist).epsilon(1e-12));
    CHECK(m.per_module[3].first == K::kAnswerLogic);

    LossOptions sum;
    sum.average_intermediate = false;
    sum.intermediate_weight = 0.5;
    const ExampleLoss s = RunExample(f.reg, f.ex, sum, nullptr);
    CHECK(s.total == doctest::Approx(e.answer + 0.5 * (e.select + e.filter + e.exist)).epsilon(1e-12));

    LossOptions answer_only;
    answer_only.intermediate_weight = 0.0;
    CHECK(RunExample(f.reg, f.ex, answer_only, nullptr).total == m.answer);
  }
}

TEST_CASE("predicted answer is the argmax of the answer distribution") {
  const Fixture f = MakeFixture(3);
  const ExecutionTrace trace = TraceExample(f.reg, f.ex, LossOptions{});
  REQUIRE(trace.steps.size() == 4);
  CHECK(RunExample(f.reg, f.ex, LossOptions{}, nullptr).predicted == Argmax(trace.answer));
  CHECK(trace.steps[2].type == ValueType::kBoolean);
  CHECK(trace.steps[0].loss.has_value());
  CHECK(trace.steps[3].loss == trace.answer_loss);
  const std::vector<double> ties{0.2, 0.5, 0.5};
  CHECK(Argmax(ties) == 1);
}

TEST_CASE("example gradients agree with central differences") {
  Fixture f = MakeFixture(11);
  Gradients grads = f.reg.NewGradients();
  RunExample(f.reg, f.ex, LossOptions{}, &grads, 1.0);
  Rng rng(11);
  const double h = 1e-6;
  int probes = 0;
  for (size_t id = 0; id < f.reg.num_params(); ++id) {
    Matrix &w = f.reg.mutable_param(id);
    double gnorm = 0.0;
    for (double g : grads[id].values()) gnorm += g * g;
    if (gnorm == 0.0) continue;  // layer not used by this program
    for (int trial = 0; trial < 3; ++trial) {
      const size_t i = rng.Below(w.size());
      const double keep = w[i];
      w[i] = keep + h;
      const double up = RunExample(f.reg, f.ex, LossOptions{}, nullptr).total;
      w[i] = keep - h;
      const double down = RunExample(f.reg, f.ex, LossOptions{}, nullptr).total;
      w[i] = keep;
      const double numeric = (up - down) / (2 * h);
      CHECK(std::abs(grads[id][i] - numeric) <= 1e-6 * std::max(1.0, std::abs(numeric)));
      ++probes;
    }
  }
  CHECK(probes >= 12);
}

TEST_CASE("multi-word candidates are averaged into one embedding") {
  Fixture f = MakeFixture(5);
  f.ex.program = ParseProgram("select[cat] -> a0 ; choose_attr[red,blue](a0)");
  f.ex.embeddings["blue"] = std::vector<double>(kDims.features, 0.25);
  f.ex.targets.clear();
  f.ex.gold = 3;
  Vec mean(kDims.features);
  for (size_t i = 0; i < kDims.features; ++i) {
    mean[i] = 0.5 * (f.ex.embeddings["red"][i] + f.ex.embeddings["blue"][i]);
  }
  const Vec a0 = ModuleOracle(f.reg, K::kSelect, f.ex.features, f.ex.embeddings["cat"], {});
  const Vec ans = ModuleOracle(f.reg, K::kChooseAttr, f.ex.features, mean, {a0});
  CHECK(RunExample(f.reg, f.ex, LossOptions{}, nullptr).answer ==
        doctest::Approx(-std::log(ans[3] + kLogFloor)).epsilon(1e-12));
}

TEST_CASE("an all-zero attention output is scored without renormalizing") {
  Fixture f = MakeFixture(6);
  f.ex.program = ParseProgram(
      "select[cat] -> a0 ; filter_not[red](a0) -> a1 ; fusion(a0,a1) -> a2 ; exist(a2) -> b0 ; "
      "answer_logic(b0)");
  // Select and the filter_not detector both saturate on slot 0, so filter_not
  // and the fusion are exactly zero.
  Matrix &w = f.reg.mutable_param(f.reg.LayerFor(K::kSelect, LayerRole::kOutput)->bias);
  w.Fill(0.0);
  w[0] = 800.0;
  f.reg.mutable_param(f.reg.LayerFor(K::kFilterNot, LayerRole::kOutput)->bias).Fill(0.0);
  f.reg.mutable_param(f.reg.LayerFor(K::kFilterNot, LayerRole::kOutput)->bias)[0] = 800.0;
  f.ex.targets.clear();
  f.ex.targets[2] = StepTarget{ValueType::kAttention, {1, 0, 0, 0}};
  const ExecutionTrace trace = TraceExample(f.reg, f.ex, LossOptions{});
  for (double v : trace.steps[2].value) CHECK(v == 0.0);
  CHECK(*trace.steps[2].loss == doctest::Approx(-std::log(kLogFloor)).epsilon(1e-9));
}

TEST_CASE("execution errors are typed") {
  Fixture f = MakeFixture(7);
  SceneExample missing = f.ex;
  missing.embeddings.erase("red");
  CHECK(CodeOf([&] { RunExample(f.reg, missing, LossOptions{}, nullptr); }) == ErrorCode::kData);

  SceneExample short_embedding = f.ex;
  short_embedding.embeddings["red"].pop_back();
  CHECK(CodeOf([&] { RunExample(f.reg, short_embedding, LossOptions{}, nullptr); }) ==
        ErrorCode::kShape);

  SceneExample wrong_scene = f.ex;
  wrong_scene.features = Matrix(kDims.features, kDims.objects + 1);
  CHECK(CodeOf([&] { RunExample(f.reg, wrong_scene, LossOptions{}, nullptr); }) ==
        ErrorCode::kShape);

  SceneExample answer_target = f.ex;
  answer_target.targets[3] = StepTarget{ValueType::kAttention, {1, 0, 0, 0}};
  CHECK(CodeOf([&] { RunExample(f.reg, answer_target, LossOptions{}, nullptr); }) ==
        ErrorCode::kData);

  SceneExample wrong_type = f.ex;
  wrong_type.targets[2] = StepTarget{ValueType::kAttention, {1, 0, 0, 0}};
  CHECK(CodeOf([&] { RunExample(f.reg, wrong_type, LossOptions{}, nullptr); }) ==
        ErrorCode::kData);

  SceneExample empty_target = f.ex;
  empty_target.targets[0] = StepTarget{ValueType::kAttention, {0, 0, 0, 0}};
  CHECK(CodeOf([&] { RunExample(f.reg, empty_target, LossOptions{}, nullptr); }) ==
        ErrorCode::kData);

  SceneExample bad_gold = f.ex;
  bad_gold.gold = kDims.answers;
  CHECK(CodeOf([&] { RunExample(f.reg, bad_gold, LossOptions{}, nullptr); }) == ErrorCode::kData);
}
