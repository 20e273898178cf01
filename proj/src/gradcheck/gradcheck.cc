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

#include "gradcheck/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "executor/executor.h"
#include "modules/modules.h"
#include "program/program.h"
#include "util/random.h"

namespace nmn {
namespace {

Matrix RandomMatrix(size_t rows, size_t cols, Rng &rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m[i] = rng.Uniform(lo, hi);
  return m;
}

// Positive attention-like vector summing to 1.
Matrix RandomAttention(size_t k, Rng &rng) {
  Matrix m(k, 1);
  double total = 0.0;
  for (size_t i = 0; i < k; ++i) {
    m[i] = std::exp(rng.Uniform(-1.5, 1.5));
    total += m[i];
  }
  for (size_t i = 0; i < k; ++i) m[i] /= total;
  return m;
}

double Norm(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double RelativeError(const std::vector<double> &analytic, const std::vector<double> &numeric,
                     double floor) {
  std::vector<double> diff(analytic.size());
  for (size_t i = 0; i < diff.size(); ++i) diff[i] = analytic[i] - numeric[i];
  return Norm(diff) / std::max({Norm(analytic), Norm(numeric), floor});
}

// Central differences of f over every entry of m (restored afterwards).
std::vector<double> Numeric(Matrix &m, double h, const std::function<double()> &f) {
  std::vector<double> out(m.size());
  for (size_t i = 0; i < m.size(); ++i) {
    const double saved = m[i];
    m[i] = saved + h;
    const double up = f();
    m[i] = saved - h;
    const double down = f();
    m[i] = saved;
    out[i] = (up - down) / (2.0 * h);
  }
  return out;
}

std::vector<size_t> ParamsOf(const ParameterRegistry &registry, std::span<const ModuleKind> kinds) {
  std::set<size_t> ids;
  for (ModuleKind kind : kinds) {
    for (size_t r = 0; r < kNumLayerRoles; ++r) {
      if (const auto *layer = registry.LayerFor(kind, static_cast<LayerRole>(r))) {
        ids.insert(layer->weight);
        ids.insert(layer->bias);
      }
    }
  }
  return {ids.begin(), ids.end()};
}

std::vector<double> ToVector(const Matrix &m) { return {m.values().begin(), m.values().end()}; }

}  // namespace

GradCheckCase CheckModule(ModuleKind kind, uint64_t seed, const GradCheckOptions &options) {
  const Dims &dims = options.dims;
  ParameterRegistry registry = ParameterRegistry::Create(dims, seed);
  Rng rng(DeriveSeed(seed, static_cast<uint64_t>(kind) + 1));
  const ModuleInfo &info = Info(kind);

  Matrix V = RandomMatrix(dims.features, dims.objects, rng);
  Matrix t = RandomMatrix(dims.features, 1, rng);
  std::vector<Matrix> deps;
  for (ValueType type : info.deps()) {
    if (type == ValueType::kAttention) {
      deps.push_back(RandomAttention(dims.objects, rng));
    } else {
      deps.push_back(RandomMatrix(1, 1, rng, 0.1, 0.9));
    }
  }
  const size_t out_rows = info.output == ValueType::kAttention ? dims.objects
                          : info.output == ValueType::kBoolean ? 1
                                                               : dims.answers;
  const Matrix weights = RandomMatrix(out_rows, 1, rng);

  struct Vars {
    Var V, t, loss;
    std::vector<Var> deps;
  };
  auto build = [&](Tape &tape) {
    Vars vars;
    ModuleLibrary lib(registry, tape);
    vars.V = tape.Input(V);
    vars.t = tape.Input(t);
    for (const Matrix &d : deps) vars.deps.push_back(tape.Input(d));
    std::optional<Var> text;
    if (info.uses_text) text = vars.t;
    Var out = lib.Apply(kind, vars.V, text, vars.deps);
    vars.loss = tape.Sum(tape.Hadamard(out, tape.Constant(weights)));
    return vars;
  };
  auto loss = [&] {
    Tape tape;
    return tape.scalar(build(tape).loss);
  };

  GradCheckCase result;
  result.name = std::string(info.name);
  result.seed = seed;
  Tape tape;
  const Vars vars = build(tape);
  Gradients grads = registry.NewGradients();
  tape.Backward(vars.loss, &grads);

  double worst = 0.0;
  const ModuleKind kinds[] = {kind};
  for (size_t id : ParamsOf(registry, kinds)) {
    const auto numeric = Numeric(registry.mutable_param(id), options.step, loss);
    worst = std::max(worst, RelativeError(ToVector(grads[id]), numeric, options.floor));
    result.scalars += numeric.size();
  }
  auto check_input = [&](Matrix &m, Var v) {
    const auto numeric = Numeric(m, options.step, loss);
    worst = std::max(worst, RelativeError(ToVector(tape.grad(v)), numeric, options.floor));
    result.scalars += numeric.size();
  };
  check_input(V, vars.V);
  if (info.uses_text) check_input(t, vars.t);
  for (size_t i = 0; i < deps.size(); ++i) check_input(deps[i], vars.deps[i]);

  result.max_error = worst;
  result.passed = std::isfinite(worst) && worst < options.tolerance;
  return result;
}

namespace {

struct ProgramCase {
  const char *name;
  const char *text;
};

constexpr ProgramCase kPrograms[] = {
    {"filter_query", "select[cat] -> a0; filter_attr[red](a0) -> a1; query_name(a1)"},
    {"relate_exist",
     "select[cat] -> a0; relate_sub[left of](a0) -> a1; select[dog] -> a2; "
     "fusion(a1, a2) -> a3; exist(a3) -> b0; answer_logic(b0)"},
    {"logic_same",
     "select[cat] -> a0; select[dog] -> a1; same[color](a0, a1) -> b0; select[cup] -> a2; "
     "filter_not[red](a2) -> a3; verify_attr[large](a3) -> b1; or(b0, b1) -> b2; "
     "answer_logic(b2)"},
    {"choose_rel",
     "select[cat] -> a0; relate_obj[above](a0) -> a1; select[dog] -> a2; "
     "choose_rel[left of, right of](a1, a2)"},
    {"compare_common",
     "select[cat] -> a0; filter_pos[left](a0) -> a1; select[dog] -> a2; "
     "relate_attr[color](a2) -> a3; different_all[size](a3) -> b0; select[bus] -> a4; "
     "verify_rel_obj[below](a1, a4) -> b1; and(b0, b1) -> b2; answer_logic(b2)"},
};

}  // namespace

std::vector<std::string> GradCheckProgramNames() {
  std::vector<std::string> out;
  for (const auto &p : kPrograms) out.emplace_back(p.name);
  return out;
}

GradCheckCase CheckProgram(size_t index, uint64_t seed, const GradCheckOptions &options) {
  const ProgramCase &pc = kPrograms[index];
  const Dims &dims = options.dims;
  ParameterRegistry registry = ParameterRegistry::Create(dims, seed);
  Rng rng(DeriveSeed(seed, 100 + index));

  SceneExample ex;
  ex.id = index;
  ex.program = ParseProgram(pc.text);
  ex.features = RandomMatrix(dims.features, dims.objects, rng);
  const TypeReport types = Validate(ex.program);
  for (size_t i = 0; i < ex.program.size(); ++i) {
    for (const std::string &arg : ex.program[i].args) {
      if (ex.embeddings.count(arg)) continue;
      std::vector<double> e(dims.features);
      for (double &v : e) v = rng.Uniform(-1.0, 1.0);
      ex.embeddings[arg] = e;
    }
    if (i + 1 == ex.program.size()) break;
    StepTarget target;
    target.type = types.step_types[i];
    if (target.type == ValueType::kAttention) {
      target.values.assign(dims.objects, 0.0);
      target.values[rng.Below(dims.objects)] = 1.0;
      target.values[rng.Below(dims.objects)] = 1.0;
    } else {
      target.values = {rng.Bernoulli(0.5) ? 1.0 : 0.0};
    }
    ex.targets[static_cast<int>(i)] = target;
  }
  ex.gold = rng.Below(dims.answers);
  if (AnswerKind(ex.program) == ModuleKind::kAnswerLogic) ex.gold = rng.Below(2);

  const LossOptions loss_options;
  auto loss = [&] { return RunExample(registry, ex, loss_options, nullptr).total; };
  Gradients grads = registry.NewGradients();
  RunExample(registry, ex, loss_options, &grads);

  std::vector<ModuleKind> kinds;
  for (const ModuleCall &call : ex.program.steps) kinds.push_back(call.kind);
  GradCheckCase result;
  result.name = pc.name;
  result.seed = seed;
  double worst = 0.0;
  for (size_t id : ParamsOf(registry, kinds)) {
    const auto numeric = Numeric(registry.mutable_param(id), options.step, loss);
    worst = std::max(worst, RelativeError(ToVector(grads[id]), numeric, options.floor));
    result.scalars += numeric.size();
  }
  result.max_error = worst;
  result.passed = std::isfinite(worst) && worst < options.tolerance;
  return result;
}

GradCheckReport RunGradCheck(const std::vector<uint64_t> &seeds, const GradCheckOptions &options) {
  GradCheckReport report;
  for (uint64_t seed : seeds) {
    for (const ModuleInfo &info : AllModules()) {
      report.cases.push_back(CheckModule(info.kind, seed, options));
    }
    for (size_t i = 0; i < std::size(kPrograms); ++i) {
      report.cases.push_back(CheckProgram(i, seed, options));
    }
  }
  for (const auto &c : report.cases) report.passed = report.passed && c.passed;
  return report;
}

}  // namespace nmn
