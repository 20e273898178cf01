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

#ifndef NMN_TESTS_SUPPORT_FIXTURES_H_
#define NMN_TESTS_SUPPORT_FIXTURES_H_

#include <optional>
#include <vector>

#include "modules/modules.h"
#include "modules/registry.h"
#include "tensor/tape.h"
#include "util/random.h"

namespace nmn::testing {

struct ModuleInputs {
  Matrix V;
  std::vector<double> t;
  std::vector<std::vector<double>> deps;
};

inline std::vector<double> RandomAttention(size_t k, Rng &rng) {
  std::vector<double> a(k);
  for (double &v : a) v = rng.Uniform();
  return a;
}

// Random features, text and well-typed dependency values for kind.
inline ModuleInputs RandomInputs(ModuleKind kind, const Dims &dims, Rng &rng) {
  ModuleInputs in;
  in.V = Matrix(dims.features, dims.objects);
  for (double &v : in.V.values()) v = rng.Normal();
  in.t.resize(dims.features);
  for (double &v : in.t) v = rng.Normal();
  for (ValueType type : Info(kind).deps()) {
    if (type == ValueType::kBoolean) {
      in.deps.push_back({rng.Uniform()});
    } else {
      in.deps.push_back(RandomAttention(dims.objects, rng));
    }
  }
  return in;
}

// Fresh registry with Gaussian noise on every parameter, so biases and
// identity-initialized layers take generic values.
inline ParameterRegistry PerturbedRegistry(const Dims &dims, uint64_t seed, double scale = 0.3) {
  ParameterRegistry reg = ParameterRegistry::Create(dims, seed);
  Rng rng(seed + 1000);
  for (size_t id = 0; id < reg.num_params(); ++id) {
    for (double &v : reg.mutable_param(id).values()) v += scale * rng.Normal();
  }
  return reg;
}

// Module output computed through the tape.
inline std::vector<double> RunModule(const ParameterRegistry &reg, ModuleKind kind,
                                     const ModuleInputs &in) {
  Tape tape;
  ModuleLibrary lib(reg, tape);
  const Var V = tape.Constant(in.V);
  std::optional<Var> text;
  if (Info(kind).uses_text) text = tape.Constant(Matrix::Column(in.t));
  std::vector<Var> deps;
  for (const auto &d : in.deps) deps.push_back(tape.Constant(Matrix::Column(d)));
  const Var out = lib.Apply(kind, V, text, deps);
  const Matrix &m = tape.value(out);
  return {m.values().begin(), m.values().end()};
}

}  // namespace nmn::testing

#endif  // NMN_TESTS_SUPPORT_FIXTURES_H_
