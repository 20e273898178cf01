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

#ifndef NMN_MODULES_MODULES_H_
#define NMN_MODULES_MODULES_H_

#include <optional>
#include <span>
#include <unordered_map>

#include "modules/registry.h"
#include "program/module_kind.h"
#include "tensor/tape.h"

namespace nmn {

// Neural module formulas recorded on a tape. Notation: V is the d x k
// object feature matrix, t a d x 1 text embedding, a/a1/a2 k x 1 attention
// vectors, b/b1/b2 1 x 1 booleans; r = relu, S = softmax, s = sigmoid.
//
// The registry is read-only here, so several ModuleLibrary instances over
// distinct tapes may run concurrently.
class ModuleLibrary {
 public:
  ModuleLibrary(const ParameterRegistry &registry, Tape &tape)
      : registry_(registry), tape_(tape) {}

  // x = r(W_t t), Y = r(W_v V), o = S(W_o (Y^T x))
  Var Select(Var V, Var t);
  // z = S(W_o (Y^T x)); attr/pos: o = min(a, z); not: o = min(a, 1 - z)
  Var Filter(ModuleKind kind, Var V, Var t, Var a);
  // z = S(W_i (Y^T x)), y = r(W_v (V a)), z' = r(W_v (V z)),
  // o = S(W_o (x . y . z')) with W_o: d -> k.
  Var Relate(ModuleKind kind, Var V, Var t, Var a);
  Var Fusion(Var a1, Var a2);
  Var And(Var b1, Var b2);
  Var Or(Var b1, Var b2);
  // o = s(W_o (x . y . z)), y = r(W_v (V a1)), z = r(W_v (V a2))
  Var Same(Var V, Var t, Var a1, Var a2);
  Var Different(Var V, Var t, Var a1, Var a2);
  // o = s(W_o (x . y))
  Var SameAll(Var V, Var t, Var a);
  Var DifferentAll(Var V, Var t, Var a);
  // o = s(W_o [a || max(a) || min(a) || mean(a)])
  Var Exist(Var a);
  // attr/pos: o = s(W_o (x . y)); rel_sub/rel_obj: o = s(W_o (x . y . z))
  Var Verify(ModuleKind kind, Var V, Var t, Var a);
  Var VerifyRel(ModuleKind kind, Var V, Var t, Var a1, Var a2);
  // name/attr/pos: o = S(W_o (x . y))
  Var Choose(ModuleKind kind, Var V, Var t, Var a);
  // o = S(W_o (x . y . z))
  Var ChooseRel(Var V, Var t, Var a1, Var a2);
  Var Compare(Var V, Var t, Var a1, Var a2);
  // x = r(W_v (V a1)), y = r(W_v (V a2)), o = S(W_o (x . y))
  Var Common(Var V, Var a1, Var a2);
  // x = r(W_v (V a)), o = S(W_o x)
  Var Query(ModuleKind kind, Var V, Var a);
  // o_yes = b, o_no = 1 - b, zero elsewhere.
  Var AnswerLogic(Var b);

  // Dispatches on kind. text must be set iff the formula consumes it.
  Var Apply(ModuleKind kind, Var V, std::optional<Var> text, std::span<const Var> deps);

 private:
  const ParameterRegistry::Layer &LayerOf(ModuleKind kind, LayerRole role) const;
  Var Param(size_t id);
  // W x + b applied column-wise.
  Var Dense(ModuleKind kind, LayerRole role, Var x);
  Var TextFeature(ModuleKind kind, Var t);
  Var VisualMap(ModuleKind kind, Var V);
  Var AttendedFeature(ModuleKind kind, Var V, Var a);
  Var Detect(ModuleKind kind, LayerRole role, Var x, Var Y);

  const ParameterRegistry &registry_;
  Tape &tape_;
  std::unordered_map<size_t, Var> params_;
};

}  // namespace nmn

#endif  // NMN_MODULES_MODULES_H_
