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

#include "modules/modules.h"

#include <string>

#include "util/error.h"

namespace nmn {

using K = ModuleKind;
using R = LayerRole;

const ParameterRegistry::Layer &ModuleLibrary::LayerOf(ModuleKind kind, LayerRole role) const {
  const ParameterRegistry::Layer *layer = registry_.LayerFor(kind, role);
  if (layer == nullptr) {
    Fail(ErrorCode::kState, std::string(ModuleName(kind)) + " has no " +
                                std::string(LayerRoleName(role)) + " layer");
  }
  return *layer;
}

Var ModuleLibrary::Param(size_t id) {
  auto it = params_.find(id);
  if (it != params_.end()) return it->second;
  Var v = tape_.Parameter(id, registry_.param(id));
  params_.emplace(id, v);
  return v;
}

Var ModuleLibrary::Dense(ModuleKind kind, LayerRole role, Var x) {
  const auto &layer = LayerOf(kind, role);
  return tape_.AddColumn(tape_.MatMul(Param(layer.weight), x), Param(layer.bias));
}

Var ModuleLibrary::TextFeature(ModuleKind kind, Var t) {
  return tape_.Relu(Dense(kind, R::kTextual, t));
}

Var ModuleLibrary::VisualMap(ModuleKind kind, Var V) {
  return tape_.Relu(Dense(kind, R::kVisual, V));
}

Var ModuleLibrary::AttendedFeature(ModuleKind kind, Var V, Var a) {
  return tape_.Relu(Dense(kind, R::kVisual, tape_.MatMul(V, a)));
}

// S(W (Y^T x)) with the layer in the given role.
Var ModuleLibrary::Detect(ModuleKind kind, LayerRole role, Var x, Var Y) {
  Var scores = tape_.MatMul(tape_.Transpose(Y), x);
  return tape_.Softmax(Dense(kind, role, scores));
}

Var ModuleLibrary::Select(Var V, Var t) {
  Var x = TextFeature(K::kSelect, t);
  Var Y = VisualMap(K::kSelect, V);
  return Detect(K::kSelect, R::kOutput, x, Y);
}

Var ModuleLibrary::Filter(ModuleKind kind, Var V, Var t, Var a) {
  if (kind != K::kFilterAttr && kind != K::kFilterNot && kind != K::kFilterPos) {
    Fail(ErrorCode::kInvalidArgument, "not a filter module");
  }
  Var x = TextFeature(kind, t);
  Var Y = VisualMap(kind, V);
  Var z = Detect(kind, R::kOutput, x, Y);
  if (kind == K::kFilterNot) return tape_.ElemMin(a, tape_.OneMinus(z));
  return tape_.ElemMin(a, z);
}

Var ModuleLibrary::Relate(ModuleKind kind, Var V, Var t, Var a) {
  if (kind != K::kRelateSub && kind != K::kRelateObj && kind != K::kRelateAttr) {
    Fail(ErrorCode::kInvalidArgument, "not a relate module");
  }
  Var x = TextFeature(kind, t);
  Var Y = VisualMap(kind, V);
  Var z = Detect(kind, R::kInner, x, Y);
  Var y = AttendedFeature(kind, V, a);
  Var z_feature = AttendedFeature(kind, V, z);
  Var joint = tape_.Hadamard(tape_.Hadamard(x, y), z_feature);
  return tape_.Softmax(Dense(kind, R::kOutput, joint));
}

Var ModuleLibrary::Fusion(Var a1, Var a2) { return tape_.ElemMin(a1, a2); }

Var ModuleLibrary::And(Var b1, Var b2) { return tape_.Hadamard(b1, b2); }

Var ModuleLibrary::Or(Var b1, Var b2) {
  return tape_.Sub(tape_.Add(b1, b2), tape_.Hadamard(b1, b2));
}

Var ModuleLibrary::Same(Var V, Var t, Var a1, Var a2) {
  Var x = TextFeature(K::kSame, t);
  Var y = AttendedFeature(K::kSame, V, a1);
  Var z = AttendedFeature(K::kSame, V, a2);
  return tape_.Sigmoid(Dense(K::kSame, R::kOutput, tape_.Hadamard(tape_.Hadamard(x, y), z)));
}

Var ModuleLibrary::Different(Var V, Var t, Var a1, Var a2) {
  // Resolves to the Same layers through the sharing table.
  Var x = TextFeature(K::kDifferent, t);
  Var y = AttendedFeature(K::kDifferent, V, a1);
  Var z = AttendedFeature(K::kDifferent, V, a2);
  Var same = tape_.Sigmoid(
      Dense(K::kDifferent, R::kOutput, tape_.Hadamard(tape_.Hadamard(x, y), z)));
  return tape_.OneMinus(same);
}

Var ModuleLibrary::SameAll(Var V, Var t, Var a) {
  Var x = TextFeature(K::kSameAll, t);
  Var y = AttendedFeature(K::kSameAll, V, a);
  return tape_.Sigmoid(Dense(K::kSameAll, R::kOutput, tape_.Hadamard(x, y)));
}

Var ModuleLibrary::DifferentAll(Var V, Var t, Var a) {
  Var x = TextFeature(K::kDifferentAll, t);
  Var y = AttendedFeature(K::kDifferentAll, V, a);
  return tape_.OneMinus(
      tape_.Sigmoid(Dense(K::kDifferentAll, R::kOutput, tape_.Hadamard(x, y))));
}

Var ModuleLibrary::Exist(Var a) {
  const Var parts[] = {a, tape_.MaxVal(a), tape_.MinVal(a), tape_.MeanVal(a)};
  return tape_.Sigmoid(Dense(K::kExist, R::kOutput, tape_.Concat(parts)));
}

Var ModuleLibrary::Verify(ModuleKind kind, Var V, Var t, Var a) {
  if (kind != K::kVerifyAttr && kind != K::kVerifyPos) {
    Fail(ErrorCode::kInvalidArgument, "not a single-dependency verify module");
  }
  Var x = TextFeature(kind, t);
  Var y = AttendedFeature(kind, V, a);
  return tape_.Sigmoid(Dense(kind, R::kOutput, tape_.Hadamard(x, y)));
}

Var ModuleLibrary::VerifyRel(ModuleKind kind, Var V, Var t, Var a1, Var a2) {
  if (kind != K::kVerifyRelSub && kind != K::kVerifyRelObj) {
    Fail(ErrorCode::kInvalidArgument, "not a relation verify module");
  }
  Var x = TextFeature(kind, t);
  Var y = AttendedFeature(kind, V, a1);
  Var z = AttendedFeature(kind, V, a2);
  return tape_.Sigmoid(Dense(kind, R::kOutput, tape_.Hadamard(tape_.Hadamard(x, y), z)));
}

Var ModuleLibrary::Choose(ModuleKind kind, Var V, Var t, Var a) {
  if (kind != K::kChooseName && kind != K::kChooseAttr && kind != K::kChoosePos) {
    Fail(ErrorCode::kInvalidArgument, "not a single-dependency choose module");
  }
  Var x = TextFeature(kind, t);
  Var y = AttendedFeature(kind, V, a);
  return tape_.Softmax(Dense(kind, R::kOutput, tape_.Hadamard(x, y)));
}

Var ModuleLibrary::ChooseRel(Var V, Var t, Var a1, Var a2) {
  Var x = TextFeature(K::kChooseRel, t);
  Var y = AttendedFeature(K::kChooseRel, V, a1);
  Var z = AttendedFeature(K::kChooseRel, V, a2);
  return tape_.Softmax(Dense(K::kChooseRel, R::kOutput, tape_.Hadamard(tape_.Hadamard(x, y), z)));
}

Var ModuleLibrary::Compare(Var V, Var t, Var a1, Var a2) {
  Var x = TextFeature(K::kCompare, t);
  Var y = AttendedFeature(K::kCompare, V, a1);
  Var z = AttendedFeature(K::kCompare, V, a2);
  return tape_.Softmax(Dense(K::kCompare, R::kOutput, tape_.Hadamard(tape_.Hadamard(x, y), z)));
}

Var ModuleLibrary::Common(Var V, Var a1, Var a2) {
  Var x = AttendedFeature(K::kCommon, V, a1);
  Var y = AttendedFeature(K::kCommon, V, a2);
  return tape_.Softmax(Dense(K::kCommon, R::kOutput, tape_.Hadamard(x, y)));
}

Var ModuleLibrary::Query(ModuleKind kind, Var V, Var a) {
  if (kind != K::kQueryName && kind != K::kQueryAttr && kind != K::kQueryPos) {
    Fail(ErrorCode::kInvalidArgument, "not a query module");
  }
  Var x = AttendedFeature(kind, V, a);
  return tape_.Softmax(Dense(kind, R::kOutput, x));
}

Var ModuleLibrary::AnswerLogic(Var b) {
  const size_t n = registry_.dims().answers;
  return tape_.Add(tape_.Place(b, n, kYesIndex), tape_.Place(tape_.OneMinus(b), n, kNoIndex));
}

Var ModuleLibrary::Apply(ModuleKind kind, Var V, std::optional<Var> text,
                         std::span<const Var> deps) {
  const ModuleInfo &info = Info(kind);
  if (static_cast<int>(deps.size()) != info.arity) {
    Fail(ErrorCode::kInvalidArgument, std::string(info.name) + " expects " +
                                          std::to_string(info.arity) + " dependencies");
  }
  if (info.uses_text && !text) {
    Fail(ErrorCode::kInvalidArgument, std::string(info.name) + " needs a text embedding");
  }
  switch (kind) {
    case K::kSelect: return Select(V, *text);
    case K::kFilterAttr:
    case K::kFilterNot:
    case K::kFilterPos: return Filter(kind, V, *text, deps[0]);
    case K::kRelateSub:
    case K::kRelateObj:
    case K::kRelateAttr: return Relate(kind, V, *text, deps[0]);
    case K::kFusion: return Fusion(deps[0], deps[1]);
    case K::kAnd: return And(deps[0], deps[1]);
    case K::kOr: return Or(deps[0], deps[1]);
    case K::kSame: return Same(V, *text, deps[0], deps[1]);
    case K::kSameAll: return SameAll(V, *text, deps[0]);
    case K::kDifferent: return Different(V, *text, deps[0], deps[1]);
    case K::kDifferentAll: return DifferentAll(V, *text, deps[0]);
    case K::kExist: return Exist(deps[0]);
    case K::kVerifyRelSub:
    case K::kVerifyRelObj: return VerifyRel(kind, V, *text, deps[0], deps[1]);
    case K::kVerifyAttr:
    case K::kVerifyPos: return Verify(kind, V, *text, deps[0]);
    case K::kChooseName:
    case K::kChooseAttr:
    case K::kChoosePos: return Choose(kind, V, *text, deps[0]);
    case K::kCompare: return Compare(V, *text, deps[0], deps[1]);
    case K::kChooseRel: return ChooseRel(V, *text, deps[0], deps[1]);
    case K::kCommon: return Common(V, deps[0], deps[1]);
    case K::kQueryName:
    case K::kQueryAttr:
    case K::kQueryPos: return Query(kind, V, deps[0]);
    case K::kAnswerLogic: return AnswerLogic(deps[0]);
  }
  Fail(ErrorCode::kInvalidArgument, "unhandled module kind");
}

}  // namespace nmn
