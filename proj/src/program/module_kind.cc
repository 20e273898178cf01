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

#include "program/module_kind.h"

#include "util/error.h"

namespace nmn {

namespace {

constexpr ValueType A = ValueType::kAttention;
constexpr ValueType B = ValueType::kBoolean;
constexpr ValueType R = ValueType::kAnswer;

using K = ModuleKind;

// Dependencies / output columns of the module table.
constexpr std::array<ModuleInfo, kNumModuleKinds> kModules = {{
    {K::kSelect, "select", A, {A, A}, 0, 1, 1, true},
    {K::kFilterAttr, "filter_attr", A, {A, A}, 1, 1, 1, true},
    {K::kFilterNot, "filter_not", A, {A, A}, 1, 1, 1, true},
    {K::kFilterPos, "filter_pos", A, {A, A}, 1, 1, 1, true},
    {K::kRelateSub, "relate_sub", A, {A, A}, 1, 1, 1, true},
    {K::kRelateObj, "relate_obj", A, {A, A}, 1, 1, 1, true},
    {K::kRelateAttr, "relate_attr", A, {A, A}, 1, 1, 1, true},
    {K::kFusion, "fusion", A, {A, A}, 2, 0, 0, false},
    {K::kAnd, "and", B, {B, B}, 2, 0, 0, false},
    {K::kOr, "or", B, {B, B}, 2, 0, 0, false},
    {K::kSame, "same", B, {A, A}, 2, 1, 1, true},
    {K::kSameAll, "same_all", B, {A, A}, 1, 1, 1, true},
    {K::kDifferent, "different", B, {A, A}, 2, 1, 1, true},
    {K::kDifferentAll, "different_all", B, {A, A}, 1, 1, 1, true},
    {K::kExist, "exist", B, {A, A}, 1, 0, 0, false},
    {K::kVerifyRelSub, "verify_rel_sub", B, {A, A}, 2, 1, 1, true},
    {K::kVerifyRelObj, "verify_rel_obj", B, {A, A}, 2, 1, 1, true},
    {K::kVerifyAttr, "verify_attr", B, {A, A}, 1, 1, 1, true},
    {K::kVerifyPos, "verify_pos", B, {A, A}, 1, 1, 1, true},
    {K::kChooseName, "choose_name", R, {A, A}, 1, 1, 2, true},
    {K::kChooseAttr, "choose_attr", R, {A, A}, 1, 1, 2, true},
    {K::kCompare, "compare", R, {A, A}, 2, 1, 1, true},
    {K::kChoosePos, "choose_pos", R, {A, A}, 1, 1, 2, true},
    {K::kChooseRel, "choose_rel", R, {A, A}, 2, 1, 2, true},
    {K::kCommon, "common", R, {A, A}, 2, 0, 0, false},
    {K::kQueryName, "query_name", R, {A, A}, 1, 0, 0, false},
    // The attribute category may be named but the formula ignores it.
    {K::kQueryAttr, "query_attr", R, {A, A}, 1, 0, 1, false},
    {K::kQueryPos, "query_pos", R, {A, A}, 1, 0, 0, false},
    {K::kAnswerLogic, "answer_logic", R, {B, B}, 1, 0, 0, false},
}};

}  // namespace

std::string_view ValueTypeName(ValueType type) {
  switch (type) {
    case ValueType::kAttention: return "attention";
    case ValueType::kBoolean: return "boolean";
    case ValueType::kAnswer: return "answer";
  }
  return "?";
}

const ModuleInfo &Info(ModuleKind kind) {
  const auto index = static_cast<size_t>(kind);
  if (index >= kModules.size()) Fail(ErrorCode::kInvalidArgument, "bad module kind");
  return kModules[index];
}

std::span<const ModuleInfo> AllModules() { return kModules; }

std::optional<ModuleKind> ModuleKindFromName(std::string_view name) {
  for (const ModuleInfo &info : kModules) {
    if (info.name == name) return info.kind;
  }
  return std::nullopt;
}

}  // namespace nmn
