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

#ifndef NMN_PROGRAM_MODULE_KIND_H_
#define NMN_PROGRAM_MODULE_KIND_H_

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace nmn {

// Value produced by a module step.
enum class ValueType { kAttention, kBoolean, kAnswer };

std::string_view ValueTypeName(ValueType type);

// The 29 reasoning modules.
enum class ModuleKind {
  kSelect,
  kFilterAttr,
  kFilterNot,
  kFilterPos,
  kRelateSub,
  kRelateObj,
  kRelateAttr,
  kFusion,
  kAnd,
  kOr,
  kSame,
  kSameAll,
  kDifferent,
  kDifferentAll,
  kExist,
  kVerifyRelSub,
  kVerifyRelObj,
  kVerifyAttr,
  kVerifyPos,
  kChooseName,
  kChooseAttr,
  kCompare,
  kChoosePos,
  kChooseRel,
  kCommon,
  kQueryName,
  kQueryAttr,
  kQueryPos,
  kAnswerLogic,
};

inline constexpr size_t kNumModuleKinds = 29;

struct ModuleInfo {
  ModuleKind kind;
  std::string_view name;  // DSL spelling
  ValueType output;
  // Input types of the dependencies, in order. Size is the arity.
  std::array<ValueType, 2> dep_types;
  int arity;
  // Allowed number of bracketed text arguments.
  int min_args;
  int max_args;
  // Whether the neural formula consumes the text embedding.
  bool uses_text;

  std::span<const ValueType> deps() const {
    return std::span<const ValueType>(dep_types.data(), arity);
  }
};

const ModuleInfo &Info(ModuleKind kind);
std::span<const ModuleInfo> AllModules();
std::optional<ModuleKind> ModuleKindFromName(std::string_view name);
inline std::string_view ModuleName(ModuleKind kind) { return Info(kind).name; }

}  // namespace nmn

#endif  // NMN_PROGRAM_MODULE_KIND_H_
