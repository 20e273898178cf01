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

#ifndef NMN_SYNTH_ORACLE_H_
#define NMN_SYNTH_ORACLE_H_

#include <string>
#include <vector>

#include "executor/example.h"
#include "program/program.h"
#include "synth/scene.h"

namespace nmn {

// Symbolic value of one step: an object set, a truth value or an answer word.
struct OracleValue {
  ValueType type = ValueType::kAttention;
  std::vector<bool> set;
  bool truth = false;
  std::string answer;

  bool operator==(const OracleValue &other) const = default;
};

struct OracleResult {
  std::vector<OracleValue> steps;
  std::string answer;
  IntermediateTargets targets;
};

// Evaluates one call given the values of earlier steps. Throws
// ErrorCode::kOracle when the question is ill-posed on this scene (a query
// over anything but one object, a choice where not exactly one candidate
// holds, ...).
OracleValue EvalStep(const SceneGraph &scene, const Vocabulary &vocab, const ModuleCall &call,
                     const std::vector<OracleValue> &buffer);

// Runs the whole program. Attention steps with a non-empty set get a
// multi-hot target, boolean steps a 0/1 target; the answer step has none.
OracleResult OracleExecute(const Program &p, const SceneGraph &scene, const Vocabulary &vocab);

}  // namespace nmn

#endif  // NMN_SYNTH_ORACLE_H_
