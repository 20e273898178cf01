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

#ifndef NMN_EXECUTOR_EXAMPLE_H_
#define NMN_EXECUTOR_EXAMPLE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "modules/registry.h"
#include "program/program.h"
#include "tensor/matrix.h"

namespace nmn {

// Supervision for one intermediate step. Attention targets are multi-hot
// over the k objects with at least one positive entry; boolean targets
// hold a single 0/1 value.
struct StepTarget {
  ValueType type = ValueType::kAttention;
  std::vector<double> values;

  bool operator==(const StepTarget &other) const = default;
};

// step index -> target
using IntermediateTargets = std::map<int, StepTarget>;

struct ExampleMetadata {
  int objects = 0;
  int length = 0;
  ModuleKind answer_kind = ModuleKind::kAnswerLogic;

  bool operator==(const ExampleMetadata &other) const = default;
};

struct SceneExample {
  uint64_t id = 0;
  Program program;
  Matrix features;  // d x k
  // Embedding for every text argument used by the program.
  std::map<std::string, std::vector<double>> embeddings;
  size_t gold = 0;  // index into the answer vocabulary
  IntermediateTargets targets;
  ExampleMetadata metadata;

  bool operator==(const SceneExample &other) const = default;
};

struct Dataset {
  Dims dims;
  std::vector<std::string> answers;  // starts with "yes", "no"
  uint64_t seed = 0;
  std::vector<SceneExample> examples;

  size_t size() const { return examples.size(); }
  bool operator==(const Dataset &other) const = default;
};

}  // namespace nmn

#endif  // NMN_EXECUTOR_EXAMPLE_H_
