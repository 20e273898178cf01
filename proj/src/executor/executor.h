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

#ifndef NMN_EXECUTOR_EXECUTOR_H_
#define NMN_EXECUTOR_EXECUTOR_H_

#include <optional>
#include <span>
#include <vector>

#include "executor/example.h"
#include "modules/registry.h"
#include "program/program.h"
#include "tensor/tape.h"

namespace nmn {

inline constexpr double kLogFloor = 1e-12;

struct LossOptions {
  double intermediate_weight = 1.0;  // lambda
  bool average_intermediate = true;  // mean over supervised steps; false sums
  double eps = kLogFloor;
};

// Forward pass recorded on a tape. outputs[i] is the memory-buffer slot
// written by step i.
struct ForwardPass {
  Var features;
  std::vector<Var> outputs;
  std::vector<ValueType> types;

  Var answer() const { return outputs.back(); }
};

struct StepRecord {
  ModuleKind kind = ModuleKind::kSelect;
  ValueType type = ValueType::kAttention;
  std::vector<double> value;
  std::optional<double> loss;
};

struct ExecutionTrace {
  std::vector<StepRecord> steps;
  std::vector<double> answer;
  std::optional<double> answer_loss;
  std::optional<double> total_loss;
};

// Builds the network for p over the scene and evaluates it step by step.
ForwardPass Execute(Tape &tape, const ParameterRegistry &registry, const Program &p,
                    const Matrix &features,
                    const std::map<std::string, std::vector<double>> &embeddings);

// -log(p[gold] + eps)
Var AnswerLoss(Tape &tape, const ForwardPass &pass, size_t gold, double eps = kLogFloor);

// Per-step losses (unset where a step has no target). Attention steps use
// cross-entropy between the L1-normalized target and the renormalized
// output, boolean steps binary cross-entropy.
std::vector<std::optional<Var>> IntermediateLosses(Tape &tape, const ForwardPass &pass,
                                                   const IntermediateTargets &targets,
                                                   double eps = kLogFloor);

// L = L_answer + lambda * (sum or mean of intermediate losses)
Var TotalLoss(Tape &tape, Var answer_loss, const std::vector<std::optional<Var>> &intermediate,
              const LossOptions &options);

ExecutionTrace MakeTrace(const Tape &tape, const Program &p, const ForwardPass &pass,
                         const std::vector<std::optional<Var>> *intermediate = nullptr,
                         std::optional<Var> answer_loss = std::nullopt,
                         std::optional<Var> total_loss = std::nullopt);

// Result of one supervised forward (+ optional backward) on an example.
struct ExampleLoss {
  double total = 0.0;
  double answer = 0.0;
  // (module kind, loss) for every supervised step, answer step included.
  std::vector<std::pair<ModuleKind, double>> per_module;
  size_t predicted = 0;
};

// Forward, losses and, when grads is non-null, backward with the given
// scale. Throws ErrorCode::kNumerical on a non-finite loss.
ExampleLoss RunExample(const ParameterRegistry &registry, const SceneExample &example,
                       const LossOptions &options, Gradients *grads, double scale = 1.0);

// Full trace including losses.
ExecutionTrace TraceExample(const ParameterRegistry &registry, const SceneExample &example,
                            const LossOptions &options);

// Index of the largest entry; ties go to the lowest index.
size_t Argmax(std::span<const double> values);

}  // namespace nmn

#endif  // NMN_EXECUTOR_EXECUTOR_H_
