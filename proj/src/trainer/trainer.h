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

#ifndef NMN_TRAINER_TRAINER_H_
#define NMN_TRAINER_TRAINER_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "curriculum/curriculum.h"
#include "executor/example.h"
#include "executor/executor.h"
#include "modules/registry.h"

namespace nmn {

struct TrainConfig {
  double learning_rate = 0.1;
  size_t batch_size = 8;
  LossOptions loss;
  uint64_t seed = 0;
  // Examples of a batch are split over this many workers; gradients are
  // reduced in worker order, so results depend on the count but not on
  // scheduling.
  size_t threads = 1;
  // Evaluate after every eval_every-th iteration and after the last one.
  int eval_every = 1;

  void Check() const;
};

struct IterationMetrics {
  int iteration = 0;  // 1-based over executed iterations
  std::string difficulty_key;
  size_t presentations = 0;  // cumulative
  size_t distinct = 0;       // cumulative distinct example ids
  double train_loss = 0.0;   // mean total loss over the iteration's draws
  std::optional<double> eval_accuracy;
  size_t sample_size = 0;
  size_t replay = 0;
  size_t pool_size = 0;
};

struct MetricsLog {
  std::vector<IterationMetrics> iterations;
  std::optional<double> best_accuracy;
  int best_iteration = 0;  // 0 when nothing was evaluated
  std::vector<std::string> warnings;

  // iteration,difficulty_key,presentations,distinct,train_loss,eval_accuracy
  std::string ToCsv() const;
  std::string ToJson() const;
};

struct TrainResult {
  MetricsLog log;
  ParameterRegistry best;   // peak eval accuracy; final when never evaluated
  ParameterRegistry final;
};

// Throws ErrorCode::kData when registry and dataset dimensions differ.
void CheckCompatible(const ParameterRegistry &registry, const Dataset &dataset);

// One SGD update with the batch-mean gradient. Returns the batch-mean loss
// and appends per-module losses to module_losses when given.
double SgdStep(ParameterRegistry &registry, std::span<const SceneExample *const> batch,
               const TrainConfig &config,
               std::vector<std::pair<ModuleKind, double>> *module_losses = nullptr);

// Fraction of examples whose argmax answer equals gold.
double Evaluate(const ParameterRegistry &registry, const Dataset &eval, size_t threads = 1);

using ProgressFn = std::function<void(const IterationMetrics &)>;

// Runs the plan: each iteration draws its sample, trains on it in batches
// and is evaluated on eval (when given).
TrainResult Train(const CurriculumPlan &plan, const Dataset &train, const Dataset *eval,
                  ParameterRegistry init, const TrainConfig &config,
                  const ProgressFn &progress = nullptr);

}  // namespace nmn

#endif  // NMN_TRAINER_TRAINER_H_
