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

#include "executor/executor.h"

#include <cmath>
#include <string>

#include "modules/modules.h"
#include "util/error.h"

namespace nmn {

namespace {

Matrix TextEmbedding(const ModuleCall &call, size_t step,
                     const std::map<std::string, std::vector<double>> &embeddings,
                     size_t dim) {
  Matrix t(dim, 1);
  for (const std::string &arg : call.args) {
    auto it = embeddings.find(arg);
    if (it == embeddings.end()) {
      Fail(ErrorCode::kData, "missing argument embedding for '" + arg + "' (step " +
                                 std::to_string(step) + ", " +
                                 std::string(ModuleName(call.kind)) + ")");
    }
    if (it->second.size() != dim) {
      Fail(ErrorCode::kShape, "embedding for '" + arg + "' has dim " +
                                  std::to_string(it->second.size()) + ", expected " +
                                  std::to_string(dim));
    }
    for (size_t i = 0; i < dim; ++i) t[i] += it->second[i];
  }
  // Several candidate words are averaged into one embedding.
  const double n = static_cast<double>(call.args.size());
  for (double &v : t.values()) v /= n;
  return t;
}

}  // namespace

size_t Argmax(std::span<const double> values) {
  size_t best = 0;
  for (size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

ForwardPass Execute(Tape &tape, const ParameterRegistry &registry, const Program &p,
                    const Matrix &features,
                    const std::map<std::string, std::vector<double>> &embeddings) {
  const TypeReport report = Validate(p);
  const Dims &dims = registry.dims();
  if (features.rows() != dims.features || features.cols() != dims.objects) {
    Fail(ErrorCode::kShape, "scene features are " + features.ShapeString() +
                                " but the model expects " + std::to_string(dims.features) +
                                "x" + std::to_string(dims.objects));
  }
  ModuleLibrary modules(registry, tape);
  ForwardPass pass;
  pass.features = tape.Constant(features);
  pass.types = report.step_types;
  pass.outputs.reserve(p.size());
  for (size_t i = 0; i < p.size(); ++i) {
    const ModuleCall &call = p[i];
    std::optional<Var> text;
    if (Info(call.kind).uses_text) {
      text = tape.Constant(TextEmbedding(call, i, embeddings, dims.features));
    }
    Var deps[2];
    for (size_t j = 0; j < call.deps.size(); ++j) deps[j] = pass.outputs[call.deps[j]];
    pass.outputs.push_back(modules.Apply(call.kind, pass.features, text,
                                         std::span<const Var>(deps, call.deps.size())));
  }
  return pass;
}

Var AnswerLoss(Tape &tape, const ForwardPass &pass, size_t gold, double eps) {
  const Matrix &answer = tape.value(pass.answer());
  if (gold >= answer.size()) {
    Fail(ErrorCode::kData, "gold answer index " + std::to_string(gold) +
                               " outside vocabulary of " + std::to_string(answer.size()));
  }
  Matrix onehot(answer.size(), 1);
  onehot[gold] = 1.0;
  return tape.CrossEntropy(pass.answer(), onehot, eps);
}

std::vector<std::optional<Var>> IntermediateLosses(Tape &tape, const ForwardPass &pass,
                                                   const IntermediateTargets &targets,
                                                   double eps) {
  std::vector<std::optional<Var>> losses(pass.outputs.size());
  for (const auto &[step, target] : targets) {
    if (step < 0 || static_cast<size_t>(step) >= pass.outputs.size()) {
      Fail(ErrorCode::kData, "target for step " + std::to_string(step) + " outside program");
    }
    const ValueType type = pass.types[step];
    if (type == ValueType::kAnswer) {
      Fail(ErrorCode::kData, "intermediate target points at answer step " + std::to_string(step));
    }
    if (type != target.type) {
      Fail(ErrorCode::kData, "target for step " + std::to_string(step) + " is " +
                                 std::string(ValueTypeName(target.type)) + " but the step produces " +
                                 std::string(ValueTypeName(type)));
    }
    const Var out = pass.outputs[step];
    if (type == ValueType::kBoolean) {
      if (target.values.size() != 1) Fail(ErrorCode::kData, "boolean target needs one value");
      losses[step] = tape.BinaryCrossEntropy(out, target.values[0], eps);
      continue;
    }
    const size_t k = tape.value(out).size();
    if (target.values.size() != k) {
      Fail(ErrorCode::kData, "attention target for step " + std::to_string(step) + " has " +
                                 std::to_string(target.values.size()) + " entries, expected " +
                                 std::to_string(k));
    }
    double mass = 0.0;
    for (double v : target.values) mass += v;
    if (!(mass > 0.0)) {
      Fail(ErrorCode::kData, "attention target for step " + std::to_string(step) +
                                 " has no positive entry");
    }
    Matrix normalized(k, 1);
    for (size_t j = 0; j < k; ++j) normalized[j] = target.values[j] / mass;
    // Min-composed outputs need not sum to one; renormalize for the loss.
    // An all-zero output (possible for filter_not when k = 1) is scored as is.
    double sum = 0.0;
    for (double v : tape.value(out).values()) sum += v;
    losses[step] = tape.CrossEntropy(sum > 0.0 ? tape.Normalize(out) : out, normalized, eps);
  }
  return losses;
}

Var TotalLoss(Tape &tape, Var answer_loss, const std::vector<std::optional<Var>> &intermediate,
              const LossOptions &options) {
  std::optional<Var> sum;
  int count = 0;
  for (const auto &loss : intermediate) {
    if (!loss) continue;
    sum = sum ? tape.Add(*sum, *loss) : *loss;
    ++count;
  }
  if (!sum || options.intermediate_weight == 0.0) return answer_loss;
  double weight = options.intermediate_weight;
  if (options.average_intermediate) weight /= count;
  return tape.Add(answer_loss, tape.Scale(*sum, weight));
}

ExecutionTrace MakeTrace(const Tape &tape, const Program &p, const ForwardPass &pass,
                         const std::vector<std::optional<Var>> *intermediate,
                         std::optional<Var> answer_loss, std::optional<Var> total_loss) {
  ExecutionTrace trace;
  for (size_t i = 0; i < pass.outputs.size(); ++i) {
    StepRecord record;
    record.kind = p[i].kind;
    record.type = pass.types[i];
    const Matrix &v = tape.value(pass.outputs[i]);
    record.value.assign(v.values().begin(), v.values().end());
    if (intermediate != nullptr && (*intermediate)[i]) {
      record.loss = tape.scalar(*(*intermediate)[i]);
    }
    trace.steps.push_back(std::move(record));
  }
  trace.answer = trace.steps.back().value;
  if (answer_loss) {
    trace.answer_loss = tape.scalar(*answer_loss);
    trace.steps.back().loss = trace.answer_loss;
  }
  if (total_loss) trace.total_loss = tape.scalar(*total_loss);
  return trace;
}

ExampleLoss RunExample(const ParameterRegistry &registry, const SceneExample &example,
                       const LossOptions &options, Gradients *grads, double scale) {
  Tape tape;
  const ForwardPass pass =
      Execute(tape, registry, example.program, example.features, example.embeddings);
  const Var answer_loss = AnswerLoss(tape, pass, example.gold, options.eps);
  const auto intermediate = IntermediateLosses(tape, pass, example.targets, options.eps);
  const Var total = TotalLoss(tape, answer_loss, intermediate, options);

  ExampleLoss result;
  result.total = tape.scalar(total);
  result.answer = tape.scalar(answer_loss);
  if (!std::isfinite(result.total)) {
    Fail(ErrorCode::kNumerical, "non-finite loss on example " + std::to_string(example.id));
  }
  for (size_t i = 0; i < intermediate.size(); ++i) {
    if (intermediate[i]) {
      result.per_module.emplace_back(example.program[i].kind, tape.scalar(*intermediate[i]));
    }
  }
  result.per_module.emplace_back(example.program.steps.back().kind, result.answer);
  result.predicted = Argmax(tape.value(pass.answer()).values());
  if (grads != nullptr) tape.Backward(total, grads, scale);
  return result;
}

ExecutionTrace TraceExample(const ParameterRegistry &registry, const SceneExample &example,
                            const LossOptions &options) {
  Tape tape;
  const ForwardPass pass =
      Execute(tape, registry, example.program, example.features, example.embeddings);
  const Var answer_loss = AnswerLoss(tape, pass, example.gold, options.eps);
  const auto intermediate = IntermediateLosses(tape, pass, example.targets, options.eps);
  const Var total = TotalLoss(tape, answer_loss, intermediate, options);
  return MakeTrace(tape, example.program, pass, &intermediate, answer_loss, total);
}

}  // namespace nmn
