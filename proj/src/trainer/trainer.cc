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

#include "trainer/trainer.h"

#include <cmath>
#include <cstdio>
#include <exception>
#include <set>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "util/error.h"
#include "util/random.h"

namespace nmn {

void TrainConfig::Check() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    Fail(ErrorCode::kConfig, "learning_rate must be positive");
  }
  if (batch_size < 1) Fail(ErrorCode::kConfig, "batch_size must be >= 1");
  if (threads < 1) Fail(ErrorCode::kConfig, "threads must be >= 1");
  if (eval_every < 1) Fail(ErrorCode::kConfig, "eval_every must be >= 1");
  if (loss.intermediate_weight < 0.0) Fail(ErrorCode::kConfig, "lambda must be >= 0");
}

namespace {

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Runs fn(worker, begin, end) over [0, n) split in contiguous chunks.
template <typename Fn>
void ParallelChunks(size_t n, size_t threads, Fn fn) {
  threads = std::max<size_t>(1, std::min(threads, n));
  if (threads == 1) {
    fn(0, 0, n);
    return;
  }
  const size_t chunk = (n + threads - 1) / threads;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        fn(t, std::min(n, t * chunk), std::min(n, (t + 1) * chunk));
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto &th : pool) th.join();
  for (auto &e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::string MetricsLog::ToCsv() const {
  std::string out = "iteration,difficulty_key,presentations,distinct,train_loss,eval_accuracy\n";
  for (const IterationMetrics &m : iterations) {
    out += std::to_string(m.iteration) + "," + m.difficulty_key + "," +
           std::to_string(m.presentations) + "," + std::to_string(m.distinct) + "," +
           Num(m.train_loss) + "," + (m.eval_accuracy ? Num(*m.eval_accuracy) : "") + "\n";
  }
  return out;
}

std::string MetricsLog::ToJson() const {
  nlohmann::ordered_json j;
  j["best_accuracy"] = best_accuracy ? nlohmann::ordered_json(*best_accuracy) : nullptr;
  j["best_iteration"] = best_iteration;
  j["presentations"] = iterations.empty() ? 0 : iterations.back().presentations;
  j["distinct"] = iterations.empty() ? 0 : iterations.back().distinct;
  j["final_accuracy"] = nullptr;
  if (!iterations.empty() && iterations.back().eval_accuracy) {
    j["final_accuracy"] = *iterations.back().eval_accuracy;
  }
  auto rows = nlohmann::ordered_json::array();
  for (const IterationMetrics &m : iterations) {
    nlohmann::ordered_json r;
    r["iteration"] = m.iteration;
    r["difficulty_key"] = m.difficulty_key;
    r["presentations"] = m.presentations;
    r["distinct"] = m.distinct;
    r["train_loss"] = m.train_loss;
    r["eval_accuracy"] = m.eval_accuracy ? nlohmann::ordered_json(*m.eval_accuracy) : nullptr;
    r["sample_size"] = m.sample_size;
    r["replay"] = m.replay;
    r["pool_size"] = m.pool_size;
    rows.push_back(r);
  }
  j["iterations"] = rows;
  j["warnings"] = warnings;
  return j.dump(2) + "\n";
}

void CheckCompatible(const ParameterRegistry &registry, const Dataset &dataset) {
  const Dims &a = registry.dims();
  const Dims &b = dataset.dims;
  if (!(a == b)) {
    auto str = [](const Dims &d) {
      return "d=" + std::to_string(d.features) + " k=" + std::to_string(d.objects) +
             " |A|=" + std::to_string(d.answers);
    };
    Fail(ErrorCode::kData, "model dimensions (" + str(a) + ") do not match dataset (" + str(b) + ")");
  }
}

double SgdStep(ParameterRegistry &registry, std::span<const SceneExample *const> batch,
               const TrainConfig &config,
               std::vector<std::pair<ModuleKind, double>> *module_losses) {
  if (batch.empty()) return 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const size_t workers = std::max<size_t>(1, std::min(config.threads, batch.size()));
  std::vector<Gradients> grads;
  grads.reserve(workers);
  for (size_t w = 0; w < workers; ++w) grads.push_back(registry.NewGradients());
  std::vector<ExampleLoss> losses(batch.size());
  ParallelChunks(batch.size(), workers, [&](size_t w, size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      losses[i] = RunExample(registry, *batch[i], config.loss, &grads[w], scale);
    }
  });
  for (size_t w = 1; w < workers; ++w) grads[0].Accumulate(grads[w]);
  registry.ApplyGradients(grads[0], config.learning_rate);
  double total = 0.0;
  for (const ExampleLoss &l : losses) {
    total += l.total;
    if (module_losses != nullptr) {
      module_losses->insert(module_losses->end(), l.per_module.begin(), l.per_module.end());
    }
  }
  return total * scale;
}

double Evaluate(const ParameterRegistry &registry, const Dataset &eval, size_t threads) {
  if (eval.examples.empty()) Fail(ErrorCode::kData, "evaluation set is empty");
  CheckCompatible(registry, eval);
  std::vector<size_t> correct(std::max<size_t>(1, threads), 0);
  ParallelChunks(eval.size(), threads, [&](size_t w, size_t begin, size_t end) {
    LossOptions options;
    for (size_t i = begin; i < end; ++i) {
      const SceneExample &ex = eval.examples[i];
      if (RunExample(registry, ex, options, nullptr).predicted == ex.gold) ++correct[w];
    }
  });
  size_t total = 0;
  for (size_t c : correct) total += c;
  return static_cast<double>(total) / static_cast<double>(eval.size());
}

TrainResult Train(const CurriculumPlan &plan, const Dataset &train, const Dataset *eval,
                  ParameterRegistry init, const TrainConfig &config, const ProgressFn &progress) {
  config.Check();
  CheckCompatible(init, train);
  if (eval != nullptr) CheckCompatible(init, *eval);

  std::vector<PoolItem> pool;
  std::unordered_map<uint64_t, const SceneExample *> by_id;
  pool.reserve(train.size());
  for (const SceneExample &ex : train.examples) {
    if (!by_id.emplace(ex.id, &ex).second) {
      Fail(ErrorCode::kData, "duplicate example id " + std::to_string(ex.id));
    }
    PoolItem item;
    item.id = ex.id;
    item.objects = ex.metadata.objects;
    item.length = ex.metadata.length;
    item.answer_kind = ex.metadata.answer_kind;
    for (const ModuleCall &call : ex.program.steps) item.modules.push_back(call.kind);
    item.gold = ex.gold;
    pool.push_back(std::move(item));
  }
  const auto thresholds = LengthBuckets(pool);

  TrainResult result;
  result.final = std::move(init);
  result.best = result.final;
  ModuleLossTracker tracker;
  std::vector<uint64_t> previous_seen;
  std::set<uint64_t> distinct;
  size_t presentations = 0;
  int executed = 0;

  for (size_t it = 0; it < plan.iterations.size(); ++it) {
    const PlanIteration &step = plan.iterations[it];
    std::vector<PoolItem> filtered;
    switch (step.filter) {
      case PoolFilter::kAll: filtered = pool; break;
      case PoolFilter::kDifficulty:
        filtered = FilterPool(pool, step.key.value_or(DifficultyKey{}), thresholds);
        break;
      case PoolFilter::kBalanced: filtered = BalancedSubset(pool, DeriveSeed(config.seed, 77)); break;
    }
    if (filtered.empty()) {
      result.log.warnings.push_back("iteration " + std::to_string(it + 1) + " (" + step.Label() +
                                    "): empty pool, skipped");
      continue;
    }
    std::vector<uint64_t> ids;
    ids.reserve(filtered.size());
    for (const PoolItem &p : filtered) ids.push_back(p.id);

    const uint64_t sample_seed = DeriveSeed(config.seed, 1000 + it);
    SampleRecord record;
    if (step.mode == SampleMode::kFullPass) {
      record = FullPass(ids, sample_seed);
    } else {
      std::vector<double> weights;
      switch (step.weighting) {
        case Weighting::kUniform: weights = UniformWeights(filtered); break;
        case Weighting::kAnswer: weights = AnswerWeights(filtered); break;
        case Weighting::kLosses: weights = LossWeights(filtered, tracker.means()); break;
      }
      record = DrawSample(ids, weights, step.sample_size, step.replay_fraction, previous_seen,
                          sample_seed);
    }

    double loss_sum = 0.0;
    std::vector<const SceneExample *> batch;
    std::vector<std::pair<ModuleKind, double>> module_losses;
    for (size_t start = 0; start < record.ids.size(); start += config.batch_size) {
      const size_t end = std::min(record.ids.size(), start + config.batch_size);
      batch.clear();
      for (size_t i = start; i < end; ++i) batch.push_back(by_id.at(record.ids[i]));
      module_losses.clear();
      loss_sum += SgdStep(result.final, batch, config, &module_losses) *
                  static_cast<double>(batch.size());
      tracker.Update(module_losses);
    }

    ++executed;
    presentations += record.ids.size();
    distinct.insert(record.ids.begin(), record.ids.end());
    previous_seen = DistinctIds(record);

    IterationMetrics m;
    m.iteration = executed;
    m.difficulty_key = step.Label();
    m.presentations = presentations;
    m.distinct = distinct.size();
    m.train_loss = loss_sum / static_cast<double>(record.ids.size());
    m.sample_size = record.ids.size();
    m.replay = record.replay_count();
    m.pool_size = filtered.size();
    const bool last = it + 1 == plan.iterations.size();
    if (eval != nullptr && (executed % config.eval_every == 0 || last)) {
      m.eval_accuracy = Evaluate(result.final, *eval, config.threads);
      if (!result.log.best_accuracy || *m.eval_accuracy > *result.log.best_accuracy) {
        result.log.best_accuracy = m.eval_accuracy;
        result.log.best_iteration = executed;
        result.best = result.final;
      }
    }
    result.log.iterations.push_back(m);
    if (progress) progress(m);
  }
  if (!result.log.best_accuracy) result.best = result.final;
  return result;
}

}  // namespace nmn
