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

#ifndef NMN_CURRICULUM_CURRICULUM_H_
#define NMN_CURRICULUM_CURRICULUM_H_

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "program/module_kind.h"

namespace nmn {

enum class LengthBucket { kShort, kMedium, kLong };
std::string_view LengthBucketName(LengthBucket bucket);

// Difficulty stratum. The bucket is set iff the length refinement is on.
struct DifficultyKey {
  int objects = 1;
  std::optional<LengthBucket> bucket;

  auto operator<=>(const DifficultyKey &other) const = default;
  std::string ToString() const;
};

enum class Weighting { kUniform, kAnswer, kLosses };
std::string_view WeightingName(Weighting w);
// Accepts "uniform", "answer"/"a", "losses"/"b".
Weighting WeightingFromName(std::string_view name);

enum class IterationKind { kPretrain, kCurriculum, kBaseline };
std::string_view IterationKindName(IterationKind kind);

// Which examples an iteration samples from.
enum class PoolFilter { kAll, kDifficulty, kBalanced };

enum class SampleMode {
  kWithReplacement,  // sample_size weighted draws
  kFullPass,         // every pool example once, shuffled
};

struct PlanIteration {
  IterationKind kind = IterationKind::kCurriculum;
  PoolFilter filter = PoolFilter::kAll;
  std::optional<DifficultyKey> key;
  Weighting weighting = Weighting::kUniform;
  SampleMode mode = SampleMode::kWithReplacement;
  size_t sample_size = 0;  // unused for kFullPass
  double replay_fraction = 0.0;
  int repeat_index = 0;

  // "pretrain", "objects=2", "objects=3/long", "random", ...
  std::string Label() const;
};

struct CurriculumPlan {
  std::vector<PlanIteration> iterations;
  int pretrain_iterations = 0;
};

struct PlanConfig {
  // "curriculum", "random", "unbalanced" or "balanced".
  std::string strategy = "curriculum";
  bool length_refinement = false;  // L
  Weighting weighting = Weighting::kUniform;  // W
  size_t sample_size = 4000;  // S
  int pretrain = 0;  // P
  int repeat = 1;  // R
  double replay_fraction = 0.2;
  int iterations = 12;  // baselines only
  int max_objects = 4;
};

// P pretrain iterations, then (levels x R) curriculum iterations in
// non-decreasing difficulty. Levels are object counts 1..max_objects, each
// split short -> medium -> long when the length refinement is on.
CurriculumPlan BuildPlan(const PlanConfig &config);

// Presentations the plan schedules. Full-pass iterations count full_pass_size
// each.
size_t ScheduledCost(const CurriculumPlan &plan, size_t full_pass_size = 0);

// What the sampler needs to know about one example.
struct PoolItem {
  uint64_t id = 0;
  int objects = 1;
  int length = 1;
  ModuleKind answer_kind = ModuleKind::kAnswerLogic;
  std::vector<ModuleKind> modules;
  size_t gold = 0;
};

// A length is short when <= short_max, medium when <= medium_max, long otherwise.
struct LengthThresholds {
  int short_max = 0;
  int medium_max = 0;

  bool operator==(const LengthThresholds &other) const = default;
};

// Terciles of program length computed separately for each object count.
std::map<int, LengthThresholds> LengthBuckets(std::span<const PoolItem> pool);
LengthThresholds Terciles(std::vector<int> lengths);
LengthBucket BucketOf(int length, const LengthThresholds &thresholds);

// Items of pool matching the key (bucket thresholds from the full pool).
std::vector<PoolItem> FilterPool(std::span<const PoolItem> pool, const DifficultyKey &key,
                                 const std::map<int, LengthThresholds> &thresholds);

// Answer-balanced subset: each gold answer keeps at most the median
// per-answer count of examples, chosen deterministically from seed.
std::vector<PoolItem> BalancedSubset(std::span<const PoolItem> pool, uint64_t seed);

// Normalized sampling weights.
std::vector<double> UniformWeights(std::span<const PoolItem> pool);
// weight(e) proportional to 1 / count(answer kind of e in pool).
std::vector<double> AnswerWeights(std::span<const PoolItem> pool);
// weight(e) proportional to the sum of running mean losses of its modules;
// kinds without history contribute the mean over kinds with history.
// Uniform when there is no history at all.
std::vector<double> LossWeights(std::span<const PoolItem> pool,
                                const std::map<ModuleKind, double> &avg_module_loss);
// Un-normalized W.b weight of one program.
double RawLossWeight(std::span<const ModuleKind> modules,
                     const std::map<ModuleKind, double> &avg_module_loss);

// Walker/Vose alias table: O(1) weighted draws with replacement.
class AliasTable {
 public:
  explicit AliasTable(std::span<const double> weights);
  size_t size() const { return prob_.size(); }
  template <typename Gen>
  size_t Draw(Gen &rng) const {
    const size_t i = rng.Below(prob_.size());
    return rng.Uniform() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<size_t> alias_;
};

struct SampleRecord {
  std::vector<uint64_t> ids;
  std::vector<bool> replay;  // provenance per draw
  bool replay_folded = false;  // replay requested but no seen set

  size_t replay_count() const;
};

// floor(replay_fraction * S) uniform draws from seen, the rest weighted draws
// from pool_ids, all with replacement, then shuffled. Deterministic in seed.
SampleRecord DrawSample(std::span<const uint64_t> pool_ids, std::span<const double> weights,
                        size_t sample_size, double replay_fraction,
                        std::span<const uint64_t> seen, uint64_t seed);

// Every pool id once, shuffled.
SampleRecord FullPass(std::span<const uint64_t> pool_ids, uint64_t seed);

// Sorted distinct ids drawn in a record.
std::vector<uint64_t> DistinctIds(const SampleRecord &record);
size_t DistinctExamples(std::span<const SampleRecord> records);

// Per-kind exponential running mean of module losses.
class ModuleLossTracker {
 public:
  explicit ModuleLossTracker(double decay = 0.99) : decay_(decay) {}

  // Losses of one batch; each kind's batch mean updates its running mean.
  void Update(std::span<const std::pair<ModuleKind, double>> losses);
  const std::map<ModuleKind, double> &means() const { return means_; }

 private:
  double decay_;
  std::map<ModuleKind, double> means_;
};

}  // namespace nmn

#endif  // NMN_CURRICULUM_CURRICULUM_H_
