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

#include "curriculum/curriculum.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "util/error.h"
#include "util/random.h"

namespace nmn {

std::string_view LengthBucketName(LengthBucket bucket) {
  switch (bucket) {
    case LengthBucket::kShort: return "short";
    case LengthBucket::kMedium: return "medium";
    case LengthBucket::kLong: return "long";
  }
  return "?";
}

std::string DifficultyKey::ToString() const {
  std::string s = "objects=" + std::to_string(objects);
  if (bucket) s += "/" + std::string(LengthBucketName(*bucket));
  return s;
}

std::string_view WeightingName(Weighting w) {
  switch (w) {
    case Weighting::kUniform: return "uniform";
    case Weighting::kAnswer: return "answer";
    case Weighting::kLosses: return "losses";
  }
  return "?";
}

Weighting WeightingFromName(std::string_view name) {
  if (name == "uniform" || name == "u") return Weighting::kUniform;
  if (name == "answer" || name == "a") return Weighting::kAnswer;
  if (name == "losses" || name == "b") return Weighting::kLosses;
  Fail(ErrorCode::kConfig, "unknown weighting '" + std::string(name) +
                               "' (expected uniform, answer/a or losses/b)");
}

std::string_view IterationKindName(IterationKind kind) {
  switch (kind) {
    case IterationKind::kPretrain: return "pretrain";
    case IterationKind::kCurriculum: return "curriculum";
    case IterationKind::kBaseline: return "baseline";
  }
  return "?";
}

std::string PlanIteration::Label() const {
  switch (filter) {
    case PoolFilter::kDifficulty: return key ? key->ToString() : "objects=?";
    case PoolFilter::kBalanced: return "balanced";
    case PoolFilter::kAll: break;
  }
  if (kind == IterationKind::kPretrain) return "pretrain";
  return mode == SampleMode::kFullPass ? "full" : "random";
}

CurriculumPlan BuildPlan(const PlanConfig &config) {
  if (config.repeat < 1) Fail(ErrorCode::kConfig, "repeat must be >= 1");
  if (config.pretrain < 0) Fail(ErrorCode::kConfig, "pretrain must be >= 0");
  if (config.iterations < 0) Fail(ErrorCode::kConfig, "iterations must be >= 0");
  if (config.max_objects < 1) Fail(ErrorCode::kConfig, "max_objects must be >= 1");
  if (!(config.replay_fraction >= 0.0 && config.replay_fraction < 1.0)) {
    Fail(ErrorCode::kConfig, "replay_fraction must lie in [0, 1)");
  }
  const bool full_pass = config.strategy == "unbalanced" || config.strategy == "balanced";
  if (!full_pass && config.sample_size == 0) {
    Fail(ErrorCode::kConfig, "sample_size must be positive");
  }

  CurriculumPlan plan;
  if (config.strategy == "curriculum") {
    plan.pretrain_iterations = config.pretrain;
    for (int i = 0; i < config.pretrain; ++i) {
      PlanIteration it;
      it.kind = IterationKind::kPretrain;
      it.filter = PoolFilter::kAll;
      it.weighting = Weighting::kUniform;
      it.sample_size = config.sample_size;
      it.repeat_index = i;
      plan.iterations.push_back(it);
    }
    std::vector<DifficultyKey> levels;
    for (int objects = 1; objects <= config.max_objects; ++objects) {
      if (config.length_refinement) {
        for (auto b : {LengthBucket::kShort, LengthBucket::kMedium, LengthBucket::kLong}) {
          levels.push_back(DifficultyKey{objects, b});
        }
      } else {
        levels.push_back(DifficultyKey{objects, std::nullopt});
      }
    }
    bool first = true;
    for (const DifficultyKey &key : levels) {
      for (int r = 0; r < config.repeat; ++r) {
        PlanIteration it;
        it.kind = IterationKind::kCurriculum;
        it.filter = PoolFilter::kDifficulty;
        it.key = key;
        it.weighting = config.weighting;
        it.sample_size = config.sample_size;
        it.replay_fraction = first ? 0.0 : config.replay_fraction;
        it.repeat_index = r;
        plan.iterations.push_back(it);
        first = false;
      }
    }
  } else if (config.strategy == "random" || full_pass) {
    for (int i = 0; i < config.iterations; ++i) {
      PlanIteration it;
      it.kind = IterationKind::kBaseline;
      it.filter = config.strategy == "balanced" ? PoolFilter::kBalanced : PoolFilter::kAll;
      it.weighting = Weighting::kUniform;
      it.mode = full_pass ? SampleMode::kFullPass : SampleMode::kWithReplacement;
      it.sample_size = full_pass ? 0 : config.sample_size;
      it.repeat_index = i;
      plan.iterations.push_back(it);
    }
  } else {
    Fail(ErrorCode::kConfig, "unknown strategy '" + config.strategy +
                                 "' (expected curriculum, random, unbalanced or balanced)");
  }
  return plan;
}

size_t ScheduledCost(const CurriculumPlan &plan, size_t full_pass_size) {
  size_t total = 0;
  for (const PlanIteration &it : plan.iterations) {
    total += it.mode == SampleMode::kFullPass ? full_pass_size : it.sample_size;
  }
  return total;
}

LengthThresholds Terciles(std::vector<int> lengths) {
  if (lengths.empty()) return {};
  std::sort(lengths.begin(), lengths.end());
  const size_t n = lengths.size();
  const size_t first = (n + 2) / 3 - 1;        // ceil(n/3) - 1
  const size_t second = (2 * n + 2) / 3 - 1;   // ceil(2n/3) - 1
  return LengthThresholds{lengths[first], lengths[second]};
}

std::map<int, LengthThresholds> LengthBuckets(std::span<const PoolItem> pool) {
  std::map<int, std::vector<int>> by_objects;
  for (const PoolItem &item : pool) by_objects[item.objects].push_back(item.length);
  std::map<int, LengthThresholds> out;
  for (auto &[objects, lengths] : by_objects) out[objects] = Terciles(std::move(lengths));
  return out;
}

LengthBucket BucketOf(int length, const LengthThresholds &t) {
  if (length <= t.short_max) return LengthBucket::kShort;
  if (length <= t.medium_max) return LengthBucket::kMedium;
  return LengthBucket::kLong;
}

std::vector<PoolItem> FilterPool(std::span<const PoolItem> pool, const DifficultyKey &key,
                                 const std::map<int, LengthThresholds> &thresholds) {
  std::vector<PoolItem> out;
  for (const PoolItem &item : pool) {
    if (item.objects != key.objects) continue;
    if (key.bucket) {
      auto it = thresholds.find(item.objects);
      if (it == thresholds.end() || BucketOf(item.length, it->second) != *key.bucket) continue;
    }
    out.push_back(item);
  }
  return out;
}

std::vector<PoolItem> BalancedSubset(std::span<const PoolItem> pool, uint64_t seed) {
  std::map<size_t, std::vector<size_t>> by_answer;
  for (size_t i = 0; i < pool.size(); ++i) by_answer[pool[i].gold].push_back(i);
  if (by_answer.empty()) return {};
  std::vector<size_t> counts;
  for (const auto &[gold, members] : by_answer) counts.push_back(members.size());
  std::sort(counts.begin(), counts.end());
  const size_t cap = counts[(counts.size() - 1) / 2];
  Rng rng(seed);
  std::vector<size_t> keep;
  for (auto &[gold, members] : by_answer) {
    rng.Shuffle(members);
    const size_t n = std::min(cap, members.size());
    keep.insert(keep.end(), members.begin(), members.begin() + static_cast<long>(n));
  }
  std::sort(keep.begin(), keep.end());
  std::vector<PoolItem> out;
  out.reserve(keep.size());
  for (size_t i : keep) out.push_back(pool[i]);
  return out;
}

namespace {

std::vector<double> Normalize(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) Fail(ErrorCode::kNumerical, "sampling weights sum to zero");
  for (double &v : w) v /= total;
  return w;
}

}  // namespace

std::vector<double> UniformWeights(std::span<const PoolItem> pool) {
  return std::vector<double>(pool.size(), pool.empty() ? 0.0 : 1.0 / pool.size());
}

std::vector<double> AnswerWeights(std::span<const PoolItem> pool) {
  std::map<ModuleKind, size_t> counts;
  for (const PoolItem &item : pool) ++counts[item.answer_kind];
  std::vector<double> w;
  w.reserve(pool.size());
  for (const PoolItem &item : pool) w.push_back(1.0 / static_cast<double>(counts[item.answer_kind]));
  if (w.empty()) return w;
  return Normalize(std::move(w));
}

double RawLossWeight(std::span<const ModuleKind> modules,
                     const std::map<ModuleKind, double> &avg_module_loss) {
  double fallback = 0.0;
  for (const auto &[kind, loss] : avg_module_loss) fallback += loss;
  if (!avg_module_loss.empty()) fallback /= static_cast<double>(avg_module_loss.size());
  double total = 0.0;
  for (ModuleKind kind : modules) {
    auto it = avg_module_loss.find(kind);
    total += it == avg_module_loss.end() ? fallback : it->second;
  }
  return total;
}

std::vector<double> LossWeights(std::span<const PoolItem> pool,
                                const std::map<ModuleKind, double> &avg_module_loss) {
  if (avg_module_loss.empty()) return UniformWeights(pool);
  std::vector<double> w;
  w.reserve(pool.size());
  for (const PoolItem &item : pool) w.push_back(RawLossWeight(item.modules, avg_module_loss));
  if (w.empty()) return w;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0)) return UniformWeights(pool);
  return Normalize(std::move(w));
}

AliasTable::AliasTable(std::span<const double> weights) {
  const size_t n = weights.size();
  if (n == 0) Fail(ErrorCode::kData, "alias table over an empty pool");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) Fail(ErrorCode::kNumerical, "invalid sampling weight");
    total += w;
  }
  if (!(total > 0.0)) Fail(ErrorCode::kNumerical, "sampling weights sum to zero");
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<size_t> small, large;
  for (size_t i = 0; i < n; ++i) {
    scaled[i] = weights[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const size_t s = small.back();
    small.pop_back();
    const size_t l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (size_t i : large) prob_[i] = 1.0;
  for (size_t i : small) prob_[i] = 1.0;
}

size_t SampleRecord::replay_count() const {
  return static_cast<size_t>(std::count(replay.begin(), replay.end(), true));
}

SampleRecord DrawSample(std::span<const uint64_t> pool_ids, std::span<const double> weights,
                        size_t sample_size, double replay_fraction,
                        std::span<const uint64_t> seen, uint64_t seed) {
  if (pool_ids.empty()) Fail(ErrorCode::kData, "cannot sample from an empty pool");
  if (weights.size() != pool_ids.size()) {
    Fail(ErrorCode::kInvalidArgument, "weights and pool differ in size");
  }
  SampleRecord record;
  size_t replay = static_cast<size_t>(
      std::floor(replay_fraction * static_cast<double>(sample_size) + 1e-9));
  if (replay > 0 && seen.empty()) {
    record.replay_folded = true;
    replay = 0;
  }
  Rng rng(seed);
  const AliasTable table(weights);
  std::vector<std::pair<uint64_t, bool>> draws;
  draws.reserve(sample_size);
  for (size_t i = 0; i < replay; ++i) draws.emplace_back(seen[rng.Below(seen.size())], true);
  for (size_t i = replay; i < sample_size; ++i) draws.emplace_back(pool_ids[table.Draw(rng)], false);
  rng.Shuffle(draws);
  record.ids.reserve(draws.size());
  record.replay.reserve(draws.size());
  for (const auto &[id, from_replay] : draws) {
    record.ids.push_back(id);
    record.replay.push_back(from_replay);
  }
  return record;
}

SampleRecord FullPass(std::span<const uint64_t> pool_ids, uint64_t seed) {
  if (pool_ids.empty()) Fail(ErrorCode::kData, "cannot sample from an empty pool");
  SampleRecord record;
  record.ids.assign(pool_ids.begin(), pool_ids.end());
  Rng rng(seed);
  rng.Shuffle(record.ids);
  record.replay.assign(record.ids.size(), false);
  return record;
}

std::vector<uint64_t> DistinctIds(const SampleRecord &record) {
  std::vector<uint64_t> ids = record.ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

size_t DistinctExamples(std::span<const SampleRecord> records) {
  std::set<uint64_t> all;
  for (const SampleRecord &r : records) all.insert(r.ids.begin(), r.ids.end());
  return all.size();
}

void ModuleLossTracker::Update(std::span<const std::pair<ModuleKind, double>> losses) {
  std::map<ModuleKind, std::pair<double, size_t>> batch;
  for (const auto &[kind, loss] : losses) {
    auto &acc = batch[kind];
    acc.first += loss;
    ++acc.second;
  }
  for (const auto &[kind, acc] : batch) {
    const double mean = acc.first / static_cast<double>(acc.second);
    auto it = means_.find(kind);
    if (it == means_.end()) {
      means_[kind] = mean;
    } else {
      it->second = decay_ * it->second + (1.0 - decay_) * mean;
    }
  }
}

}  // namespace nmn
