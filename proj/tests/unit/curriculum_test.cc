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

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "curriculum/curriculum.h"
#include "doctest.h"
#include "util/error.h"
#include "util/random.h"

using namespace nmn;
using K = ModuleKind;

namespace {

PoolItem Item(uint64_t id, int objects, int length, K answer, size_t gold = 0) {
  PoolItem p;
  p.id = id;
  p.objects = objects;
  p.length = length;
  p.answer_kind = answer;
  p.modules = {K::kSelect, answer};
  p.gold = gold;
  return p;
}

std::vector<uint64_t> Ids(const std::vector<PoolItem> &pool) {
  std::vector<uint64_t> ids;
  for (const PoolItem &p : pool) ids.push_back(p.id);
  return ids;
}

// Empirical frequency of each pool index over n weighted draws.
std::vector<double> Frequencies(const std::vector<double> &weights, size_t n, uint64_t seed) {
  std::vector<uint64_t> ids(weights.size());
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  const SampleRecord r = DrawSample(ids, weights, n, 0.0, {}, seed);
  std::vector<double> f(weights.size(), 0.0);
  for (uint64_t id : r.ids) f[id] += 1.0 / static_cast<double>(n);
  return f;
}

bool NonDecreasing(const CurriculumPlan &plan) {
  std::optional<DifficultyKey> last;
  for (const PlanIteration &it : plan.iterations) {
    if (it.kind != IterationKind::kCurriculum) continue;
    if (last && *it.key < *last) return false;
    last = it.key;
  }
  return true;
}

}  // namespace

TEST_CASE("plan shapes for the table configurations") {
  PlanConfig cl;
  const CurriculumPlan plain = BuildPlan(cl);
  CHECK(plain.iterations.size() == 4);
  CHECK(plain.pretrain_iterations == 0);
  CHECK(ScheduledCost(plain) == 4 * 4000);
  CHECK(plain.iterations[0].replay_fraction == 0.0);
  CHECK(plain.iterations[1].replay_fraction == 0.2);
  for (int i = 0; i < 4; ++i) CHECK(plain.iterations[i].key->objects == i + 1);

  PlanConfig full;
  full.weighting = Weighting::kAnswer;
  full.pretrain = 2;
  full.repeat = 2;
  const CurriculumPlan p = BuildPlan(full);
  CHECK(p.pretrain_iterations == 2);
  REQUIRE(p.iterations.size() == 10);
  CHECK(ScheduledCost(p) == 10 * 4000);
  CHECK(p.iterations[0].kind == IterationKind::kPretrain);
  CHECK(p.iterations[1].kind == IterationKind::kPretrain);
  CHECK(p.iterations[0].replay_fraction == 0.0);
  CHECK(p.iterations[1].replay_fraction == 0.0);
  CHECK(p.iterations[2].replay_fraction == 0.0);
  CHECK(p.iterations[2].key->objects == 1);
  CHECK(p.iterations[3].key->objects == 1);
  CHECK(p.iterations[3].repeat_index == 1);
  CHECK(p.iterations[9].key->objects == 4);
  CHECK(p.iterations[5].weighting == Weighting::kAnswer);
  CHECK(NonDecreasing(p));

  PlanConfig lengths;
  lengths.length_refinement = true;
  const CurriculumPlan l = BuildPlan(lengths);
  REQUIRE(l.iterations.size() == 12);
  CHECK(*l.iterations[0].key->bucket == LengthBucket::kShort);
  CHECK(*l.iterations[1].key->bucket == LengthBucket::kMedium);
  CHECK(*l.iterations[2].key->bucket == LengthBucket::kLong);
  CHECK(l.iterations[3].key->objects == 2);
  CHECK(NonDecreasing(l));
  for (const PlanIteration &it : plain.iterations) CHECK_FALSE(it.key->bucket.has_value());

  PlanConfig random;
  random.strategy = "random";
  const CurriculumPlan r = BuildPlan(random);
  CHECK(r.iterations.size() == 12);
  CHECK(r.iterations[0].kind == IterationKind::kBaseline);
  CHECK(ScheduledCost(r) == 12 * 4000);

  PlanConfig unbalanced;
  unbalanced.strategy = "unbalanced";
  const CurriculumPlan u = BuildPlan(unbalanced);
  CHECK(u.iterations[0].mode == SampleMode::kFullPass);
  CHECK(ScheduledCost(u, 1000) == 12 * 1000);
}

TEST_CASE("plan configuration errors") {
  PlanConfig bad;
  bad.repeat = 0;
  CHECK_THROWS_AS(BuildPlan(bad), Error);
  PlanConfig unknown;
  unknown.strategy = "annealing";
  CHECK_THROWS_AS(BuildPlan(unknown), Error);
  CHECK_THROWS_AS(WeightingFromName("entropy"), Error);
  CHECK(WeightingFromName("a") == Weighting::kAnswer);
  CHECK(WeightingFromName("b") == Weighting::kLosses);
  CHECK(WeightingFromName("uniform") == Weighting::kUniform);
}

TEST_CASE("tercile thresholds") {
  const LengthThresholds t = Terciles({2, 3, 4, 5, 6, 7});
  CHECK(t.short_max == 3);
  CHECK(t.medium_max == 5);
  CHECK(BucketOf(2, t) == LengthBucket::kShort);
  CHECK(BucketOf(3, t) == LengthBucket::kShort);
  CHECK(BucketOf(4, t) == LengthBucket::kMedium);
  CHECK(BucketOf(6, t) == LengthBucket::kLong);

  const LengthThresholds flat = Terciles({4, 4, 4, 4});
  CHECK(BucketOf(4, flat) == LengthBucket::kShort);

  std::vector<PoolItem> pool;
  for (int len = 2; len <= 7; ++len) pool.push_back(Item(len, 1, len, K::kQueryName));
  for (int i = 0; i < 4; ++i) pool.push_back(Item(100 + i, 2, 5, K::kQueryName));
  const auto thresholds = LengthBuckets(pool);
  CHECK(thresholds.at(1) == t);
  const auto medium = FilterPool(pool, DifficultyKey{1, LengthBucket::kMedium}, thresholds);
  CHECK(Ids(medium) == std::vector<uint64_t>{4, 5});
  CHECK(FilterPool(pool, DifficultyKey{2, LengthBucket::kLong}, thresholds).empty());
  CHECK(FilterPool(pool, DifficultyKey{2, std::nullopt}, thresholds).size() == 4);
}

TEST_CASE("answer weights equalize answer kinds") {
  std::vector<PoolItem> pool;
  uint64_t id = 0;
  for (int i = 0; i < 800; ++i) pool.push_back(Item(id++, 1, 2, K::kQueryName));
  for (int i = 0; i < 100; ++i) pool.push_back(Item(id++, 1, 3, K::kAnswerLogic));
  for (int i = 0; i < 100; ++i) pool.push_back(Item(id++, 1, 2, K::kChooseAttr));
  const auto w = AnswerWeights(pool);
  const auto f = Frequencies(w, 100000, 17);
  std::map<K, double> share;
  for (size_t i = 0; i < pool.size(); ++i) share[pool[i].answer_kind] += f[i];
  for (const auto &[kind, s] : share) CHECK(std::abs(s - 1.0 / 3.0) < 0.02);

  std::vector<PoolItem> single(pool.begin(), pool.begin() + 10);
  for (double v : AnswerWeights(single)) CHECK(v == doctest::Approx(0.1));
  std::vector<PoolItem> halves = {Item(0, 1, 2, K::kQueryName), Item(1, 1, 2, K::kExist)};
  const auto hw = AnswerWeights(halves);
  CHECK(hw[0] == doctest::Approx(0.5));
  CHECK(hw[1] == doctest::Approx(0.5));
}

TEST_CASE("loss weights sum module losses") {
  const std::map<K, double> avg = {{K::kSelect, 0.2}, {K::kQueryName, 0.4}};
  const std::vector<K> program = {K::kSelect, K::kQueryName};
  CHECK(RawLossWeight(program, avg) == doctest::Approx(0.6));
  // Unseen kinds contribute the mean over seen ones.
  const std::vector<K> with_unseen = {K::kSelect, K::kExist};
  CHECK(RawLossWeight(with_unseen, avg) == doctest::Approx(0.5));

  std::vector<PoolItem> pool = {Item(0, 1, 2, K::kQueryName), Item(1, 1, 2, K::kQueryName)};
  pool[1].modules = {K::kSelect, K::kSelect, K::kFusion, K::kQueryName};
  for (double v : LossWeights(pool, {})) CHECK(v == doctest::Approx(0.5));
  const std::map<K, double> equal = {{K::kSelect, 1.0}, {K::kQueryName, 1.0}, {K::kFusion, 1.0}};
  const auto lw = LossWeights(pool, equal);
  CHECK(lw[0] == doctest::Approx(2.0 / 6.0));
  CHECK(lw[1] == doctest::Approx(4.0 / 6.0));

  const std::map<K, double> skewed = {{K::kSelect, 0.1}, {K::kQueryName, 2.0}, {K::kFusion, 0.1}};
  std::vector<PoolItem> many;
  for (uint64_t i = 0; i < 20; ++i) {
    many.push_back(Item(i, 1, 2, K::kQueryName));
    if (i % 2 == 1) many.back().modules = {K::kSelect, K::kFusion, K::kSelect};
  }
  const auto w = LossWeights(many, skewed);
  const auto f = Frequencies(w, 100000, 3);
  for (size_t i = 0; i < w.size(); ++i) CHECK(std::abs(f[i] - w[i]) < 0.02);
  CHECK(w[0] > w[1]);
}

TEST_CASE("weighted draws follow their weights") {
  const std::vector<double> w = {0.5, 0.25, 0.125, 0.0625, 0.0625, 0.0};
  const auto f = Frequencies(w, 100000, 23);
  for (size_t i = 0; i < w.size(); ++i) CHECK(std::abs(f[i] - w[i]) < 0.02);
  CHECK(f[5] == 0.0);
  AliasTable table(w);
  CHECK(table.size() == w.size());
}

TEST_CASE("replay takes exactly floor(fraction * S) draws from the seen set") {
  std::vector<uint64_t> pool(500), seen = {9001, 9002, 9003};
  for (size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  const std::vector<double> w(pool.size(), 1.0 / pool.size());
  const SampleRecord r = DrawSample(pool, w, 1000, 0.2, seen, 8);
  CHECK(r.ids.size() == 1000);
  CHECK(r.replay_count() == 200);
  for (size_t i = 0; i < r.ids.size(); ++i) {
    const bool from_seen = r.ids[i] >= 9000;
    CHECK(from_seen == r.replay[i]);
  }
  CHECK(DrawSample(pool, w, 1001, 0.2, seen, 8).replay_count() == 200);
  CHECK(DrawSample(pool, w, 1000, 0.0, seen, 8).replay_count() == 0);

  const SampleRecord folded = DrawSample(pool, w, 100, 0.2, {}, 8);
  CHECK(folded.replay_folded);
  CHECK(folded.replay_count() == 0);
  CHECK(folded.ids.size() == 100);

  CHECK(DrawSample(pool, w, 1000, 0.2, seen, 8).ids == r.ids);
  CHECK_FALSE(DrawSample(pool, w, 1000, 0.2, seen, 9).ids == r.ids);
  CHECK_THROWS_AS(DrawSample({}, {}, 10, 0.0, seen, 1), Error);
}

TEST_CASE("sampling with replacement sees fewer distinct examples than draws") {
  std::vector<uint64_t> pool(4000);
  for (size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  const std::vector<double> w(pool.size(), 1.0 / pool.size());
  const SampleRecord r = DrawSample(pool, w, 4000, 0.0, {}, 1);
  const size_t distinct = DistinctIds(r).size();
  CHECK(distinct < 4000);
  // Expected 4000 * (1 - (1 - 1/4000)^4000) ~ 2529.
  CHECK(distinct > 2450);
  CHECK(distinct < 2610);
  const SampleRecord again = DrawSample(pool, w, 4000, 0.0, {}, 1);
  const SampleRecord records[] = {r, again};
  CHECK(DistinctExamples(records) == distinct);

  const SampleRecord pass = FullPass(pool, 5);
  CHECK(DistinctIds(pass).size() == 4000);
  CHECK(pass.ids.size() == 4000);
  CHECK_FALSE(pass.ids == pool);
}

TEST_CASE("balanced subset caps answers at the median count") {
  std::vector<PoolItem> pool;
  uint64_t id = 0;
  // Per-answer counts 10, 4, 2: median 4.
  for (int i = 0; i < 10; ++i) pool.push_back(Item(id++, 1, 2, K::kQueryName, 0));
  for (int i = 0; i < 4; ++i) pool.push_back(Item(id++, 1, 2, K::kQueryName, 1));
  for (int i = 0; i < 2; ++i) pool.push_back(Item(id++, 1, 2, K::kQueryName, 2));
  const auto subset = BalancedSubset(pool, 3);
  std::map<size_t, int> counts;
  for (const PoolItem &p : subset) counts[p.gold]++;
  CHECK(counts[0] == 4);
  CHECK(counts[1] == 4);
  CHECK(counts[2] == 2);
  CHECK(Ids(BalancedSubset(pool, 3)) == Ids(subset));
}

TEST_CASE("module loss tracker keeps an exponential running mean") {
  ModuleLossTracker tracker(0.5);
  const std::vector<std::pair<K, double>> first = {{K::kSelect, 1.0}, {K::kSelect, 3.0}};
  tracker.Update(first);
  CHECK(tracker.means().at(K::kSelect) == doctest::Approx(2.0));
  const std::vector<std::pair<K, double>> second = {{K::kSelect, 4.0}, {K::kExist, 1.0}};
  tracker.Update(second);
  CHECK(tracker.means().at(K::kSelect) == doctest::Approx(3.0));
  CHECK(tracker.means().at(K::kExist) == doctest::Approx(1.0));
}
