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

// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "curriculum/curriculum.h"
#include "gradcheck/gradcheck.h"
#include "program/program.h"
#include "support/fixtures.h"
#include "support/hand_scenes.h"
#include "synth/generator.h"
#include "synth/oracle.h"
#include "trainer/trainer.h"
#include "util/error.h"

using namespace nmn;
using namespace nmn::testing;
using K = ModuleKind;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char *format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Criterion 1.
Outcome GradientSuite() {
  const auto start = Clock::now();
  const GradCheckReport report = RunGradCheck({1, 2, 3, 4, 5});
  const double elapsed = Seconds(start);
  double worst = 0.0;
  size_t failed = 0;
  for (const GradCheckCase &c : report.cases) {
    worst = std::max(worst, c.max_error);
    if (!c.passed) ++failed;
  }
  const size_t expected = 5 * (kNumModuleKinds + GradCheckProgramNames().size());
  const bool pass = report.passed && failed == 0 && report.cases.size() == expected &&
                    GradCheckProgramNames().size() == 5 && elapsed < 60.0;
  return {pass, Fmt("%zu cases, %zu failed, max rel err %.2e, %.1f s", report.cases.size(),
                    failed, worst, elapsed)};
}

// Criterion 2.
Outcome Identities() {
  const Dims dims{10, 6, 9};
  size_t checks = 0, bad = 0;
  auto expect = [&](bool ok) {
    ++checks;
    if (!ok) ++bad;
  };
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    const ParameterRegistry reg = PerturbedRegistry(dims, seed);
    for (size_t r = 0; r < kNumLayerRoles; ++r) {
      const auto role = static_cast<LayerRole>(r);
      expect(reg.LayerFor(K::kSame, role) == reg.LayerFor(K::kDifferent, role));
      expect(reg.LayerFor(K::kSameAll, role) == reg.LayerFor(K::kDifferentAll, role));
    }
    Rng rng(seed);
    for (int trial = 0; trial < 100; ++trial) {
      const double b = rng.Uniform();
      ModuleInputs in = RandomInputs(K::kAnd, dims, rng);
      in.deps = {{b}, {1.0}};
      expect(near(RunModule(reg, K::kAnd, in)[0], b));
      in.deps = {{b}, {0.0}};
      expect(near(RunModule(reg, K::kOr, in)[0], b));
      in.deps = {{0.5}, {0.5}};
      expect(near(RunModule(reg, K::kOr, in)[0], 0.75));

      const ModuleInputs pair = RandomInputs(K::kSame, dims, rng);
      expect(near(RunModule(reg, K::kDifferent, pair)[0], 1.0 - RunModule(reg, K::kSame, pair)[0]));
      const ModuleInputs group = RandomInputs(K::kSameAll, dims, rng);
      expect(near(RunModule(reg, K::kDifferentAll, group)[0],
                  1.0 - RunModule(reg, K::kSameAll, group)[0]));

      ModuleInputs fa = RandomInputs(K::kFusion, dims, rng);
      fa.deps[1] = fa.deps[0];
      const auto fused = RunModule(reg, K::kFusion, fa);
      for (size_t i = 0; i < fused.size(); ++i) expect(near(fused[i], fa.deps[0][i]));

      ModuleInputs logic = RandomInputs(K::kAnswerLogic, dims, rng);
      double total = 0.0;
      for (double v : RunModule(reg, K::kAnswerLogic, logic)) total += v;
      expect(near(total, 1.0));

      for (K kind : {K::kFusion, K::kAnd, K::kOr, K::kCommon}) {
        ModuleInputs s = RandomInputs(kind, dims, rng);
        const auto forward = RunModule(reg, kind, s);
        std::swap(s.deps[0], s.deps[1]);
        const auto swapped = RunModule(reg, kind, s);
        for (size_t i = 0; i < forward.size(); ++i) expect(near(forward[i], swapped[i]));
      }
    }
  }
  return {bad == 0, Fmt("%zu checks, %zu violations", checks, bad)};
}

bool SoftmaxOutput(const ModuleInfo &info) {
  return info.output == ValueType::kAnswer || info.kind == K::kSelect ||
         info.kind == K::kRelateSub || info.kind == K::kRelateObj || info.kind == K::kRelateAttr;
}

// Criterion 3.
Outcome Normalization() {
  const Dims dims{10, 6, 9};
  size_t inputs = 0, bad = 0;
  double worst = 0.0;
  for (const ModuleInfo &info : AllModules()) {
    const ParameterRegistry reg = PerturbedRegistry(dims, 40 + static_cast<uint64_t>(info.kind));
    Rng rng(7 + static_cast<uint64_t>(info.kind));
    for (int trial = 0; trial < 1000; ++trial, ++inputs) {
      const auto o = RunModule(reg, info.kind, RandomInputs(info.kind, dims, rng));
      bool ok = true;
      for (double v : o) ok = ok && std::isfinite(v) && v >= 0.0 && v <= 1.0;
      if (info.output == ValueType::kBoolean) ok = ok && o.size() == 1;
      if (info.output == ValueType::kAttention) ok = ok && o.size() == dims.objects;
      if (SoftmaxOutput(info)) {
        double total = 0.0;
        for (double v : o) total += v;
        worst = std::max(worst, std::abs(total - 1.0));
        ok = ok && std::abs(total - 1.0) < 1e-9;
      }
      if (!ok) ++bad;
    }
  }
  return {bad == 0, Fmt("%zu module evaluations, %zu violations, max |sum-1| %.1e", inputs, bad,
                        worst)};
}

// Criterion 4.
Outcome OracleEquivalence() {
  const Vocabulary vocab = Vocabulary::Default();
  std::set<K> covered;
  std::set<int> scenes;
  size_t mismatches = 0;
  for (const HandCase &c : HandCases()) {
    try {
      const Program p = ParseProgram(c.program);
      const OracleResult r = OracleExecute(p, HandScene(c.scene), vocab);
      std::map<int, std::vector<double>> got;
      for (const auto &[step, t] : r.targets) got[step] = t.values;
      if (r.answer != c.answer || got != c.targets) ++mismatches;
      for (const ModuleCall &call : p.steps) covered.insert(call.kind);
      scenes.insert(c.scene);
    } catch (const Error &) {
      ++mismatches;
    }
  }
  const bool pass = mismatches == 0 && covered.size() == kNumModuleKinds && scenes.size() == 3;
  return {pass, Fmt("%zu programs on %zu scenes, %zu/%zu kinds, %zu mismatches",
                    HandCases().size(), scenes.size(), covered.size(), kNumModuleKinds, mismatches)};
}

PoolItem Item(uint64_t id, K answer) {
  PoolItem p;
  p.id = id;
  p.answer_kind = answer;
  p.modules = {K::kSelect, answer};
  return p;
}

std::vector<uint64_t> Ids(const std::vector<PoolItem> &pool) {
  std::vector<uint64_t> ids;
  for (const PoolItem &p : pool) ids.push_back(p.id);
  return ids;
}

// Criterion 5.
Outcome SamplerStatistics() {
  constexpr size_t kDraws = 100000;
  std::vector<PoolItem> pool;
  uint64_t id = 0;
  for (int i = 0; i < 800; ++i) pool.push_back(Item(id++, K::kQueryName));
  for (int i = 0; i < 100; ++i) pool.push_back(Item(id++, K::kAnswerLogic));
  for (int i = 0; i < 100; ++i) pool.push_back(Item(id++, K::kChooseAttr));
  const SampleRecord wa = DrawSample(Ids(pool), AnswerWeights(pool), kDraws, 0.0, {}, 11);
  std::map<K, double> share;
  for (uint64_t d : wa.ids) share[pool[d].answer_kind] += 1.0 / kDraws;
  double wa_dev = 0.0;
  for (const auto &[kind, s] : share) wa_dev = std::max(wa_dev, std::abs(s - 1.0 / 3.0));

  // Two consecutive iterations over disjoint pools: replay flags must match
  // membership in the first iteration's distinct ids.
  constexpr size_t kS = 4000;
  std::vector<uint64_t> first_pool(3000), second_pool(3000);
  for (size_t i = 0; i < 3000; ++i) {
    first_pool[i] = i;
    second_pool[i] = 100000 + i;
  }
  const std::vector<double> flat(3000, 1.0 / 3000);
  const SampleRecord first = DrawSample(first_pool, flat, kS, 0.2, {}, 21);
  const std::vector<uint64_t> seen = DistinctIds(first);
  const std::set<uint64_t> seen_set(seen.begin(), seen.end());
  const SampleRecord second = DrawSample(second_pool, flat, kS, 0.2, seen, 22);
  bool provenance = second.ids.size() == kS;
  for (size_t i = 0; i < second.ids.size(); ++i) {
    provenance = provenance && (seen_set.count(second.ids[i]) == 1) == bool(second.replay[i]);
  }
  const size_t expected_replay = static_cast<size_t>(std::floor(0.2 * kS));

  // W.b on a pool with distinct module mixes.
  const std::map<K, double> avg = {{K::kSelect, 0.3}, {K::kQueryName, 1.2}, {K::kFusion, 0.1},
                                   {K::kExist, 0.6}, {K::kAnswerLogic, 0.2}};
  std::vector<PoolItem> mixed;
  for (uint64_t i = 0; i < 24; ++i) {
    PoolItem p = Item(i, i % 3 == 0 ? K::kQueryName : K::kAnswerLogic);
    if (i % 3 == 1) p.modules = {K::kSelect, K::kExist, K::kAnswerLogic};
    if (i % 3 == 2) p.modules = {K::kSelect, K::kSelect, K::kFusion, K::kExist, K::kAnswerLogic};
    if (i % 4 == 0) p.modules.push_back(K::kOr);  // unseen kind
    mixed.push_back(p);
  }
  const std::vector<double> wb = LossWeights(mixed, avg);
  double wb_total = 0.0;
  for (double w : wb) wb_total += w;
  const SampleRecord wbr = DrawSample(Ids(mixed), wb, kDraws, 0.0, {}, 31);
  std::vector<double> freq(mixed.size(), 0.0);
  for (uint64_t d : wbr.ids) freq[d] += 1.0 / kDraws;
  double wb_dev = 0.0;
  for (size_t i = 0; i < wb.size(); ++i) wb_dev = std::max(wb_dev, std::abs(freq[i] - wb[i] / wb_total));

  const bool pass = wa_dev < 0.02 && share.size() == 3 && second.replay_count() == expected_replay &&
                    provenance && wb_dev < 0.02;
  return {pass, Fmt("W.a max dev %.4f; replay %zu/%zu from seen=%s; W.b max dev %.4f", wa_dev,
                    second.replay_count(), expected_replay, provenance ? "yes" : "no", wb_dev)};
}

PlanConfig FullConfig(size_t sample) {
  PlanConfig p;
  p.strategy = "curriculum";
  p.weighting = Weighting::kAnswer;
  p.pretrain = 2;
  p.repeat = 2;
  p.sample_size = sample;
  return p;
}

// Criterion 6.
Outcome CostAccounting() {
  constexpr size_t kS = 4000;
  const size_t full = ScheduledCost(BuildPlan(FullConfig(kS)));
  PlanConfig cl;
  cl.sample_size = kS;
  const size_t four = ScheduledCost(BuildPlan(cl));

  bool distinct_ok = true;
  for (size_t pool_size : {kS, kS / 2, size_t{10}}) {
    std::vector<uint64_t> pool(pool_size);
    for (size_t i = 0; i < pool_size; ++i) pool[i] = i;
    const std::vector<double> w(pool_size, 1.0 / pool_size);
    const SampleRecord r = DrawSample(pool, w, kS, 0.0, {}, pool_size);
    distinct_ok = distinct_ok && DistinctIds(r).size() < r.ids.size();
  }
  const bool pass = full == 10 * kS && four == 4 * kS && distinct_ok;
  return {pass, Fmt("CL+W.a+P+R %zu (want %zu), CL %zu (want %zu), distinct<presentations=%s",
                    full, 10 * kS, four, 4 * kS, distinct_ok ? "yes" : "no")};
}

struct DeskData {
  Dataset train, test;
};

const DeskData &Desk() {
  static const DeskData data = [] {
    GeneratorConfig g;
    DeskData d;
    d.train = Generate(g, 1);
    g.level_counts = {600, 600, 450, 350};
    d.test = Generate(g, 2);
    return d;
  }();
  return data;
}

struct RunSummary {
  double best = 0.0;
  size_t presentations = 0;
  double seconds = 0.0;
};

RunSummary RunPlan(const CurriculumPlan &plan, uint64_t seed) {
  const DeskData &d = Desk();
  TrainConfig config;
  config.seed = seed;
  config.threads = 1;
  const auto start = Clock::now();
  const TrainResult r =
      Train(plan, d.train, &d.test, ParameterRegistry::Create(d.train.dims, seed), config);
  RunSummary s;
  s.seconds = Seconds(start);
  s.best = r.log.best_accuracy.value_or(0.0);
  s.presentations = r.log.iterations.empty() ? 0 : r.log.iterations.back().presentations;
  return s;
}

CurriculumPlan RandomPlan() {
  PlanConfig p;
  p.strategy = "random";
  p.iterations = 12;
  p.sample_size = 4000;
  return BuildPlan(p);
}

const RunSummary &RandomRun(uint64_t seed) {
  static std::map<uint64_t, RunSummary> cache;
  auto it = cache.find(seed);
  if (it == cache.end()) it = cache.emplace(seed, RunPlan(RandomPlan(), seed)).first;
  return it->second;
}

// Criterion 7.
Outcome Learnability() {
  const RunSummary &r = RandomRun(1);
  const bool pass = r.best >= 0.85 && r.seconds < 600.0;
  return {pass, Fmt("Random 12x4000 best test accuracy %.4f (need >= 0.85) in %.1f s", r.best,
                    r.seconds)};
}

// Criterion 8: the first 7 of the 10 CL+W.a+P+R iterations, 28k of the
// baseline's 48k presentations.
Outcome CurriculumTrend() {
  CurriculumPlan plan = BuildPlan(FullConfig(4000));
  plan.iterations.resize(7);
  double gap_sum = 0.0;
  std::ostringstream per_seed;
  size_t presentations = 0;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    const RunSummary &base = RandomRun(seed);
    const RunSummary cl = RunPlan(plan, seed);
    presentations = cl.presentations;
    gap_sum += base.best - cl.best;
    per_seed << (seed > 1 ? ", " : "") << Fmt("%.4f vs %.4f", cl.best, base.best);
  }
  const double gap = 100.0 * gap_sum / 3.0;
  const double budget = static_cast<double>(presentations) / ScheduledCost(RandomPlan());
  return {gap <= 5.0, Fmt("mean gap %.2f points (need <= 5) at %.0f%% budget; CL vs Random: %s", gap,
                          100.0 * budget, per_seed.str().c_str())};
}

std::vector<std::string> Split(const std::string &text) {
  std::vector<std::string> steps;
  size_t from = 0;
  for (size_t at; (at = text.find(" ; ", from)) != std::string::npos; from = at + 3) {
    steps.push_back(text.substr(from, at - from));
  }
  steps.push_back(text.substr(from));
  return steps;
}

std::string Join(const std::vector<std::string> &steps) {
  std::string out;
  for (size_t i = 0; i < steps.size(); ++i) out += (i ? " ; " : "") + steps[i];
  return out;
}

std::string FirstSlot(const std::string &text) {
  const size_t at = text.find("-> ");
  return text.substr(at + 3, text.find(' ', at + 3) - at - 3);
}

// Textual mutations that each make a valid program invalid.
std::vector<std::string> Mutations(const std::string &text) {
  const std::vector<std::string> steps = Split(text);
  std::vector<std::string> out;
  std::vector<std::string> s = steps;
  s[0].replace(0, s[0].find('['), "no_such_module");
  out.push_back(Join(s));

  s = steps;
  std::string &last = s.back();
  const size_t open = last.find('(');
  last = last.substr(0, open) + "(zz9)";
  out.push_back(Join(s));

  s = steps;
  s.back().insert(s.back().size() - 1, ", " + FirstSlot(text));
  out.push_back(Join(s));

  s = steps;
  s.back() = s.back().substr(0, s.back().find('(')) + "()";
  out.push_back(Join(s));

  s = steps;
  s.pop_back();
  out.push_back(Join(s));

  s = steps;
  std::rotate(s.rbegin(), s.rbegin() + 1, s.rend());
  out.push_back(Join(s));

  s = steps;
  s.insert(s.begin() + 1, steps[0]);
  out.push_back(Join(s));
  return out;
}

// Criterion 9.
Outcome Parser() {
  GeneratorConfig g;
  g.features = 8;
  g.level_counts = {250, 250, 250, 250};
  const Dataset ds = Generate(g, 99);
  size_t round_trips = 0, mutated = 0, rejected = 0;
  std::map<ProgramErrorKind, size_t> kinds;
  for (const SceneExample &ex : ds.examples) {
    const std::string text = FormatProgram(ex.program);
    try {
      const Program p = ParseProgram(text);
      if (p == ex.program && FormatProgram(p) == text) ++round_trips;
    } catch (const Error &) {
    }
    for (const std::string &m : Mutations(text)) {
      ++mutated;
      try {
        ParseProgram(m);
      } catch (const ProgramError &e) {
        ++rejected;
        ++kinds[e.kind()];
      } catch (const Error &) {
      }
    }
  }
  const bool pass = ds.examples.size() == 1000 && round_trips == 1000 && rejected == mutated;
  return {pass, Fmt("round trips %zu/%zu; typed rejections %zu/%zu over %zu error kinds",
                    round_trips, ds.examples.size(), rejected, mutated, kinds.size())};
}

// Criterion 10.
Outcome Reproducibility() {
  GeneratorConfig g;
  g.level_counts = {400, 400, 300, 300};
  const Dataset train = Generate(g, 5);
  g.level_counts = {50, 50, 50, 50};
  const Dataset test = Generate(g, 6);
  const CurriculumPlan plan = BuildPlan(FullConfig(300));
  TrainConfig config;
  config.seed = 17;
  config.threads = 1;
  const ParameterRegistry init = ParameterRegistry::Create(train.dims, 17);
  const TrainResult a = Train(plan, train, &test, init, config);
  const TrainResult b = Train(plan, train, &test, init, config);
  const bool csv = a.log.ToCsv() == b.log.ToCsv();
  const bool best = a.best.Serialize() == b.best.Serialize();
  const bool final = a.final.Serialize() == b.final.Serialize();
  return {csv && best && final && !a.log.iterations.empty(),
          Fmt("csv identical=%s, best checkpoint identical=%s, final checkpoint identical=%s",
              csv ? "yes" : "no", best ? "yes" : "no", final ? "yes" : "no")};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance criteria"};
  bool report_only = false;
  std::vector<int> only;
  app.add_flag("--no-fail-exit", report_only, "Exit 0 even when a criterion fails");
  app.add_option("--only", only, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient suite", GradientSuite},
      {"algebraic identities", Identities},
      {"normalization", Normalization},
      {"oracle equivalence", OracleEquivalence},
      {"sampler statistics", SamplerStatistics},
      {"cost accounting", CostAccounting},
      {"end-to-end learnability", Learnability},
      {"curriculum trend", CurriculumTrend},
      {"parser", Parser},
      {"reproducibility", Reproducibility},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), number) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s %2d %s: %s\n", o.pass ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 || report_only ? 0 : 1;
}
