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

#include "synth/generator.h"

#include <algorithm>
#include <set>
#include <thread>

#include "synth/oracle.h"
#include "util/error.h"

namespace nmn {
namespace {

using K = ModuleKind;

// Raised when a draw does not fit the scene; the caller resamples.
struct Retry {};

template <typename T>
const T &Pick(const std::vector<T> &items, Rng &rng) {
  if (items.empty()) throw Retry{};
  return items[rng.Below(items.size())];
}

struct Weighted {
  int option;
  double weight;
};

int PickWeighted(std::initializer_list<Weighted> options, Rng &rng) {
  double total = 0.0;
  for (const auto &o : options) total += o.weight;
  double u = rng.Uniform() * total;
  for (const auto &o : options) {
    if (u < o.weight) return o.option;
    u -= o.weight;
  }
  return options.end()[-1].option;
}

// Assembles a program while tracking the symbolic value of every step.
class Builder {
 public:
  Builder(const SceneGraph &scene, const Vocabulary &vocab, Rng &rng)
      : scene_(scene), vocab_(vocab), rng_(rng) {}

  int Add(K kind, std::vector<std::string> args, std::vector<int> deps) {
    ModuleCall call{kind, std::move(args), std::move(deps)};
    try {
      values_.push_back(EvalStep(scene_, vocab_, call, values_));
    } catch (const Error &e) {
      if (e.code() == ErrorCode::kOracle) throw Retry{};
      throw;
    }
    program_.steps.push_back(std::move(call));
    return static_cast<int>(program_.steps.size()) - 1;
  }

  const std::vector<bool> &SetOf(int slot) const { return values_[static_cast<size_t>(slot)].set; }
  size_t Count(int slot) const {
    const auto &s = SetOf(slot);
    return static_cast<size_t>(std::count(s.begin(), s.end(), true));
  }
  bool Truth(int slot) const { return values_[static_cast<size_t>(slot)].truth; }
  const Program &program() const { return program_; }

  const SceneGraph &scene() const { return scene_; }
  const Vocabulary &vocab() const { return vocab_; }
  Rng &rng() { return rng_; }

  const SceneObject &Obj(size_t j) const { return scene_.objects[j]; }
  std::string Category() { return Pick(vocab_.categories, rng_).first; }

  // Narrows slot down to {o} with filters built from o's properties.
  int Refine(int slot, size_t o) {
    if (rng_.Bernoulli(0.1)) {
      const std::string category = Category();
      slot = Add(K::kFilterAttr, {Obj(o).attributes.at(category)}, {slot});
    }
    while (Count(slot) > 1) {
      const auto &set = SetOf(slot);
      std::vector<std::string> attr, nots, pos;
      const std::string my_pos = PositionWord(scene_, o);
      for (const auto &[category, values] : vocab_.categories) {
        const std::string &mine = Obj(o).attributes.at(category);
        for (size_t j = 0; j < set.size(); ++j) {
          if (!set[j] || j == o) continue;
          const std::string &theirs = Obj(j).attributes.at(category);
          if (theirs != mine) {
            attr.push_back(mine);
            nots.push_back(theirs);
          }
          if (PositionWord(scene_, j) != my_pos) pos.push_back(my_pos);
        }
      }
      if (attr.empty() && pos.empty()) throw Retry{};
      const int choice = PickWeighted({{0, attr.empty() ? 0.0 : 0.55},
                                       {1, nots.empty() ? 0.0 : 0.25},
                                       {2, pos.empty() ? 0.0 : 0.2}},
                                      rng_);
      if (choice == 0) slot = Add(K::kFilterAttr, {Pick(attr, rng_)}, {slot});
      if (choice == 1) slot = Add(K::kFilterNot, {Pick(nots, rng_)}, {slot});
      if (choice == 2) slot = Add(K::kFilterPos, {my_pos}, {slot});
    }
    return slot;
  }

  // Relation words holding for (j rel i).
  std::vector<std::string> Relations(size_t j, size_t i, bool holding) const {
    std::vector<std::string> out;
    for (const std::string &rel : vocab_.relations) {
      if (HoldsRelation(scene_, rel, j, i) == holding) out.push_back(rel);
    }
    return out;
  }

  std::vector<size_t> Others(size_t o) const {
    std::vector<size_t> out;
    for (size_t j = 0; j < scene_.size(); ++j) {
      if (j != o) out.push_back(j);
    }
    return out;
  }

  // Attention slot whose set is exactly {o}, using budget select steps.
  int UniqueRef(size_t o, int budget) {
    if (budget <= 1) return Refine(Add(K::kSelect, {Obj(o).name}, {}), o);
    const int kind = PickWeighted({{0, 0.46}, {1, 0.44}, {2, 0.1}}, rng_);
    size_t q;
    int related;
    if (kind == 2) {
      std::vector<std::pair<size_t, std::string>> options;
      for (size_t j : Others(o)) {
        for (const auto &[category, values] : vocab_.categories) {
          if (Obj(j).attributes.at(category) == Obj(o).attributes.at(category)) {
            options.emplace_back(j, category);
          }
        }
      }
      const auto &[anchor, category] = Pick(options, rng_);
      q = anchor;
      const int a = UniqueRef(q, budget - 1);
      related = Add(K::kRelateAttr, {category}, {a});
    } else {
      q = Pick(Others(o), rng_);
      // sub: o rel q; obj: q rel o.
      const auto rels = kind == 0 ? Relations(o, q, true) : Relations(q, o, true);
      const std::string rel = Pick(rels, rng_);
      const int a = UniqueRef(q, budget - 1);
      related = Add(kind == 0 ? K::kRelateSub : K::kRelateObj, {rel}, {a});
    }
    const int target = Add(K::kSelect, {Obj(o).name}, {});
    const int fused = rng_.Bernoulli(0.5) ? Add(K::kFusion, {}, {related, target})
                                         : Add(K::kFusion, {}, {target, related});
    if (!SetOf(fused)[o]) throw Retry{};
    return Refine(fused, o);
  }

  // Attention slot over at least two objects.
  int MultiRef(int budget) {
    if (budget > 1) {
      const int slot = LooseRef(budget);
      if (Count(slot) < 2) throw Retry{};
      return slot;
    }
    std::map<std::string, int> counts;
    for (const SceneObject &obj : scene_.objects) ++counts[obj.name];
    std::vector<std::string> repeated;
    for (const auto &[name, n] : counts) {
      if (n >= 2) repeated.push_back(name);
    }
    int slot = Add(K::kSelect, {Pick(repeated, rng_)}, {});
    if (rng_.Bernoulli(0.3)) {
      const auto &values = Pick(vocab_.categories, rng_).second;
      const int narrowed = Add(K::kFilterNot, {Pick(values, rng_)}, {slot});
      if (Count(narrowed) < 2) throw Retry{};
      slot = narrowed;
    }
    return slot;
  }

  // Attention slot over an arbitrary (possibly empty) set.
  int LooseRef(int budget) {
    if (budget <= 1) {
      std::string name = rng_.Bernoulli(0.6) ? Obj(rng_.Below(scene_.size())).name
                                             : Pick(vocab_.names, rng_);
      int slot = Add(K::kSelect, {name}, {});
      switch (PickWeighted({{0, 0.5}, {1, 0.25}, {2, 0.12}, {3, 0.13}}, rng_)) {
        case 1: {
          const auto &values = Pick(vocab_.categories, rng_).second;
          slot = Add(K::kFilterAttr, {Pick(values, rng_)}, {slot});
          break;
        }
        case 2: {
          const auto &values = Pick(vocab_.categories, rng_).second;
          slot = Add(K::kFilterNot, {Pick(values, rng_)}, {slot});
          break;
        }
        case 3: slot = Add(K::kFilterPos, {Pick(vocab_.positions, rng_)}, {slot}); break;
        default: break;
      }
      return slot;
    }
    const size_t q = rng_.Below(scene_.size());
    const int a = UniqueRef(q, budget - 1);
    int related;
    if (rng_.Bernoulli(0.1)) {
      related = Add(K::kRelateAttr, {Category()}, {a});
    } else {
      related = Add(rng_.Bernoulli(0.5) ? K::kRelateSub : K::kRelateObj,
                    {Pick(vocab_.relations, rng_)}, {a});
    }
    std::string name = Pick(vocab_.names, rng_);
    const auto &set = SetOf(related);
    std::vector<std::string> present;
    for (size_t j = 0; j < set.size(); ++j) {
      if (set[j]) present.push_back(Obj(j).name);
    }
    if (!present.empty() && rng_.Bernoulli(0.6)) name = Pick(present, rng_);
    const int target = Add(K::kSelect, {name}, {});
    return Add(K::kFusion, {}, {related, target});
  }

 private:
  const SceneGraph &scene_;
  const Vocabulary &vocab_;
  Rng &rng_;
  Program program_;
  std::vector<OracleValue> values_;
};

std::vector<std::string> Shuffled(std::vector<std::string> v, Rng &rng) {
  rng.Shuffle(v);
  return v;
}

std::string OtherThan(const std::vector<std::string> &words, const std::string &w, Rng &rng) {
  std::vector<std::string> rest;
  for (const auto &x : words) {
    if (x != w) rest.push_back(x);
  }
  return Pick(rest, rng);
}

enum Template {
  kTQueryName, kTQueryAttr, kTQueryPos, kTChooseName, kTChooseAttr, kTChoosePos,
  kTVerifyAttr, kTVerifyPos, kTExist, kTSameAll, kTDifferentAll,
  kTSame, kTDifferent, kTVerifyRelSub, kTVerifyRelObj, kTChooseRel, kTCompare, kTCommon,
  kTAnd, kTOr,
};

int PickTemplate(int level, Rng &rng) {
  const int family = level == 1 ? 0 : PickWeighted({{0, 0.45}, {1, 0.37}, {2, 0.18}}, rng);
  if (family == 0) {
    return PickWeighted({{kTQueryName, 1.4}, {kTQueryAttr, 1.0}, {kTQueryPos, 0.9},
                         {kTChooseName, 0.7}, {kTChooseAttr, 0.7}, {kTChoosePos, 0.6},
                         {kTVerifyAttr, 1.0}, {kTVerifyPos, 0.7}, {kTExist, 1.2},
                         {kTSameAll, 0.5}, {kTDifferentAll, 0.5}},
                        rng);
  }
  if (family == 1) {
    return PickWeighted({{kTSame, 1.0}, {kTDifferent, 1.0}, {kTVerifyRelSub, 0.3},
                         {kTVerifyRelObj, 0.3}, {kTChooseRel, 0.3}, {kTCompare, 0.35},
                         {kTCommon, 0.9}},
                        rng);
  }
  return rng.Bernoulli(0.5) ? kTAnd : kTOr;
}

// Boolean step; desired is the wanted truth value where the template can
// steer it.
int BooleanPart(Builder &b, int budget, bool desired) {
  Rng &rng = b.rng();
  const int choice = PickWeighted({{0, 0.4}, {1, 0.35}, {2, 0.25}}, rng);
  if (choice == 0) return b.Add(K::kExist, {}, {b.LooseRef(budget)});
  const size_t o = rng.Below(b.scene().size());
  const int ref = b.UniqueRef(o, budget);
  if (choice == 1) {
    const std::string category = b.Category();
    const std::string &mine = b.Obj(o).attributes.at(category);
    const std::string value = desired ? mine : OtherThan(b.vocab().ValuesOf(category), mine, rng);
    return b.Add(K::kVerifyAttr, {value}, {ref});
  }
  const std::string mine = PositionWord(b.scene(), o);
  const std::string word = desired ? mine : OtherThan(b.vocab().positions, mine, rng);
  return b.Add(K::kVerifyPos, {word}, {ref});
}

// Builds one question of the given template. Returns false when a yes/no
// question came out with the wrong truth value.
bool BuildQuestion(Builder &b, int tmpl, int level, bool desired) {
  Rng &rng = b.rng();
  const SceneGraph &scene = b.scene();
  const Vocabulary &vocab = b.vocab();
  const int split = level >= 2 ? 1 + static_cast<int>(rng.Below(static_cast<uint64_t>(level - 1))) : 0;
  auto answer_logic = [&](int slot) {
    b.Add(K::kAnswerLogic, {}, {slot});
    return b.Truth(slot) == desired;
  };
  switch (tmpl) {
    case kTQueryName:
    case kTQueryAttr:
    case kTQueryPos: {
      const int ref = b.UniqueRef(rng.Below(scene.size()), level);
      if (tmpl == kTQueryName) b.Add(K::kQueryName, {}, {ref});
      if (tmpl == kTQueryAttr) b.Add(K::kQueryAttr, {vocab.categories.front().first}, {ref});
      if (tmpl == kTQueryPos) b.Add(K::kQueryPos, {}, {ref});
      return true;
    }
    case kTChooseName: {
      const size_t o = rng.Below(scene.size());
      const int ref = b.UniqueRef(o, level);
      const std::string &mine = b.Obj(o).name;
      b.Add(K::kChooseName, Shuffled({mine, OtherThan(vocab.names, mine, rng)}, rng), {ref});
      return true;
    }
    case kTChooseAttr: {
      const size_t o = rng.Below(scene.size());
      const int ref = b.UniqueRef(o, level);
      const std::string category = b.Category();
      const std::string &mine = b.Obj(o).attributes.at(category);
      b.Add(K::kChooseAttr,
            Shuffled({mine, OtherThan(vocab.ValuesOf(category), mine, rng)}, rng), {ref});
      return true;
    }
    case kTChoosePos: {
      const size_t o = rng.Below(scene.size());
      const int ref = b.UniqueRef(o, level);
      const std::string mine = PositionWord(scene, o);
      b.Add(K::kChoosePos, Shuffled({mine, OtherThan(vocab.positions, mine, rng)}, rng), {ref});
      return true;
    }
    case kTVerifyAttr: {
      const size_t o = rng.Below(scene.size());
      const int ref = b.UniqueRef(o, level);
      const std::string category = b.Category();
      const std::string &mine = b.Obj(o).attributes.at(category);
      const std::string value =
          desired ? mine : OtherThan(vocab.ValuesOf(category), mine, rng);
      return answer_logic(b.Add(K::kVerifyAttr, {value}, {ref}));
    }
    case kTVerifyPos: {
      const size_t o = rng.Below(scene.size());
      const int ref = b.UniqueRef(o, level);
      const std::string mine = PositionWord(scene, o);
      const std::string word = desired ? mine : OtherThan(vocab.positions, mine, rng);
      return answer_logic(b.Add(K::kVerifyPos, {word}, {ref}));
    }
    case kTExist: return answer_logic(b.Add(K::kExist, {}, {b.LooseRef(level)}));
    case kTSameAll:
    case kTDifferentAll: {
      const int ref = b.MultiRef(level);
      if (b.Count(ref) < 2) throw Retry{};
      return answer_logic(
          b.Add(tmpl == kTSameAll ? K::kSameAll : K::kDifferentAll, {b.Category()}, {ref}));
    }
    case kTSame:
    case kTDifferent: {
      const std::string category = b.Category();
      const size_t o1 = rng.Below(scene.size());
      const bool want_same = (tmpl == kTSame) == desired;
      std::vector<size_t> partners;
      for (size_t j : b.Others(o1)) {
        const bool same = b.Obj(j).attributes.at(category) == b.Obj(o1).attributes.at(category);
        if (same == want_same) partners.push_back(j);
      }
      const size_t o2 = Pick(partners, rng);
      const int r1 = b.UniqueRef(o1, split);
      const int r2 = b.UniqueRef(o2, level - split);
      return answer_logic(
          b.Add(tmpl == kTSame ? K::kSame : K::kDifferent, {category}, {r1, r2}));
    }
    case kTVerifyRelSub:
    case kTVerifyRelObj: {
      const size_t o1 = rng.Below(scene.size());
      const size_t o2 = Pick(b.Others(o1), rng);
      const auto rels = tmpl == kTVerifyRelSub ? b.Relations(o1, o2, desired)
                                               : b.Relations(o2, o1, desired);
      const std::string rel = Pick(rels, rng);
      const int r1 = b.UniqueRef(o1, split);
      const int r2 = b.UniqueRef(o2, level - split);
      return answer_logic(b.Add(tmpl == kTVerifyRelSub ? K::kVerifyRelSub : K::kVerifyRelObj,
                                {rel}, {r1, r2}));
    }
    case kTChooseRel: {
      const size_t o1 = rng.Below(scene.size());
      const size_t o2 = Pick(b.Others(o1), rng);
      std::vector<std::vector<std::string>> axes;
      if (b.Obj(o1).x != b.Obj(o2).x) axes.push_back({"left of", "right of"});
      if (b.Obj(o1).y != b.Obj(o2).y) axes.push_back({"above", "below"});
      const auto candidates = Shuffled(Pick(axes, rng), rng);
      const int r1 = b.UniqueRef(o1, split);
      const int r2 = b.UniqueRef(o2, level - split);
      b.Add(K::kChooseRel, candidates, {r1, r2});
      return true;
    }
    case kTCompare: {
      const size_t o1 = rng.Below(scene.size());
      const size_t o2 = Pick(b.Others(o1), rng);
      std::vector<std::string> values;
      for (const auto &[category, vals] : vocab.categories) {
        const std::string &v1 = b.Obj(o1).attributes.at(category);
        const std::string &v2 = b.Obj(o2).attributes.at(category);
        if (v1 != v2) {
          values.push_back(v1);
          values.push_back(v2);
        }
      }
      const std::string value = Pick(values, rng);
      const int r1 = b.UniqueRef(o1, split);
      const int r2 = b.UniqueRef(o2, level - split);
      b.Add(K::kCompare, {value}, {r1, r2});
      return true;
    }
    case kTCommon: {
      const size_t o1 = rng.Below(scene.size());
      std::vector<size_t> partners;
      for (size_t j : b.Others(o1)) {
        int shared = 0;
        for (const auto &[category, vals] : vocab.categories) {
          shared += b.Obj(j).attributes.at(category) == b.Obj(o1).attributes.at(category);
        }
        if (shared == 1) partners.push_back(j);
      }
      const size_t o2 = Pick(partners, rng);
      const int r1 = b.UniqueRef(o1, split);
      const int r2 = b.UniqueRef(o2, level - split);
      b.Add(K::kCommon, {}, {r1, r2});
      return true;
    }
    case kTAnd:
    case kTOr: {
      // Sub-answers that produce the desired result.
      static constexpr bool kMixed[3][2] = {{false, false}, {false, true}, {true, false}};
      const bool all = tmpl == kTAnd ? desired : !desired;
      const auto &row = kMixed[rng.Below(3)];
      bool t1 = all, t2 = all;
      if (tmpl == kTAnd && !desired) t1 = row[0], t2 = row[1];
      if (tmpl == kTOr && desired) t1 = !row[0], t2 = !row[1];
      const int b1 = BooleanPart(b, split, t1);
      const int b2 = BooleanPart(b, level - split, t2);
      return answer_logic(b.Add(tmpl == kTAnd ? K::kAnd : K::kOr, {}, {b1, b2}));
    }
    default: break;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown template");
}

}  // namespace

SceneExample GenerateExample(const GeneratorConfig &config, const SymbolTable &symbols,
                             const Vocabulary &vocab, int level, uint64_t id, Rng &rng) {
  if (level < 1) Fail(ErrorCode::kConfig, "level must be >= 1");
  const bool desired = rng.Bernoulli(0.5);
  const int tmpl = PickTemplate(level, rng);
  for (int attempt = 0; attempt < config.max_retries; ++attempt) {
    const SceneGraph scene = RandomScene(vocab, config.objects, rng);
    Builder builder(scene, vocab, rng);
    try {
      if (!BuildQuestion(builder, tmpl, level, desired)) continue;
    } catch (const Retry &) {
      continue;
    }
    const Program &program = builder.program();
    const OracleResult oracle = OracleExecute(program, scene, vocab);
    SceneExample ex;
    ex.id = id;
    ex.program = program;
    ex.features = SceneFeatures(scene, symbols, config.noise, rng, config.gain);
    for (const ModuleCall &call : program.steps) {
      for (const std::string &arg : call.args) ex.embeddings[arg] = symbols.Embedding(arg);
    }
    const auto answers = vocab.AnswerWords();
    const auto it = std::find(answers.begin(), answers.end(), oracle.answer);
    if (it == answers.end()) Fail(ErrorCode::kData, "answer '" + oracle.answer + "' not in vocabulary");
    ex.gold = static_cast<size_t>(it - answers.begin());
    ex.targets = oracle.targets;
    ex.metadata.objects = NumObjects(program);
    ex.metadata.length = ProgramLength(program);
    ex.metadata.answer_kind = AnswerKind(program);
    if (ex.metadata.objects != level) Fail(ErrorCode::kState, "generated wrong difficulty level");
    return ex;
  }
  Fail(ErrorCode::kData, "could not build a level-" + std::to_string(level) +
                             " question after " + std::to_string(config.max_retries) +
                             " scenes");
}

Dataset Generate(const GeneratorConfig &config, uint64_t seed) {
  if (config.features == 0) Fail(ErrorCode::kConfig, "features must be positive");
  if (config.objects < 2) Fail(ErrorCode::kConfig, "objects must be at least 2");
  if (config.noise < 0.0) Fail(ErrorCode::kConfig, "noise must be non-negative");
  const Vocabulary vocab = Vocabulary::Default();
  const SymbolTable symbols(vocab, config.features, config.vocab_seed, config.gain);
  Dataset ds;
  ds.answers = vocab.AnswerWords();
  ds.dims = Dims{config.features, config.objects, ds.answers.size()};
  ds.seed = seed;
  std::vector<int> levels;
  for (size_t l = 0; l < config.level_counts.size(); ++l) {
    levels.insert(levels.end(), config.level_counts[l], static_cast<int>(l) + 1);
  }
  ds.examples.resize(levels.size());
  const size_t threads = std::max<size_t>(1, std::min(config.threads, levels.size()));
  auto work = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) {
      Rng rng(DeriveSeed(seed, i));
      ds.examples[i] = GenerateExample(config, symbols, vocab, levels[i], i, rng);
    }
  };
  if (threads <= 1) {
    work(0, levels.size());
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    const size_t chunk = (levels.size() + threads - 1) / threads;
    for (size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t * chunk, std::min(levels.size(), (t + 1) * chunk));
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
  return ds;
}

Census TakeCensus(const Dataset &dataset) {
  Census c;
  c.examples = dataset.size();
  for (const SceneExample &ex : dataset.examples) {
    std::set<ModuleKind> kinds;
    for (const ModuleCall &call : ex.program.steps) kinds.insert(call.kind);
    for (ModuleKind k : kinds) ++c.kind_examples[k];
    ++c.level_examples[ex.metadata.objects];
    ++c.answer_kinds[ex.metadata.answer_kind];
    if (ex.gold == kYesIndex) ++c.yes;
    if (ex.gold == kNoIndex) ++c.no;
  }
  return c;
}

}  // namespace nmn
