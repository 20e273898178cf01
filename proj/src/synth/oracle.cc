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

#include "synth/oracle.h"

#include <algorithm>
#include <set>

#include "util/error.h"

namespace nmn {
namespace {

using K = ModuleKind;
using Set = std::vector<bool>;

[[noreturn]] void Reject(const ModuleCall &call, const std::string &why) {
  Fail(ErrorCode::kOracle, std::string(ModuleName(call.kind)) + ": " + why);
}

OracleValue FromSet(Set s) {
  OracleValue v;
  v.type = ValueType::kAttention;
  v.set = std::move(s);
  return v;
}

OracleValue FromTruth(bool b) {
  OracleValue v;
  v.type = ValueType::kBoolean;
  v.truth = b;
  return v;
}

OracleValue FromAnswer(std::string word) {
  OracleValue v;
  v.type = ValueType::kAnswer;
  v.answer = std::move(word);
  return v;
}

std::vector<size_t> Members(const Set &s) {
  std::vector<size_t> out;
  for (size_t j = 0; j < s.size(); ++j) {
    if (s[j]) out.push_back(j);
  }
  return out;
}

size_t Single(const ModuleCall &call, const Set &s) {
  const auto m = Members(s);
  if (m.size() != 1) {
    Reject(call, "expects exactly one object, got " + std::to_string(m.size()));
  }
  return m[0];
}

const std::string &Arg(const ModuleCall &call, size_t i) {
  if (i >= call.args.size()) Reject(call, "missing text argument");
  return call.args[i];
}

std::string CategoryArg(const Vocabulary &vocab, const ModuleCall &call, size_t i) {
  const std::string &word = Arg(call, i);
  for (const auto &[category, values] : vocab.categories) {
    if (category == word) return category;
  }
  Reject(call, "unknown category '" + word + "'");
}

std::string ValueCategory(const Vocabulary &vocab, const ModuleCall &call, const std::string &v) {
  auto category = vocab.CategoryOf(v);
  if (!category) Reject(call, "unknown attribute value '" + v + "'");
  return *category;
}

void CheckRelation(const Vocabulary &vocab, const ModuleCall &call, const std::string &rel) {
  if (!vocab.IsRelation(rel)) Reject(call, "unknown relation '" + rel + "'");
}

bool HasAttribute(const SceneObject &obj, const std::string &category, const std::string &value) {
  auto it = obj.attributes.find(category);
  return it != obj.attributes.end() && it->second == value;
}

// Exactly one candidate satisfying pred, else reject.
template <typename Pred>
std::string ChooseOne(const ModuleCall &call, Pred pred) {
  std::vector<std::string> hits;
  for (const std::string &c : call.args) {
    if (pred(c)) hits.push_back(c);
  }
  if (hits.size() != 1) {
    Reject(call, std::to_string(hits.size()) + " candidates hold");
  }
  return hits[0];
}

}  // namespace

OracleValue EvalStep(const SceneGraph &scene, const Vocabulary &vocab, const ModuleCall &call,
                     const std::vector<OracleValue> &buffer) {
  const size_t n = scene.size();
  std::vector<const OracleValue *> deps;
  for (int d : call.deps) {
    if (d < 0 || static_cast<size_t>(d) >= buffer.size()) Reject(call, "dependency out of range");
    deps.push_back(&buffer[static_cast<size_t>(d)]);
  }
  const auto &info = Info(call.kind);
  if (static_cast<int>(deps.size()) != info.arity) Reject(call, "wrong number of dependencies");
  for (size_t i = 0; i < deps.size(); ++i) {
    if (deps[i]->type != info.dep_types[i]) Reject(call, "dependency type mismatch");
  }
  auto set_of = [&](size_t i) -> const Set & { return deps[i]->set; };

  switch (call.kind) {
    case K::kSelect: {
      const std::string &name = Arg(call, 0);
      Set s(n);
      for (size_t j = 0; j < n; ++j) s[j] = scene.objects[j].name == name;
      return FromSet(s);
    }
    case K::kFilterAttr:
    case K::kFilterNot: {
      const std::string &value = Arg(call, 0);
      const std::string category = ValueCategory(vocab, call, value);
      Set s = set_of(0);
      const bool keep = call.kind == K::kFilterAttr;
      for (size_t j = 0; j < n; ++j) {
        s[j] = s[j] && (HasAttribute(scene.objects[j], category, value) == keep);
      }
      return FromSet(s);
    }
    case K::kFilterPos: {
      const std::string &word = Arg(call, 0);
      if (!vocab.IsPosition(word)) Reject(call, "unknown position '" + word + "'");
      Set s = set_of(0);
      for (size_t j = 0; j < n; ++j) s[j] = s[j] && PositionWord(scene, j) == word;
      return FromSet(s);
    }
    case K::kRelateSub:
    case K::kRelateObj: {
      const std::string &rel = Arg(call, 0);
      CheckRelation(vocab, call, rel);
      const Set &a = set_of(0);
      Set s(n);
      for (size_t j = 0; j < n; ++j) {
        if (a[j]) continue;
        for (size_t i = 0; i < n && !s[j]; ++i) {
          if (!a[i]) continue;
          s[j] = call.kind == K::kRelateSub ? HoldsRelation(scene, rel, j, i)
                                             : HoldsRelation(scene, rel, i, j);
        }
      }
      return FromSet(s);
    }
    case K::kRelateAttr: {
      const std::string category = CategoryArg(vocab, call, 0);
      const Set &a = set_of(0);
      std::set<std::string> values;
      for (size_t i : Members(a)) values.insert(scene.objects[i].attributes.at(category));
      Set s(n);
      for (size_t j = 0; j < n; ++j) {
        s[j] = !a[j] && values.count(scene.objects[j].attributes.at(category)) > 0;
      }
      return FromSet(s);
    }
    case K::kFusion: {
      Set s(n);
      for (size_t j = 0; j < n; ++j) s[j] = set_of(0)[j] && set_of(1)[j];
      return FromSet(s);
    }
    case K::kAnd: return FromTruth(deps[0]->truth && deps[1]->truth);
    case K::kOr: return FromTruth(deps[0]->truth || deps[1]->truth);
    case K::kSame:
    case K::kDifferent: {
      const std::string category = CategoryArg(vocab, call, 0);
      if (Members(set_of(0)).empty() || Members(set_of(1)).empty()) Reject(call, "empty operand");
      std::set<std::string> values;
      for (size_t i = 0; i < 2; ++i) {
        for (size_t j : Members(set_of(i))) values.insert(scene.objects[j].attributes.at(category));
      }
      const bool same = values.size() == 1;
      return FromTruth(call.kind == K::kSame ? same : !same);
    }
    case K::kSameAll:
    case K::kDifferentAll: {
      const std::string category = CategoryArg(vocab, call, 0);
      const auto members = Members(set_of(0));
      if (members.size() < 2) Reject(call, "needs at least two objects");
      std::set<std::string> values;
      for (size_t j : members) values.insert(scene.objects[j].attributes.at(category));
      const bool same = values.size() == 1;
      return FromTruth(call.kind == K::kSameAll ? same : !same);
    }
    case K::kExist: return FromTruth(!Members(set_of(0)).empty());
    case K::kVerifyRelSub:
    case K::kVerifyRelObj: {
      const std::string &rel = Arg(call, 0);
      CheckRelation(vocab, call, rel);
      const auto first = Members(set_of(0));
      const auto second = Members(set_of(1));
      if (first.empty() || second.empty()) Reject(call, "empty operand");
      bool holds = false;
      for (size_t i : first) {
        for (size_t j : second) {
          if (i == j) continue;
          holds = holds || (call.kind == K::kVerifyRelSub ? HoldsRelation(scene, rel, i, j)
                                                          : HoldsRelation(scene, rel, j, i));
        }
      }
      return FromTruth(holds);
    }
    case K::kVerifyAttr: {
      const std::string &value = Arg(call, 0);
      const std::string category = ValueCategory(vocab, call, value);
      const auto members = Members(set_of(0));
      if (members.empty()) Reject(call, "empty operand");
      return FromTruth(std::all_of(members.begin(), members.end(), [&](size_t j) {
        return HasAttribute(scene.objects[j], category, value);
      }));
    }
    case K::kVerifyPos: {
      const std::string &word = Arg(call, 0);
      if (!vocab.IsPosition(word)) Reject(call, "unknown position '" + word + "'");
      const auto members = Members(set_of(0));
      if (members.empty()) Reject(call, "empty operand");
      return FromTruth(std::all_of(members.begin(), members.end(),
                                   [&](size_t j) { return PositionWord(scene, j) == word; }));
    }
    case K::kChooseName: {
      const size_t j = Single(call, set_of(0));
      return FromAnswer(ChooseOne(call, [&](const std::string &c) {
        return scene.objects[j].name == c;
      }));
    }
    case K::kChooseAttr: {
      const size_t j = Single(call, set_of(0));
      return FromAnswer(ChooseOne(call, [&](const std::string &c) {
        return HasAttribute(scene.objects[j], ValueCategory(vocab, call, c), c);
      }));
    }
    case K::kChoosePos: {
      const size_t j = Single(call, set_of(0));
      return FromAnswer(ChooseOne(call, [&](const std::string &c) {
        return PositionWord(scene, j) == c;
      }));
    }
    case K::kChooseRel: {
      const size_t i = Single(call, set_of(0));
      const size_t j = Single(call, set_of(1));
      return FromAnswer(ChooseOne(call, [&](const std::string &c) {
        CheckRelation(vocab, call, c);
        return HoldsRelation(scene, c, i, j);
      }));
    }
    case K::kCompare: {
      const std::string &value = Arg(call, 0);
      const std::string category = ValueCategory(vocab, call, value);
      const size_t i = Single(call, set_of(0));
      const size_t j = Single(call, set_of(1));
      const bool hi = HasAttribute(scene.objects[i], category, value);
      const bool hj = HasAttribute(scene.objects[j], category, value);
      if (hi == hj) Reject(call, "both or neither object has '" + value + "'");
      return FromAnswer(scene.objects[hi ? i : j].name);
    }
    case K::kCommon: {
      const size_t i = Single(call, set_of(0));
      const size_t j = Single(call, set_of(1));
      std::vector<std::string> shared;
      for (const auto &[category, values] : vocab.categories) {
        const std::string &vi = scene.objects[i].attributes.at(category);
        if (vi == scene.objects[j].attributes.at(category)) shared.push_back(vi);
      }
      if (shared.size() != 1) Reject(call, std::to_string(shared.size()) + " shared attributes");
      return FromAnswer(shared[0]);
    }
    case K::kQueryName: return FromAnswer(scene.objects[Single(call, set_of(0))].name);
    case K::kQueryAttr: {
      const std::string category = call.args.empty() ? vocab.categories.front().first
                                                     : CategoryArg(vocab, call, 0);
      return FromAnswer(scene.objects[Single(call, set_of(0))].attributes.at(category));
    }
    case K::kQueryPos: return FromAnswer(PositionWord(scene, Single(call, set_of(0))));
    case K::kAnswerLogic: return FromAnswer(deps[0]->truth ? "yes" : "no");
  }
  Reject(call, "unhandled module");
}

OracleResult OracleExecute(const Program &p, const SceneGraph &scene, const Vocabulary &vocab) {
  Validate(p);
  OracleResult result;
  for (const ModuleCall &call : p.steps) {
    result.steps.push_back(EvalStep(scene, vocab, call, result.steps));
  }
  result.answer = result.steps.back().answer;
  for (size_t i = 0; i + 1 < result.steps.size(); ++i) {
    const OracleValue &v = result.steps[i];
    StepTarget t;
    t.type = v.type;
    if (v.type == ValueType::kAttention) {
      if (std::none_of(v.set.begin(), v.set.end(), [](bool b) { return b; })) continue;
      for (bool b : v.set) t.values.push_back(b ? 1.0 : 0.0);
    } else if (v.type == ValueType::kBoolean) {
      t.values.push_back(v.truth ? 1.0 : 0.0);
    } else {
      continue;
    }
    result.targets.emplace(static_cast<int>(i), std::move(t));
  }
  return result;
}

}  // namespace nmn
