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

#include "modules/registry.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "util/error.h"
#include "util/random.h"

namespace nmn {

namespace {

using K = ModuleKind;
using R = LayerRole;

constexpr char kMagic[8] = {'N', 'M', 'N', 'C', 'K', 'P', 'T', '\0'};
constexpr uint32_t kFormatVersion = 1;

bool HasRole(ModuleKind kind, LayerRole role) {
  switch (kind) {
    case K::kFusion:
    case K::kAnd:
    case K::kOr:
    case K::kAnswerLogic:
      return false;
    case K::kExist:
      return role == R::kOutput;
    case K::kCommon:
    case K::kQueryName:
    case K::kQueryAttr:
    case K::kQueryPos:
      return role == R::kVisual || role == R::kOutput;
    case K::kRelateSub:
    case K::kRelateObj:
    case K::kRelateAttr:
      return true;
    default:
      return role != R::kInner;
  }
}

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U16(uint16_t v) { Bytes(v, 2); }
  void U32(uint32_t v) { Bytes(v, 4); }
  void U64(uint64_t v) { Bytes(v, 8); }
  void F64(double v) { U64(std::bit_cast<uint64_t>(v)); }
  void Raw(std::string_view s) { out_.append(s); }
  std::string Take() { return std::move(out_); }

 private:
  void Bytes(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  uint8_t U8() { return static_cast<uint8_t>(Bytes(1)); }
  uint16_t U16() { return static_cast<uint16_t>(Bytes(2)); }
  uint32_t U32() { return static_cast<uint32_t>(Bytes(4)); }
  uint64_t U64() { return Bytes(8); }
  double F64() { return std::bit_cast<double>(U64()); }
  std::string Raw(size_t n) {
    Need(n);
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void Need(size_t n) {
    if (pos_ + n > in_.size()) {
      Fail(ErrorCode::kData, "checkpoint truncated at byte " + std::to_string(pos_));
    }
  }
  uint64_t Bytes(int n) {
    Need(n);
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }
  std::string_view in_;
  size_t pos_ = 0;
};

}  // namespace

std::string_view LayerRoleName(LayerRole role) {
  switch (role) {
    case R::kTextual: return "textual";
    case R::kVisual: return "visual";
    case R::kInner: return "inner";
    case R::kOutput: return "output";
  }
  return "?";
}

std::optional<LayerRole> LayerRoleFromName(std::string_view name) {
  for (auto role : {R::kTextual, R::kVisual, R::kInner, R::kOutput}) {
    if (LayerRoleName(role) == name) return role;
  }
  return std::nullopt;
}

SharingTable SharingTable::Default() {
  SharingTable t;
  auto set = [&t](std::initializer_list<K> kinds, R role, const std::string &id) {
    for (K k : kinds) t.Set(k, role, id);
  };
  // Textual layers, grouped by argument semantics.
  set({K::kSelect}, R::kTextual, "select.textual");
  set({K::kFilterAttr, K::kFilterNot, K::kVerifyAttr, K::kChooseAttr, K::kCompare},
      R::kTextual, "attr.textual");
  set({K::kFilterPos}, R::kTextual, "filter_pos.textual");
  set({K::kVerifyPos, K::kChoosePos}, R::kTextual, "pos.textual");
  set({K::kRelateSub, K::kRelateObj, K::kVerifyRelSub, K::kVerifyRelObj, K::kChooseRel},
      R::kTextual, "relation.textual");
  set({K::kRelateAttr}, R::kTextual, "relate_attr.textual");
  set({K::kSame, K::kDifferent}, R::kTextual, "same.textual");
  set({K::kSameAll, K::kDifferentAll}, R::kTextual, "same_all.textual");
  set({K::kChooseName}, R::kTextual, "choose_name.textual");

  // Visual layers.
  set({K::kSelect, K::kFilterAttr, K::kFilterNot, K::kFilterPos, K::kVerifyAttr,
       K::kVerifyPos, K::kChooseName, K::kChooseAttr, K::kChoosePos, K::kQueryName,
       K::kQueryAttr, K::kQueryPos},
      R::kVisual, "detect.visual");
  set({K::kRelateSub, K::kRelateObj, K::kRelateAttr, K::kVerifyRelSub, K::kVerifyRelObj,
       K::kChooseRel},
      R::kVisual, "relation.visual");
  set({K::kSame, K::kDifferent, K::kSameAll, K::kDifferentAll, K::kCompare, K::kCommon},
      R::kVisual, "compare.visual");

  set({K::kRelateSub, K::kRelateObj}, R::kInner, "relate.inner");
  set({K::kRelateAttr}, R::kInner, "relate_attr.inner");

  // One output layer per module, except Same/Different (and the *All pair),
  // which are complements of each other.
  for (const ModuleInfo &info : AllModules()) {
    if (HasRole(info.kind, R::kOutput)) {
      t.Set(info.kind, R::kOutput, std::string(info.name) + ".output");
    }
  }
  t.Set(K::kDifferent, R::kOutput, "same.output");
  t.Set(K::kDifferentAll, R::kOutput, "same_all.output");
  return t;
}

std::optional<std::string> SharingTable::Resolve(ModuleKind kind, LayerRole role) const {
  auto it = entries_.find({kind, role});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void SharingTable::Set(ModuleKind kind, LayerRole role, std::string layer_id) {
  if (!HasRole(kind, role)) {
    Fail(ErrorCode::kConfig, std::string(ModuleName(kind)) + " has no " +
                                 std::string(LayerRoleName(role)) + " layer");
  }
  if (layer_id.empty()) Fail(ErrorCode::kConfig, "empty layer id");
  entries_[{kind, role}] = std::move(layer_id);
}

void SharingTable::ApplyOverrides(const std::map<std::string, std::string> &overrides) {
  for (const auto &[key, id] : overrides) {
    const size_t dot = key.rfind('.');
    if (dot == std::string::npos) {
      Fail(ErrorCode::kConfig, "sharing override key '" + key + "' is not <module>.<role>");
    }
    auto kind = ModuleKindFromName(key.substr(0, dot));
    auto role = LayerRoleFromName(key.substr(dot + 1));
    if (!kind || !role) Fail(ErrorCode::kConfig, "unknown sharing override key '" + key + "'");
    Set(*kind, *role, id);
  }
}

std::pair<size_t, size_t> LayerShape(ModuleKind kind, LayerRole role, const Dims &dims) {
  if (!HasRole(kind, role)) return {0, 0};
  const size_t d = dims.features;
  const size_t k = dims.objects;
  switch (role) {
    case R::kTextual:
    case R::kVisual:
      return {d, d};
    case R::kInner:
      return {k, k};
    case R::kOutput:
      break;
  }
  switch (kind) {
    case K::kSelect:
    case K::kFilterAttr:
    case K::kFilterNot:
    case K::kFilterPos:
      return {k, k};
    case K::kRelateSub:
    case K::kRelateObj:
    case K::kRelateAttr:
      return {k, d};
    case K::kExist:
      return {1, k + 3};
    default:
      break;
  }
  switch (Info(kind).output) {
    case ValueType::kBoolean: return {1, d};
    case ValueType::kAnswer: return {dims.answers, d};
    case ValueType::kAttention: break;
  }
  return {0, 0};
}

void ParameterRegistry::Build(const Dims &dims, const SharingTable &sharing) {
  if (dims.features == 0 || dims.objects == 0 || dims.answers < 2) {
    Fail(ErrorCode::kConfig, "dims need d >= 1, k >= 1 and at least 2 answers");
  }
  dims_ = dims;
  sharing_ = sharing;
  std::map<std::string, std::pair<size_t, size_t>> shapes;
  for (const ModuleInfo &info : AllModules()) {
    for (size_t r = 0; r < kNumLayerRoles; ++r) {
      const auto role = static_cast<LayerRole>(r);
      if (!HasRole(info.kind, role)) continue;
      auto id = sharing.Resolve(info.kind, role);
      if (!id) {
        Fail(ErrorCode::kConfig, "sharing table has no " + std::string(LayerRoleName(role)) +
                                     " layer for " + std::string(info.name));
      }
      const auto shape = LayerShape(info.kind, role, dims);
      auto [it, inserted] = shapes.emplace(*id, shape);
      if (!inserted && it->second != shape) {
        Fail(ErrorCode::kConfig, "layer '" + *id + "' is shared by modules needing " +
                                     std::to_string(it->second.first) + "x" +
                                     std::to_string(it->second.second) + " and " +
                                     std::to_string(shape.first) + "x" +
                                     std::to_string(shape.second));
      }
    }
  }
  layers_.clear();
  values_.clear();
  names_.clear();
  std::map<std::string, int> index;
  for (const auto &[id, shape] : shapes) {
    Layer layer;
    layer.id = id;
    layer.weight = values_.size();
    values_.emplace_back(shape.first, shape.second);
    names_.push_back(id + ".W");
    layer.bias = values_.size();
    values_.emplace_back(shape.first, 1);
    names_.push_back(id + ".b");
    index[id] = static_cast<int>(layers_.size());
    layers_.push_back(layer);
  }
  lookup_.assign(kNumModuleKinds, {-1, -1, -1, -1});
  for (const auto &[key, id] : sharing.entries()) {
    lookup_[static_cast<size_t>(key.first)][static_cast<size_t>(key.second)] = index.at(id);
  }
}

ParameterRegistry ParameterRegistry::Create(const Dims &dims, uint64_t seed,
                                            const SharingTable &sharing) {
  ParameterRegistry reg;
  reg.seed_ = seed;
  reg.Build(dims, sharing);
  // Layers mixing the k per-object detection scores start as the identity,
  // so each object's score initially drives only its own attention entry.
  std::set<std::string> slot_mixers;
  for (const auto &[key, id] : sharing.entries()) {
    if (LayerShape(key.first, key.second, dims) == std::pair{dims.objects, dims.objects} &&
        key.second != R::kTextual && key.second != R::kVisual) {
      slot_mixers.insert(id);
    }
  }
  Rng rng(seed);
  for (const Layer &layer : reg.layers_) {
    Matrix &w = reg.values_[layer.weight];
    if (slot_mixers.count(layer.id) != 0) {
      for (size_t i = 0; i < w.rows(); ++i) w(i, i) = 1.0;
      continue;
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(w.cols()));
    for (double &v : w.values()) v = rng.Uniform(-bound, bound);
  }
  return reg;
}

const ParameterRegistry::Layer *ParameterRegistry::LayerFor(ModuleKind kind,
                                                            LayerRole role) const {
  const int i = lookup_[static_cast<size_t>(kind)][static_cast<size_t>(role)];
  return i < 0 ? nullptr : &layers_[i];
}

const ParameterRegistry::Layer *ParameterRegistry::FindLayer(std::string_view id) const {
  for (const Layer &layer : layers_) {
    if (layer.id == id) return &layer;
  }
  return nullptr;
}

size_t ParameterRegistry::NumScalars() const {
  size_t total = 0;
  for (const Matrix &m : values_) total += m.size();
  return total;
}

Gradients ParameterRegistry::NewGradients() const {
  std::vector<const Matrix *> shapes;
  shapes.reserve(values_.size());
  for (const Matrix &m : values_) shapes.push_back(&m);
  return Gradients(shapes);
}

void ParameterRegistry::ApplyGradients(const Gradients &grads, double learning_rate) {
  if (grads.size() != values_.size()) Fail(ErrorCode::kShape, "gradient layout mismatch");
  for (size_t i = 0; i < values_.size(); ++i) {
    auto w = values_[i].values();
    auto g = grads[i].values();
    for (size_t j = 0; j < w.size(); ++j) w[j] -= learning_rate * g[j];
  }
}

bool ParameterRegistry::operator==(const ParameterRegistry &other) const {
  return dims_ == other.dims_ && seed_ == other.seed_ && sharing_ == other.sharing_ &&
         names_ == other.names_ && values_ == other.values_;
}

std::string ParameterRegistry::Serialize() const {
  Writer w;
  w.Raw(std::string_view(kMagic, sizeof(kMagic)));
  w.U32(kFormatVersion);
  w.U32(static_cast<uint32_t>(dims_.features));
  w.U32(static_cast<uint32_t>(dims_.objects));
  w.U32(static_cast<uint32_t>(dims_.answers));
  w.U64(seed_);
  w.U32(static_cast<uint32_t>(sharing_.entries().size()));
  for (const auto &[key, id] : sharing_.entries()) {
    w.U8(static_cast<uint8_t>(key.first));
    w.U8(static_cast<uint8_t>(key.second));
    w.U16(static_cast<uint16_t>(id.size()));
    w.Raw(id);
  }
  w.U32(static_cast<uint32_t>(values_.size()));
  for (size_t i = 0; i < values_.size(); ++i) {
    w.U16(static_cast<uint16_t>(names_[i].size()));
    w.Raw(names_[i]);
    w.U32(static_cast<uint32_t>(values_[i].rows()));
    w.U32(static_cast<uint32_t>(values_[i].cols()));
    for (double v : values_[i].values()) w.F64(v);
  }
  return w.Take();
}

ParameterRegistry ParameterRegistry::Deserialize(std::string_view bytes) {
  Reader r(bytes);
  if (r.Raw(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) {
    Fail(ErrorCode::kData, "not a checkpoint (bad magic)");
  }
  const uint32_t version = r.U32();
  if (version != kFormatVersion) {
    Fail(ErrorCode::kData, "unsupported checkpoint version " + std::to_string(version));
  }
  Dims dims;
  dims.features = r.U32();
  dims.objects = r.U32();
  dims.answers = r.U32();
  const uint64_t seed = r.U64();
  SharingTable sharing;
  const uint32_t entries = r.U32();
  for (uint32_t i = 0; i < entries; ++i) {
    const uint8_t kind = r.U8();
    const uint8_t role = r.U8();
    const uint16_t len = r.U16();
    std::string id = r.Raw(len);
    if (kind >= kNumModuleKinds || role >= kNumLayerRoles) {
      Fail(ErrorCode::kData, "checkpoint sharing entry out of range");
    }
    sharing.Set(static_cast<ModuleKind>(kind), static_cast<LayerRole>(role), std::move(id));
  }
  ParameterRegistry reg;
  reg.seed_ = seed;
  reg.Build(dims, sharing);
  const uint32_t count = r.U32();
  if (count != reg.values_.size()) {
    Fail(ErrorCode::kData, "checkpoint has " + std::to_string(count) + " parameters, expected " +
                               std::to_string(reg.values_.size()));
  }
  for (uint32_t i = 0; i < count; ++i) {
    const uint16_t len = r.U16();
    const std::string name = r.Raw(len);
    const uint32_t rows = r.U32();
    const uint32_t cols = r.U32();
    Matrix &m = reg.values_[i];
    if (name != reg.names_[i] || rows != m.rows() || cols != m.cols()) {
      Fail(ErrorCode::kData, "checkpoint parameter '" + name + "' does not match layout");
    }
    for (double &v : m.values()) v = r.F64();
  }
  if (!r.done()) Fail(ErrorCode::kData, "trailing bytes after checkpoint");
  return reg;
}

void ParameterRegistry::Save(const std::string &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
  const std::string bytes = Serialize();
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "short write to " + path);
}

ParameterRegistry ParameterRegistry::Load(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return Deserialize(buf.str());
}

}  // namespace nmn
