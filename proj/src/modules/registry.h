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

#ifndef NMN_MODULES_REGISTRY_H_
#define NMN_MODULES_REGISTRY_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "program/module_kind.h"
#include "tensor/matrix.h"
#include "tensor/tape.h"

namespace nmn {

// Model dimensions. The answer vocabulary always starts with "yes", "no".
struct Dims {
  size_t features = 32;  // d; also the hidden size
  size_t objects = 8;    // k
  size_t answers = 27;   // |A|

  bool operator==(const Dims &other) const = default;
};

inline constexpr size_t kYesIndex = 0;
inline constexpr size_t kNoIndex = 1;

// textual: W_t t; visual: W_v V; inner: the relation-attention layer of the
// relate family; output: the final layer.
enum class LayerRole : uint8_t { kTextual, kVisual, kInner, kOutput };
inline constexpr size_t kNumLayerRoles = 4;

std::string_view LayerRoleName(LayerRole role);
std::optional<LayerRole> LayerRoleFromName(std::string_view name);

// Maps (module kind, role) to a layer id. Modules resolving a role to the
// same id share that layer.
class SharingTable {
 public:
  static SharingTable Default();

  std::optional<std::string> Resolve(ModuleKind kind, LayerRole role) const;
  void Set(ModuleKind kind, LayerRole role, std::string layer_id);
  // Applies {"<module>.<role>": "<layer id>"} overrides.
  void ApplyOverrides(const std::map<std::string, std::string> &overrides);

  const std::map<std::pair<ModuleKind, LayerRole>, std::string> &entries() const {
    return entries_;
  }
  bool operator==(const SharingTable &other) const = default;

 private:
  std::map<std::pair<ModuleKind, LayerRole>, std::string> entries_;
};

// Shape (rows x cols) that the module formulas require for a layer.
std::pair<size_t, size_t> LayerShape(ModuleKind kind, LayerRole role, const Dims &dims);

// All learnable weights. Each layer is a weight matrix plus a bias vector;
// parameters are addressed by dense ids (weight then bias per layer).
class ParameterRegistry {
 public:
  struct Layer {
    std::string id;
    size_t weight = 0;  // parameter id
    size_t bias = 0;    // parameter id
  };

  ParameterRegistry() = default;

  // Kaiming-style uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)) and zero
  // biases, deterministic in seed. Square k x k layers that mix object slots
  // (detection outputs, relate inner layers) start as the identity instead.
  static ParameterRegistry Create(const Dims &dims, uint64_t seed,
                                  const SharingTable &sharing = SharingTable::Default());

  const Dims &dims() const { return dims_; }
  uint64_t seed() const { return seed_; }
  const SharingTable &sharing() const { return sharing_; }

  // Layer used by kind in role, or null when the formula has no such layer.
  const Layer *LayerFor(ModuleKind kind, LayerRole role) const;
  const std::vector<Layer> &layers() const { return layers_; }
  const Layer *FindLayer(std::string_view id) const;

  size_t num_params() const { return values_.size(); }
  const Matrix &param(size_t id) const { return values_[id]; }
  Matrix &mutable_param(size_t id) { return values_[id]; }
  const std::string &param_name(size_t id) const { return names_[id]; }
  // Total number of scalars.
  size_t NumScalars() const;

  Gradients NewGradients() const;
  // w <- w - learning_rate * g
  void ApplyGradients(const Gradients &grads, double learning_rate);

  // Binary checkpoint (docs/checkpoint_format.md).
  std::string Serialize() const;
  static ParameterRegistry Deserialize(std::string_view bytes);
  void Save(const std::string &path) const;
  static ParameterRegistry Load(const std::string &path);

  bool operator==(const ParameterRegistry &other) const;

 private:
  void Build(const Dims &dims, const SharingTable &sharing);

  Dims dims_;
  uint64_t seed_ = 0;
  SharingTable sharing_;
  std::vector<Layer> layers_;
  std::vector<Matrix> values_;
  std::vector<std::string> names_;
  // (kind, role) -> index into layers_, -1 when absent.
  std::vector<std::array<int, kNumLayerRoles>> lookup_;
};

}  // namespace nmn

#endif  // NMN_MODULES_REGISTRY_H_
