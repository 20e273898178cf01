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

#ifndef NMN_SYNTH_SCENE_H_
#define NMN_SYNTH_SCENE_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tensor/matrix.h"
#include "util/random.h"

namespace nmn {

// Words of the synthetic world. Attribute values are unique across
// categories, so a value identifies its category.
struct Vocabulary {
  std::vector<std::string> names;
  // (category, values) in a fixed order.
  std::vector<std::pair<std::string, std::vector<std::string>>> categories;
  std::vector<std::string> positions;  // column words, left to right
  std::vector<std::string> relations;  // "left of", "right of", "above", "below"

  static Vocabulary Default();

  // Category owning an attribute value, if any.
  std::optional<std::string> CategoryOf(std::string_view value) const;
  const std::vector<std::string> &ValuesOf(std::string_view category) const;
  bool IsName(std::string_view word) const;
  bool IsPosition(std::string_view word) const;
  bool IsRelation(std::string_view word) const;

  // yes, no, names, attribute values (category order), positions, relations.
  std::vector<std::string> AnswerWords() const;
  // Every word that may appear as a text argument.
  std::vector<std::string> AllWords() const;
};

struct SceneObject {
  std::string name;
  std::map<std::string, std::string> attributes;  // category -> value
  int x = 0;  // column
  int y = 0;  // row, 0 at the top

  bool operator==(const SceneObject &other) const = default;
};

struct SceneGraph {
  int columns = 1;
  int rows = 1;
  std::vector<SceneObject> objects;

  size_t size() const { return objects.size(); }
};

// True when object j stands in relation rel to object i ("j left of i").
// Throws for an unknown relation word.
bool HoldsRelation(const SceneGraph &scene, std::string_view rel, size_t j, size_t i);

// Column word of object j: left / middle / right by thirds of the grid width.
std::string PositionWord(const SceneGraph &scene, size_t j);

// Rows and columns of the grid used for k objects.
std::pair<int, int> GridShape(size_t k);

// Frozen word embeddings plus the positional projection, both drawn once
// from seed with entries N(0, gain^2 / dim).
class SymbolTable {
 public:
  SymbolTable(const Vocabulary &vocab, size_t dim, uint64_t seed, double gain = 1.0);

  size_t dim() const { return dim_; }
  const std::vector<double> &Embedding(std::string_view word) const;
  bool Has(std::string_view word) const;
  // d x 4 projection of (x, y, -x, -y).
  const Matrix &positional() const { return positional_; }

 private:
  size_t dim_;
  std::map<std::string, std::vector<double>, std::less<>> table_;
  Matrix positional_;
};

// d x k features. Column j is
// gain * (normalize(E[name] + sum E[attribute] + P (x, y, -x, -y)) + N(0, sigma^2))
// with grid coordinates scaled to [0, 1].
Matrix SceneFeatures(const SceneGraph &scene, const SymbolTable &symbols, double sigma,
                     Rng &rng, double gain = 1.0);

// Uniformly random objects filling the grid in row-major order.
SceneGraph RandomScene(const Vocabulary &vocab, size_t k, Rng &rng);

}  // namespace nmn

#endif  // NMN_SYNTH_SCENE_H_
