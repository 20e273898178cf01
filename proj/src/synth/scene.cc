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

#include "synth/scene.h"

#include <algorithm>
#include <cmath>

#include "util/error.h"

namespace nmn {

Vocabulary Vocabulary::Default() {
  Vocabulary v;
  v.names = {"cat", "dog", "horse", "bird", "car", "bus", "tree", "chair", "cup", "lamp"};
  v.categories = {
      {"color", {"red", "blue", "green", "yellow"}},
      {"size", {"small", "large"}},
      {"material", {"metal", "wood"}},
  };
  v.positions = {"left", "middle", "right"};
  v.relations = {"left of", "right of", "above", "below"};
  return v;
}

std::optional<std::string> Vocabulary::CategoryOf(std::string_view value) const {
  for (const auto &[category, values] : categories) {
    if (std::find(values.begin(), values.end(), value) != values.end()) return category;
  }
  return std::nullopt;
}

const std::vector<std::string> &Vocabulary::ValuesOf(std::string_view category) const {
  for (const auto &[name, values] : categories) {
    if (name == category) return values;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown attribute category '" + std::string(category) + "'");
}

namespace {

bool Contains(const std::vector<std::string> &words, std::string_view w) {
  return std::find(words.begin(), words.end(), w) != words.end();
}

}  // namespace

bool Vocabulary::IsName(std::string_view word) const { return Contains(names, word); }
bool Vocabulary::IsPosition(std::string_view word) const { return Contains(positions, word); }
bool Vocabulary::IsRelation(std::string_view word) const { return Contains(relations, word); }

std::vector<std::string> Vocabulary::AnswerWords() const {
  std::vector<std::string> out = {"yes", "no"};
  out.insert(out.end(), names.begin(), names.end());
  for (const auto &[category, values] : categories) out.insert(out.end(), values.begin(), values.end());
  out.insert(out.end(), positions.begin(), positions.end());
  out.insert(out.end(), relations.begin(), relations.end());
  return out;
}

std::vector<std::string> Vocabulary::AllWords() const {
  std::vector<std::string> out = names;
  for (const auto &[category, values] : categories) {
    out.push_back(category);
    out.insert(out.end(), values.begin(), values.end());
  }
  out.insert(out.end(), positions.begin(), positions.end());
  out.insert(out.end(), relations.begin(), relations.end());
  return out;
}

bool HoldsRelation(const SceneGraph &scene, std::string_view rel, size_t j, size_t i) {
  const SceneObject &a = scene.objects.at(j);
  const SceneObject &b = scene.objects.at(i);
  if (rel == "left of") return a.x < b.x;
  if (rel == "right of") return a.x > b.x;
  if (rel == "above") return a.y < b.y;
  if (rel == "below") return a.y > b.y;
  Fail(ErrorCode::kInvalidArgument, "unknown relation '" + std::string(rel) + "'");
}

std::string PositionWord(const SceneGraph &scene, size_t j) {
  const int span = scene.columns - 1;
  const int x = scene.objects.at(j).x;
  if (3 * x < span) return "left";
  if (3 * x > 2 * span) return "right";
  return "middle";
}

std::pair<int, int> GridShape(size_t k) {
  const int rows = k >= 2 ? 2 : 1;
  const int columns = static_cast<int>((k + rows - 1) / rows);
  return {rows, columns};
}

SymbolTable::SymbolTable(const Vocabulary &vocab, size_t dim, uint64_t seed, double gain)
    : dim_(dim), positional_(dim, 4) {
  if (dim == 0) Fail(ErrorCode::kConfig, "feature dimension must be positive");
  if (!(gain > 0.0) || !std::isfinite(gain)) Fail(ErrorCode::kConfig, "gain must be positive");
  Rng rng(DeriveSeed(seed, 0x5eed));
  const double scale = gain / std::sqrt(static_cast<double>(dim));
  for (const std::string &word : vocab.AllWords()) {
    std::vector<double> e(dim);
    for (double &v : e) v = rng.Normal() * scale;
    table_.emplace(word, std::move(e));
  }
  for (size_t i = 0; i < dim; ++i) {
    for (size_t c = 0; c < 4; ++c) positional_(i, c) = rng.Normal() * scale;
  }
}

const std::vector<double> &SymbolTable::Embedding(std::string_view word) const {
  auto it = table_.find(word);
  if (it == table_.end()) Fail(ErrorCode::kData, "no embedding for word '" + std::string(word) + "'");
  return it->second;
}

bool SymbolTable::Has(std::string_view word) const { return table_.find(word) != table_.end(); }

Matrix SceneFeatures(const SceneGraph &scene, const SymbolTable &symbols, double sigma,
                     Rng &rng, double gain) {
  const size_t d = symbols.dim();
  Matrix V(d, scene.size());
  const double sx = scene.columns > 1 ? 1.0 / (scene.columns - 1) : 0.0;
  const double sy = scene.rows > 1 ? 1.0 / (scene.rows - 1) : 0.0;
  std::vector<double> column(d);
  for (size_t j = 0; j < scene.size(); ++j) {
    const SceneObject &obj = scene.objects[j];
    column = symbols.Embedding(obj.name);
    for (const auto &[category, value] : obj.attributes) {
      const auto &e = symbols.Embedding(value);
      for (size_t i = 0; i < d; ++i) column[i] += e[i];
    }
    const double px = obj.x * sx;
    const double py = obj.y * sy;
    const double pos[4] = {px, py, -px, -py};
    for (size_t i = 0; i < d; ++i) {
      for (size_t c = 0; c < 4; ++c) column[i] += symbols.positional()(i, c) * pos[c];
    }
    double norm = 0.0;
    for (double v : column) norm += v * v;
    norm = std::sqrt(norm);
    for (size_t i = 0; i < d; ++i) {
      V(i, j) = gain * ((norm > 0.0 ? column[i] / norm : 0.0) + sigma * rng.Normal());
    }
  }
  return V;
}

SceneGraph RandomScene(const Vocabulary &vocab, size_t k, Rng &rng) {
  SceneGraph scene;
  std::tie(scene.rows, scene.columns) = GridShape(k);
  for (size_t j = 0; j < k; ++j) {
    SceneObject obj;
    obj.name = vocab.names[rng.Below(vocab.names.size())];
    for (const auto &[category, values] : vocab.categories) {
      obj.attributes[category] = values[rng.Below(values.size())];
    }
    obj.x = static_cast<int>(j) % scene.columns;
    obj.y = static_cast<int>(j) / scene.columns;
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

}  // namespace nmn
