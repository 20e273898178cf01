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

#ifndef NMN_SYNTH_GENERATOR_H_
#define NMN_SYNTH_GENERATOR_H_

#include <cstdint>
#include <map>
#include <vector>

#include "executor/example.h"
#include "synth/scene.h"

namespace nmn {

struct GeneratorConfig {
  size_t features = 32;  // d
  size_t objects = 8;    // k
  // Examples per difficulty level; level i has i+1 select steps.
  std::vector<size_t> level_counts = {6000, 6000, 4500, 3500};
  double noise = 0.05;  // sigma
  // Common multiplier on features and word embeddings. Keeps the products
  // inside the modules away from vanishing magnitudes.
  double gain = 3.0;
  // Seed of the symbol table. Train and test sets must share it.
  uint64_t vocab_seed = 0;
  // Scene resamples before giving up on one example.
  int max_retries = 500;
  size_t threads = 1;
};

// Builds a dataset; a pure function of (config, seed) for any thread count.
Dataset Generate(const GeneratorConfig &config, uint64_t seed);

// One example on a fresh scene drawn from rng. level is the number of
// select steps (1..4).
SceneExample GenerateExample(const GeneratorConfig &config, const SymbolTable &symbols,
                             const Vocabulary &vocab, int level, uint64_t id, Rng &rng);

struct Census {
  size_t examples = 0;
  // Number of examples using each module kind at least once.
  std::map<ModuleKind, size_t> kind_examples;
  std::map<int, size_t> level_examples;
  std::map<ModuleKind, size_t> answer_kinds;
  size_t yes = 0;
  size_t no = 0;
};

Census TakeCensus(const Dataset &dataset);

}  // namespace nmn

#endif  // NMN_SYNTH_GENERATOR_H_
