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

#ifndef NMN_CONFIG_CONFIG_H_
#define NMN_CONFIG_CONFIG_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "curriculum/curriculum.h"
#include "synth/generator.h"
#include "trainer/trainer.h"

namespace nmn {

struct ModelConfig {
  uint64_t seed = 0;
  // "<module>.<role>" -> layer id
  std::map<std::string, std::string> sharing;
};

struct DataConfig {
  std::string train;
  std::string test;
};

// Everything a run needs; see docs/config_schema.md.
struct RunConfig {
  GeneratorConfig generator;
  uint64_t generator_seed = 1;
  uint64_t test_seed = 2;
  std::vector<size_t> test_level_counts = {600, 600, 450, 350};
  DataConfig data;
  std::string output_dir = "runs/default";
  ModelConfig model;
  PlanConfig plan;
  TrainConfig train;
};

// Strict parse: unknown keys and ill-typed values raise ErrorCode::kConfig
// naming the offending key. Missing keys keep their defaults.
RunConfig ParseRunConfig(std::string_view json);

// Fully resolved form with every key present.
std::string RunConfigToJson(const RunConfig &config);

}  // namespace nmn

#endif  // NMN_CONFIG_CONFIG_H_
