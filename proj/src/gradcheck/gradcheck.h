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

#ifndef NMN_GRADCHECK_GRADCHECK_H_
#define NMN_GRADCHECK_GRADCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

#include "modules/registry.h"
#include "program/module_kind.h"

namespace nmn {

struct GradCheckOptions {
  double step = 1e-5;       // central-difference h
  double tolerance = 1e-4;  // on the relative error
  // Norms below this are treated as this value in the denominator.
  double floor = 1e-8;
  Dims dims{6, 4, 7};
};

struct GradCheckCase {
  std::string name;
  uint64_t seed = 0;
  // max over checked tensors of |analytic - numeric| / max(|analytic|, |numeric|, floor)
  double max_error = 0.0;
  size_t scalars = 0;  // number of finite-difference coordinates
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  bool passed = true;
};

// Module output contracted with fixed random weights; checks the gradients
// of every parameter the module reads and of its inputs.
GradCheckCase CheckModule(ModuleKind kind, uint64_t seed, const GradCheckOptions &options = {});

// Names of the representative programs used for total-loss checks.
std::vector<std::string> GradCheckProgramNames();
// Total loss (answer + intermediate) of one representative program.
GradCheckCase CheckProgram(size_t index, uint64_t seed, const GradCheckOptions &options = {});

// All 29 kinds and all representative programs for each seed.
GradCheckReport RunGradCheck(const std::vector<uint64_t> &seeds,
                             const GradCheckOptions &options = {});

}  // namespace nmn

#endif  // NMN_GRADCHECK_GRADCHECK_H_
