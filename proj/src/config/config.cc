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

#include "config/config.h"

#include <initializer_list>
#include <set>

#include <json.hpp>

#include "util/error.h"

namespace nmn {

using json = nlohmann::json;

namespace {

void AllowOnly(const json &obj, const std::string &section,
               std::initializer_list<const char *> keys) {
  if (!obj.is_object()) Fail(ErrorCode::kConfig, "config key '" + section + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto &[key, value] : obj.items()) {
    if (!allowed.count(key)) {
      Fail(ErrorCode::kConfig, "unknown config key '" + (section.empty() ? key : section + "." + key) + "'");
    }
  }
}

template <typename T>
void Read(const json &obj, const std::string &section, const char *key, T &out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception &) {
    Fail(ErrorCode::kConfig, "config key '" + section + "." + key + "' has the wrong type");
  }
}

// Unsigned integers must be non-negative JSON integers.
template <typename T>
void ReadCount(const json &obj, const std::string &section, const char *key, T &out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number_integer() || it->template get<long long>() < 0) {
    Fail(ErrorCode::kConfig, "config key '" + section + "." + key + "' must be a non-negative integer");
  }
  out = it->template get<T>();
}

}  // namespace

RunConfig ParseRunConfig(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    Fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  AllowOnly(j, "", {"generator", "data", "output_dir", "model", "plan", "train"});
  if (j.contains("generator")) {
    const json &g = j["generator"];
    AllowOnly(g, "generator", {"features", "objects", "level_counts", "test_level_counts", "noise",
                               "gain", "vocab_seed", "max_retries", "threads", "seed", "test_seed"});
    ReadCount(g, "generator", "features", c.generator.features);
    ReadCount(g, "generator", "objects", c.generator.objects);
    Read(g, "generator", "level_counts", c.generator.level_counts);
    Read(g, "generator", "test_level_counts", c.test_level_counts);
    Read(g, "generator", "noise", c.generator.noise);
    Read(g, "generator", "gain", c.generator.gain);
    ReadCount(g, "generator", "vocab_seed", c.generator.vocab_seed);
    Read(g, "generator", "max_retries", c.generator.max_retries);
    ReadCount(g, "generator", "threads", c.generator.threads);
    ReadCount(g, "generator", "seed", c.generator_seed);
    ReadCount(g, "generator", "test_seed", c.test_seed);
    if (c.generator.noise < 0.0) Fail(ErrorCode::kConfig, "config key 'generator.noise' must be >= 0");
    if (!(c.generator.gain > 0.0)) Fail(ErrorCode::kConfig, "config key 'generator.gain' must be > 0");
  }
  if (j.contains("data")) {
    const json &d = j["data"];
    AllowOnly(d, "data", {"train", "test"});
    Read(d, "data", "train", c.data.train);
    Read(d, "data", "test", c.data.test);
  }
  Read(j, "", "output_dir", c.output_dir);
  if (j.contains("model")) {
    const json &m = j["model"];
    AllowOnly(m, "model", {"seed", "sharing"});
    ReadCount(m, "model", "seed", c.model.seed);
    Read(m, "model", "sharing", c.model.sharing);
  }
  if (j.contains("plan")) {
    const json &p = j["plan"];
    AllowOnly(p, "plan", {"strategy", "length_refinement", "weighting", "sample_size", "pretrain",
                          "repeat", "replay_fraction", "iterations", "max_objects"});
    Read(p, "plan", "strategy", c.plan.strategy);
    Read(p, "plan", "length_refinement", c.plan.length_refinement);
    if (p.contains("weighting")) {
      std::string w;
      Read(p, "plan", "weighting", w);
      c.plan.weighting = WeightingFromName(w);
    }
    ReadCount(p, "plan", "sample_size", c.plan.sample_size);
    Read(p, "plan", "pretrain", c.plan.pretrain);
    Read(p, "plan", "repeat", c.plan.repeat);
    Read(p, "plan", "replay_fraction", c.plan.replay_fraction);
    Read(p, "plan", "iterations", c.plan.iterations);
    Read(p, "plan", "max_objects", c.plan.max_objects);
  }
  if (j.contains("train")) {
    const json &t = j["train"];
    AllowOnly(t, "train", {"learning_rate", "batch_size", "lambda", "average_intermediate", "seed",
                           "threads", "eval_every"});
    Read(t, "train", "learning_rate", c.train.learning_rate);
    ReadCount(t, "train", "batch_size", c.train.batch_size);
    Read(t, "train", "lambda", c.train.loss.intermediate_weight);
    Read(t, "train", "average_intermediate", c.train.loss.average_intermediate);
    ReadCount(t, "train", "seed", c.train.seed);
    ReadCount(t, "train", "threads", c.train.threads);
    Read(t, "train", "eval_every", c.train.eval_every);
  }
  c.train.Check();
  BuildPlan(c.plan);  // validates
  return c;
}

std::string RunConfigToJson(const RunConfig &c) {
  nlohmann::ordered_json j;
  j["generator"] = {
      {"features", c.generator.features},   {"objects", c.generator.objects},
      {"level_counts", c.generator.level_counts}, {"test_level_counts", c.test_level_counts},
      {"noise", c.generator.noise},         {"gain", c.generator.gain},
      {"vocab_seed", c.generator.vocab_seed},
      {"max_retries", c.generator.max_retries}, {"threads", c.generator.threads},
      {"seed", c.generator_seed},           {"test_seed", c.test_seed},
  };
  j["data"] = {{"train", c.data.train}, {"test", c.data.test}};
  j["output_dir"] = c.output_dir;
  j["model"] = {{"seed", c.model.seed}, {"sharing", c.model.sharing}};
  j["plan"] = {
      {"strategy", c.plan.strategy},
      {"length_refinement", c.plan.length_refinement},
      {"weighting", WeightingName(c.plan.weighting)},
      {"sample_size", c.plan.sample_size},
      {"pretrain", c.plan.pretrain},
      {"repeat", c.plan.repeat},
      {"replay_fraction", c.plan.replay_fraction},
      {"iterations", c.plan.iterations},
      {"max_objects", c.plan.max_objects},
  };
  j["train"] = {
      {"learning_rate", c.train.learning_rate},
      {"batch_size", c.train.batch_size},
      {"lambda", c.train.loss.intermediate_weight},
      {"average_intermediate", c.train.loss.average_intermediate},
      {"seed", c.train.seed},
      {"threads", c.train.threads},
      {"eval_every", c.train.eval_every},
  };
  return j.dump(2) + "\n";
}

}  // namespace nmn
