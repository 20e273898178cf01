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

#include <string>

#include "config/config.h"
#include "doctest.h"
#include "util/error.h"

using namespace nmn;

namespace {

std::string ConfigError(const std::string &json) {
  try {
    ParseRunConfig(json);
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kConfig);
    return e.what();
  }
  FAIL("accepted: " << json);
  return "";
}

}  // namespace

TEST_CASE("empty config resolves to the defaults") {
  const RunConfig c = ParseRunConfig("{}");
  CHECK(c.generator.features == 32);
  CHECK(c.generator.objects == 8);
  CHECK(c.generator.noise == 0.05);
  CHECK(c.plan.sample_size == 4000);
  CHECK(c.plan.replay_fraction == 0.2);
  CHECK(c.train.learning_rate == 0.1);
  CHECK(c.train.loss.intermediate_weight == 1.0);
}

TEST_CASE("values are read into every section") {
  const RunConfig c = ParseRunConfig(R"({
    "generator": {"features": 16, "gain": 2.0, "level_counts": [1, 2, 3, 4], "seed": 9},
    "data": {"train": "a.jsonl", "test": "b.jsonl"},
    "output_dir": "runs/x",
    "model": {"seed": 4, "sharing": {"query_name.output": "query_attr.output"}},
    "plan": {"strategy": "curriculum", "weighting": "a", "pretrain": 2, "repeat": 2,
             "length_refinement": true},
    "train": {"learning_rate": 0.05, "batch_size": 16, "lambda": 0.5, "average_intermediate": false}
  })");
  CHECK(c.generator.features == 16);
  CHECK(c.generator.gain == 2.0);
  CHECK(c.generator.level_counts == std::vector<size_t>{1, 2, 3, 4});
  CHECK(c.generator_seed == 9);
  CHECK(c.data.train == "a.jsonl");
  CHECK(c.output_dir == "runs/x");
  CHECK(c.model.sharing.at("query_name.output") == "query_attr.output");
  CHECK(c.plan.weighting == Weighting::kAnswer);
  CHECK(c.plan.pretrain == 2);
  CHECK(c.plan.length_refinement);
  CHECK(c.train.batch_size == 16);
  CHECK(c.train.loss.intermediate_weight == 0.5);
  CHECK_FALSE(c.train.loss.average_intermediate);
}

TEST_CASE("resolved json round-trips") {
  const RunConfig c = ParseRunConfig(R"({"plan": {"weighting": "b", "iterations": 5}})");
  const std::string json = RunConfigToJson(c);
  CHECK(RunConfigToJson(ParseRunConfig(json)) == json);
  CHECK(json.find("\"gain\"") != std::string::npos);
}

TEST_CASE("strict keys and types") {
  CHECK(ConfigError(R"({"trian": {}})").find("trian") != std::string::npos);
  CHECK(ConfigError(R"({"train": {"lr": 0.1}})").find("train.lr") != std::string::npos);
  CHECK(ConfigError(R"({"plan": {"sample_size": "big"}})").find("sample_size") != std::string::npos);
  CHECK(ConfigError(R"({"plan": {"weighting": "c"}})").find("weighting") != std::string::npos);
  CHECK(ConfigError(R"({"generator": {"features": -3}})").find("features") != std::string::npos);
  CHECK(ConfigError(R"({"generator": {"gain": 0}})").find("gain") != std::string::npos);
  ConfigError("[1, 2]");
  ConfigError("{not json");
}
