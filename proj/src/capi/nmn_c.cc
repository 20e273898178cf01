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

#include "nmn/nmn.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <string>

#include <json.hpp>

#include "config/config.h"
#include "executor/executor.h"
#include "gradcheck/gradcheck.h"
#include "modules/registry.h"
#include "program/program.h"
#include "synth/dataset_io.h"
#include "synth/generator.h"
#include "trainer/trainer.h"
#include "util/error.h"

struct nmn_dataset {
  nmn::Dataset data;
};

struct nmn_model {
  nmn::ParameterRegistry registry;
};

struct nmn_run {
  nmn::MetricsLog log;
  nmn::ParameterRegistry best;
};

namespace {

thread_local std::string g_last_error;

int StatusOf(nmn::ErrorCode code) {
  switch (code) {
    case nmn::ErrorCode::kInvalidArgument: return NMN_ERR_INVALID_ARGUMENT;
    case nmn::ErrorCode::kShape: return NMN_ERR_INVALID_ARGUMENT;
    case nmn::ErrorCode::kParse: return NMN_ERR_PARSE;
    case nmn::ErrorCode::kType: return NMN_ERR_TYPE;
    case nmn::ErrorCode::kConfig: return NMN_ERR_CONFIG;
    case nmn::ErrorCode::kData: return NMN_ERR_DATA;
    case nmn::ErrorCode::kOracle: return NMN_ERR_DATA;
    case nmn::ErrorCode::kIo: return NMN_ERR_IO;
    case nmn::ErrorCode::kNumerical: return NMN_ERR_NUMERICAL;
    case nmn::ErrorCode::kState: return NMN_ERR_STATE;
  }
  return NMN_ERR_UNKNOWN;
}

int Fail(int status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs body, translating exceptions into status codes.
template <typename Body>
int Guard(Body body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const nmn::Error &e) {
    return Fail(StatusOf(e.code()), e.what());
  } catch (const std::bad_alloc &) {
    return Fail(NMN_ERR_UNKNOWN, "out of memory");
  } catch (const std::exception &e) {
    return Fail(NMN_ERR_UNKNOWN, e.what());
  } catch (...) {
    return Fail(NMN_ERR_UNKNOWN, "unknown error");
  }
}

int WriteString(const std::string &s, char *buf, size_t *len) {
  if (len == nullptr) return Fail(NMN_ERR_NULL_POINTER, "len is null");
  const size_t need = s.size() + 1;
  if (buf == nullptr || *len < need) {
    *len = need;
    return Fail(NMN_ERR_INSUFFICIENT_BUFFER,
                "buffer too small: need " + std::to_string(need) + " bytes");
  }
  std::memcpy(buf, s.data(), s.size());
  buf[s.size()] = '\0';
  *len = s.size();
  return NMN_OK;
}

#define NMN_REQUIRE(ptr) \
  if ((ptr) == nullptr) return Fail(NMN_ERR_NULL_POINTER, #ptr " is null")

nmn::RunConfig Config(const char *json) {
  return nmn::ParseRunConfig(json == nullptr ? "{}" : json);
}

nlohmann::ordered_json TraceJson(const nmn::ExecutionTrace &trace, const nmn::Program &p,
                                 const std::vector<std::string> &answers) {
  nlohmann::ordered_json out;
  auto steps = nlohmann::ordered_json::array();
  for (size_t i = 0; i < trace.steps.size(); ++i) {
    const auto &s = trace.steps[i];
    nlohmann::ordered_json j;
    j["step"] = i;
    j["module"] = std::string(nmn::ModuleName(s.kind));
    j["args"] = p[i].args;
    j["deps"] = p[i].deps;
    j["type"] = std::string(nmn::ValueTypeName(s.type));
    j["value"] = s.value;
    j["loss"] = s.loss ? nlohmann::ordered_json(*s.loss) : nullptr;
    steps.push_back(j);
  }
  out["steps"] = steps;
  out["answer"] = trace.answer;
  const size_t pred = nmn::Argmax(trace.answer);
  out["predicted"] = pred < answers.size() ? answers[pred] : std::to_string(pred);
  out["answer_loss"] = trace.answer_loss ? nlohmann::ordered_json(*trace.answer_loss) : nullptr;
  out["total_loss"] = trace.total_loss ? nlohmann::ordered_json(*trace.total_loss) : nullptr;
  return out;
}

}  // namespace

extern "C" {

const char *nmn_version(void) { return "1.0.0"; }

const char *nmn_status_name(int status) {
  switch (status) {
    case NMN_OK: return "ok";
    case NMN_ERR_NULL_POINTER: return "null pointer";
    case NMN_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NMN_ERR_CONFIG: return "config error";
    case NMN_ERR_DATA: return "data error";
    case NMN_ERR_NUMERICAL: return "numerical failure";
    case NMN_ERR_PARSE: return "parse error";
    case NMN_ERR_TYPE: return "type error";
    case NMN_ERR_IO: return "i/o error";
    case NMN_ERR_INSUFFICIENT_BUFFER: return "insufficient buffer";
    case NMN_ERR_STATE: return "invalid state";
    default: return "unknown error";
  }
}

const char *nmn_last_error(void) { return g_last_error.c_str(); }

int nmn_config_resolve(const char *config_json, char *buf, size_t *len) {
  return Guard([&]() -> int {
    NMN_REQUIRE(config_json);
    return WriteString(nmn::RunConfigToJson(nmn::ParseRunConfig(config_json)), buf, len);
  });
}

int nmn_dataset_generate(const char *config_json, int test, nmn_dataset_t **out) {
  return Guard([&]() -> int {
    NMN_REQUIRE(out);
    nmn::RunConfig c = Config(config_json);
    nmn::GeneratorConfig g = c.generator;
    if (test) g.level_counts = c.test_level_counts;
    auto *ds = new nmn_dataset{nmn::Generate(g, test ? c.test_seed : c.generator_seed)};
    *out = ds;
    return NMN_OK;
  });
}

int nmn_dataset_load(const char *path, nmn_dataset_t **out) {
  return Guard([&]() -> int {
    NMN_REQUIRE(path);
    NMN_REQUIRE(out);
    *out = new nmn_dataset{nmn::LoadDataset(path)};
    return NMN_OK;
  });
}

int nmn_dataset_save(const nmn_dataset_t *dataset, const char *path) {
  return Guard([&]() -> int {
    NMN_REQUIRE(dataset);
    NMN_REQUIRE(path);
    nmn::SaveDataset(dataset->data, path);
    return NMN_OK;
  });
}

int nmn_dataset_size(const nmn_dataset_t *dataset, size_t *out) {
  return Guard([&]() -> int {
    NMN_REQUIRE(dataset);
    NMN_REQUIRE(out);
    *out = dataset->data.size();
    return NMN_OK;
  });
}

int nmn_dataset_census(const nmn_dataset_t *dataset, char *buf, size_t *len) {
  return Guard([&]() -> int {
    NMN_REQUIRE(dataset);
    const nmn::Census c = nmn::TakeCensus(dataset->data);
    nlohmann::ordered_json j;
    j["examples"] = c.examples;
    j["yes"] = c.yes;
    j["no"] = c.no;
    nlohmann::ordered_json kinds, answers, levels;
    for (const auto &info : nmn::AllModules()) {
      auto it = c.kind_examples.find(info.kind);
      kinds[std::string(info.name)] = it == c.kind_examples.end() ? 0 : it->second;
      auto at = c.answer_kinds.find(info.kind);
      if (at != c.answer_kinds.end()) answers[std::string(info.name)] = at->second;
    }
    for (const auto &[level, n] : c.level_examples) levels[std::to_string(level)] = n;
    j["kind_examples"] = kinds;
    j["answer_kinds"] = answers;
    j["levels"] = levels;
    return WriteString(j.dump(2), buf, len);
  });
}

void nmn_dataset_destroy(nmn_dataset_t *dataset) { delete dataset; }

int nmn_program_check(const char *text, char *buf, size_t *len) {
  return Guard([&]() -> int {
    NMN_REQUIRE(text);
    const nmn::Program p = nmn::ParseProgram(text);
    return WriteString(nmn::FormatProgram(p), buf, len);
  });
}

int nmn_plan_describe(const char *config_json, size_t full_pass_size, char *buf, size_t *len) {
  return Guard([&]() -> int {
    const nmn::RunConfig c = Config(config_json);
    const nmn::CurriculumPlan plan = nmn::BuildPlan(c.plan);
    nlohmann::ordered_json j;
    auto rows = nlohmann::ordered_json::array();
    for (size_t i = 0; i < plan.iterations.size(); ++i) {
      const auto &it = plan.iterations[i];
      const bool full = it.mode == nmn::SampleMode::kFullPass;
      rows.push_back({
          {"index", i + 1},
          {"kind", std::string(nmn::IterationKindName(it.kind))},
          {"label", it.Label()},
          {"weighting", std::string(nmn::WeightingName(it.weighting))},
          {"mode", full ? "full_pass" : "sample"},
          {"sample_size", full ? full_pass_size : it.sample_size},
          {"replay", static_cast<size_t>(std::floor(
                         it.replay_fraction * static_cast<double>(it.sample_size) + 1e-9))},
      });
    }
    j["strategy"] = c.plan.strategy;
    j["pretrain_iterations"] = plan.pretrain_iterations;
    j["iterations"] = rows;
    j["scheduled_cost"] = nmn::ScheduledCost(plan, full_pass_size);
    return WriteString(j.dump(2), buf, len);
  });
}

int nmn_model_create(const nmn_dataset_t *like, const char *config_json, nmn_model_t **out) {
  return Guard([&]() -> int {
    NMN_REQUIRE(like);
    NMN_REQUIRE(out);
    const nmn::RunConfig c = Config(config_json);
    nmn::SharingTable sharing = nmn::SharingTable::Default();
    sharing.ApplyOverrides(c.model.sharing);
    *out = new nmn_model{nmn::ParameterRegistry::Create(like->data.dims, c.model.seed, sharing)};
    return NMN_OK;
  });
}

int nmn_model_load(const char *path, nmn_model_t **out) {
  return Guard([&]() -> int {
    NMN_REQUIRE(path);
    NMN_REQUIRE(out);
    *out = new nmn_model{nmn::ParameterRegistry::Load(path)};
    return NMN_OK;
  });
}

int nmn_model_save(const nmn_model_t *model, const char *path) {
  return Guard([&]() -> int {
    NMN_REQUIRE(model);
    NMN_REQUIRE(path);
    model->registry.Save(path);
    return NMN_OK;
  });
}

int nmn_model_dims(const nmn_model_t *model, size_t *features, size_t *objects, size_t *answers) {
  return Guard([&]() -> int {
    NMN_REQUIRE(model);
    const nmn::Dims &d = model->registry.dims();
    if (features) *features = d.features;
    if (objects) *objects = d.objects;
    if (answers) *answers = d.answers;
    return NMN_OK;
  });
}

int nmn_model_num_scalars(const nmn_model_t *model, size_t *out) {
  return Guard([&]() -> int {
    NMN_REQUIRE(model);
    NMN_REQUIRE(out);
    *out = model->registry.NumScalars();
    return NMN_OK;
  });
}

void nmn_model_destroy(nmn_model_t *model) { delete model; }

int nmn_train(nmn_model_t *model, const nmn_dataset_t *train, const nmn_dataset_t *eval,
              const char *config_json, nmn_progress_fn progress, void *user, nmn_run_t **out) {
  return Guard([&]() -> int {
    NMN_REQUIRE(model);
    NMN_REQUIRE(train);
    NMN_REQUIRE(out);
    const nmn::RunConfig c = Config(config_json);
    const nmn::CurriculumPlan plan = nmn::BuildPlan(c.plan);
    nmn::ProgressFn fn;
    if (progress != nullptr) {
      fn = [&](const nmn::IterationMetrics &m) {
        progress(user, m.iteration, m.difficulty_key.c_str(), m.presentations, m.distinct,
                 m.train_loss,
                 m.eval_accuracy ? *m.eval_accuracy : std::numeric_limits<double>::quiet_NaN());
      };
    }
    nmn::TrainResult r = nmn::Train(plan, train->data, eval ? &eval->data : nullptr,
                                    model->registry, c.train, fn);
    model->registry = std::move(r.final);
    *out = new nmn_run{std::move(r.log), std::move(r.best)};
    return NMN_OK;
  });
}

int nmn_run_metrics_csv(const nmn_run_t *run, char *buf, size_t *len) {
  return Guard([&]() -> int {
    NMN_REQUIRE(run);
    return WriteString(run->log.ToCsv(), buf, len);
  });
}

int nmn_run_summary_json(const nmn_run_t *run, char *buf, size_t *len) {
  return Guard([&]() -> int {
    NMN_REQUIRE(run);
    return WriteString(run->log.ToJson(), buf, len);
  });
}

int nmn_run_best_model(const nmn_run_t *run, nmn_model_t **out) {
  return Guard([&]() -> int {
    NMN_REQUIRE(run);
    NMN_REQUIRE(out);
    *out = new nmn_model{run->best};
    return NMN_OK;
  });
}

void nmn_run_destroy(nmn_run_t *run) { delete run; }

int nmn_evaluate(const nmn_model_t *model, const nmn_dataset_t *dataset, size_t threads,
                 double *accuracy) {
  return Guard([&]() -> int {
    NMN_REQUIRE(model);
    NMN_REQUIRE(dataset);
    NMN_REQUIRE(accuracy);
    *accuracy = nmn::Evaluate(model->registry, dataset->data, threads == 0 ? 1 : threads);
    return NMN_OK;
  });
}

int nmn_execute(const nmn_model_t *model, const nmn_dataset_t *dataset, size_t index,
                const char *program, char *buf, size_t *len) {
  return Guard([&]() -> int {
    NMN_REQUIRE(model);
    NMN_REQUIRE(dataset);
    if (index >= dataset->data.size()) {
      return Fail(NMN_ERR_INVALID_ARGUMENT, "example index " + std::to_string(index) +
                                                " out of range (dataset has " +
                                                std::to_string(dataset->data.size()) + ")");
    }
    nmn::CheckCompatible(model->registry, dataset->data);
    nmn::SceneExample ex = dataset->data.examples[index];
    if (program != nullptr) {
      ex.program = nmn::ParseProgram(program);
      ex.targets.clear();
    }
    const nmn::ExecutionTrace trace = nmn::TraceExample(model->registry, ex, nmn::LossOptions{});
    nlohmann::ordered_json j;
    j["id"] = ex.id;
    j["program"] = nmn::FormatProgram(ex.program);
    j["gold"] = dataset->data.answers.at(ex.gold);
    j["trace"] = TraceJson(trace, ex.program, dataset->data.answers);
    return WriteString(j.dump(2), buf, len);
  });
}

int nmn_gradcheck(const uint64_t *seeds, size_t num_seeds, int *passed, char *buf, size_t *len) {
  return Guard([&]() -> int {
    NMN_REQUIRE(seeds);
    NMN_REQUIRE(passed);
    if (num_seeds == 0) return Fail(NMN_ERR_INVALID_ARGUMENT, "no seeds given");
    const nmn::GradCheckReport report =
        nmn::RunGradCheck(std::vector<uint64_t>(seeds, seeds + num_seeds));
    *passed = report.passed ? 1 : 0;
    nlohmann::ordered_json j;
    j["passed"] = report.passed;
    auto cases = nlohmann::ordered_json::array();
    for (const auto &c : report.cases) {
      cases.push_back({{"name", c.name}, {"seed", c.seed}, {"max_error", c.max_error},
                       {"scalars", c.scalars}, {"passed", c.passed}});
    }
    j["cases"] = cases;
    return WriteString(j.dump(2), buf, len);
  });
}

}  // extern "C"
