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

// Command-line front end over the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nmn/nmn.h"

namespace {

using json = nlohmann::json;

enum Exit { kOk = 0, kOther = 1, kConfigError = 2, kDataError = 3, kNumericalError = 4 };

int ExitFor(int status) {
  switch (status) {
    case NMN_OK: return kOk;
    case NMN_ERR_CONFIG: return kConfigError;
    case NMN_ERR_DATA:
    case NMN_ERR_IO:
    case NMN_ERR_PARSE:
    case NMN_ERR_TYPE: return kDataError;
    case NMN_ERR_NUMERICAL: return kNumericalError;
    default: return kOther;
  }
}

struct Failure {
  int exit_code;
};

void Check(int status, const std::string &what) {
  if (status == NMN_OK) return;
  std::cerr << "error: " << what << ": " << nmn_last_error() << " [" << nmn_status_name(status)
            << "]\n";
  throw Failure{ExitFor(status)};
}

// Calls an API function writing into a caller buffer, growing it as needed.
template <typename Fn>
std::string Text(const std::string &what, Fn fn) {
  std::vector<char> buf(4096);
  size_t len = buf.size();
  int status = fn(buf.data(), &len);
  if (status == NMN_ERR_INSUFFICIENT_BUFFER) {
    buf.resize(len);
    status = fn(buf.data(), &len);
  }
  Check(status, what);
  return std::string(buf.data(), len);
}

void ConfigFail(const std::string &msg) {
  std::cerr << "error: " << msg << "\n";
  throw Failure{kConfigError};
}

json ReadConfigFile(const std::string &path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) ConfigFail("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    ConfigFail("config file " + path + " is not valid JSON: " + e.what());
  }
  return {};
}

void WriteFile(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    throw Failure{kDataError};
  }
}

std::string Resolve(const json &config) {
  const std::string text = config.dump();
  return Text("config", [&](char *b, size_t *l) { return nmn_config_resolve(text.c_str(), b, l); });
}

struct Handle {
  nmn_dataset_t *ds = nullptr;
  ~Handle() { nmn_dataset_destroy(ds); }
};
struct ModelHandle {
  nmn_model_t *m = nullptr;
  ~ModelHandle() { nmn_model_destroy(m); }
};
struct RunHandle {
  nmn_run_t *r = nullptr;
  ~RunHandle() { nmn_run_destroy(r); }
};

// Flags shared by plan and train; unset flags leave the config untouched.
struct PlanFlags {
  bool cl = false, random = false, unbalanced = false, balanced = false, length = false;
  std::string weighting;
  int pretrain = -1, repeat = -1, iterations = -1, max_objects = -1;
  long long sample_size = -1;
  double replay = -1.0;

  void Add(CLI::App *app) {
    app->add_flag("--cl", cl, "curriculum strategy");
    app->add_flag("--random", random, "Random baseline: uniform draws with replacement");
    app->add_flag("--unbalanced", unbalanced, "Unbalanced baseline: full passes");
    app->add_flag("--balanced", balanced, "Balanced baseline: full passes over an answer-balanced subset");
    app->add_flag("--length", length, "split each level into short/medium/long programs (L)");
    app->add_option("--weighting", weighting, "uniform, a (answer kinds) or b (module losses)")
        ->check(CLI::IsMember({"uniform", "a", "b", "answer", "losses"}));
    app->add_option("--pretrain", pretrain, "pretrain iterations (P)");
    app->add_option("--repeat", repeat, "repetitions per level (R)");
    app->add_option("--iterations", iterations, "baseline iterations");
    app->add_option("--sample-size", sample_size, "draws per iteration (S)");
    app->add_option("--replay", replay, "replay fraction");
    app->add_option("--max-objects", max_objects, "highest object level");
  }

  void Apply(json &config) const {
    const int strategies = cl + random + unbalanced + balanced;
    if (strategies > 1) ConfigFail("choose at most one of --cl, --random, --unbalanced, --balanced");
    json &plan = config["plan"];
    if (cl) plan["strategy"] = "curriculum";
    if (random) plan["strategy"] = "random";
    if (unbalanced) plan["strategy"] = "unbalanced";
    if (balanced) plan["strategy"] = "balanced";
    if (length) plan["length_refinement"] = true;
    if (!weighting.empty()) plan["weighting"] = weighting;
    if (pretrain >= 0) plan["pretrain"] = pretrain;
    if (repeat >= 0) plan["repeat"] = repeat;
    if (iterations >= 0) plan["iterations"] = iterations;
    if (sample_size >= 0) plan["sample_size"] = sample_size;
    if (replay >= 0.0) plan["replay_fraction"] = replay;
    if (max_objects >= 0) plan["max_objects"] = max_objects;
    if (plan.is_null()) config.erase("plan");
  }
};

int GenData(const std::string &config_path, const std::string &out_dir, const json &overrides) {
  json config = ReadConfigFile(config_path);
  config["generator"].update(overrides);
  const std::string resolved = Resolve(config);
  std::filesystem::create_directories(out_dir);
  for (int test = 0; test < 2; ++test) {
    Handle h;
    Check(nmn_dataset_generate(resolved.c_str(), test, &h.ds), "generate");
    const std::string path = (std::filesystem::path(out_dir) / (test ? "test.jsonl" : "train.jsonl")).string();
    Check(nmn_dataset_save(h.ds, path.c_str()), "save " + path);
    size_t n = 0;
    nmn_dataset_size(h.ds, &n);
    std::cout << "wrote " << n << " examples to " << path << "\n";
    if (!test) {
      const std::string census =
          Text("census", [&](char *b, size_t *l) { return nmn_dataset_census(h.ds, b, l); });
      WriteFile(std::filesystem::path(out_dir) / "census.json", census + "\n");
    }
  }
  WriteFile(std::filesystem::path(out_dir) / "generator_config.json", resolved);
  return kOk;
}

int Plan(const std::string &config_path, const PlanFlags &flags, size_t pool_size, bool as_json) {
  json config = ReadConfigFile(config_path);
  flags.Apply(config);
  const std::string resolved = Resolve(config);
  const std::string text = Text("plan", [&](char *b, size_t *l) {
    return nmn_plan_describe(resolved.c_str(), pool_size, b, l);
  });
  if (as_json) {
    std::cout << text << "\n";
    return kOk;
  }
  const json plan = json::parse(text);
  std::printf("%-5s %-11s %-18s %-9s %-10s %8s %7s\n", "iter", "kind", "difficulty", "weighting",
              "mode", "draws", "replay");
  const int pretrain = plan["pretrain_iterations"].get<int>();
  for (const auto &row : plan["iterations"]) {
    const int index = row["index"].get<int>();
    const std::string label = index <= pretrain ? "[" + std::to_string(index) + "]" : std::to_string(index);
    std::printf("%-5s %-11s %-18s %-9s %-10s %8zu %7zu\n", label.c_str(),
                row["kind"].get<std::string>().c_str(), row["label"].get<std::string>().c_str(),
                row["weighting"].get<std::string>().c_str(), row["mode"].get<std::string>().c_str(),
                row["sample_size"].get<size_t>(), row["replay"].get<size_t>());
  }
  const size_t total = plan["iterations"].size();
  std::printf("iterations: [%d]+%zu\nscheduled cost: %zu presentations\n", pretrain,
              total - static_cast<size_t>(pretrain), plan["scheduled_cost"].get<size_t>());
  return kOk;
}

void Progress(void *, int iteration, const char *key, size_t presentations, size_t distinct,
              double loss, double accuracy) {
  std::fprintf(stderr, "iter %3d  %-18s presentations %8zu  distinct %7zu  loss %.4f", iteration,
               key, presentations, distinct, loss);
  if (!std::isnan(accuracy)) std::fprintf(stderr, "  acc %.4f", accuracy);
  std::fprintf(stderr, "\n");
}

int Train(const std::string &config_path, const PlanFlags &flags, const json &train_overrides,
          const json &top_overrides, const std::string &init) {
  json config = ReadConfigFile(config_path);
  flags.Apply(config);
  config["train"].update(train_overrides);
  for (const auto &[key, value] : top_overrides.items()) {
    if (key == "data") {
      config["data"].update(value);
    } else if (key == "model") {
      config["model"].update(value);
    } else {
      config[key] = value;
    }
  }
  const std::string resolved = Resolve(config);
  const json rc = json::parse(resolved);
  const std::string train_path = rc["data"]["train"].get<std::string>();
  const std::string test_path = rc["data"]["test"].get<std::string>();
  if (train_path.empty()) ConfigFail("no training data: set data.train or pass --train");
  const std::filesystem::path out = rc["output_dir"].get<std::string>();
  std::filesystem::create_directories(out);
  WriteFile(out / "config.json", resolved);

  Handle train, test;
  Check(nmn_dataset_load(train_path.c_str(), &train.ds), "load " + train_path);
  if (!test_path.empty()) Check(nmn_dataset_load(test_path.c_str(), &test.ds), "load " + test_path);
  ModelHandle model;
  if (init.empty()) {
    Check(nmn_model_create(train.ds, resolved.c_str(), &model.m), "create model");
  } else {
    Check(nmn_model_load(init.c_str(), &model.m), "load " + init);
  }
  RunHandle run;
  Check(nmn_train(model.m, train.ds, test.ds, resolved.c_str(), Progress, nullptr, &run.r), "train");
  WriteFile(out / "metrics.csv",
            Text("metrics", [&](char *b, size_t *l) { return nmn_run_metrics_csv(run.r, b, l); }));
  const std::string summary =
      Text("summary", [&](char *b, size_t *l) { return nmn_run_summary_json(run.r, b, l); });
  WriteFile(out / "summary.json", summary);
  Check(nmn_model_save(model.m, (out / "final.ckpt").string().c_str()), "save final checkpoint");
  ModelHandle best;
  Check(nmn_run_best_model(run.r, &best.m), "best model");
  Check(nmn_model_save(best.m, (out / "best.ckpt").string().c_str()), "save best checkpoint");
  const json s = json::parse(summary);
  for (const auto &w : s["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
  std::cout << "best accuracy: "
            << (s["best_accuracy"].is_null() ? std::string("n/a") : s["best_accuracy"].dump())
            << " at iteration " << s["best_iteration"] << "\n"
            << "presentations: " << s["presentations"] << ", distinct: " << s["distinct"] << "\n"
            << "run directory: " << out.string() << "\n";
  return kOk;
}

int Eval(const std::string &model_path, const std::string &data_path, size_t threads) {
  ModelHandle model;
  Check(nmn_model_load(model_path.c_str(), &model.m), "load " + model_path);
  Handle data;
  Check(nmn_dataset_load(data_path.c_str(), &data.ds), "load " + data_path);
  double acc = 0.0;
  Check(nmn_evaluate(model.m, data.ds, threads, &acc), "evaluate");
  size_t n = 0;
  nmn_dataset_size(data.ds, &n);
  std::printf("accuracy: %.6f (%zu examples)\n", acc, n);
  return kOk;
}

int Exec(const std::string &model_path, const std::string &data_path, size_t index,
         const std::string &program) {
  ModelHandle model;
  Check(nmn_model_load(model_path.c_str(), &model.m), "load " + model_path);
  Handle data;
  Check(nmn_dataset_load(data_path.c_str(), &data.ds), "load " + data_path);
  std::cout << Text("exec", [&](char *b, size_t *l) {
    return nmn_execute(model.m, data.ds, index, program.empty() ? nullptr : program.c_str(), b, l);
  }) << "\n";
  return kOk;
}

int GradCheck(std::vector<uint64_t> seeds, bool as_json) {
  if (seeds.empty()) seeds = {1, 2, 3, 4, 5};
  int passed = 0;
  const std::string text = Text("gradcheck", [&](char *b, size_t *l) {
    return nmn_gradcheck(seeds.data(), seeds.size(), &passed, b, l);
  });
  if (as_json) {
    std::cout << text << "\n";
  } else {
    const json report = json::parse(text);
    for (const auto &c : report["cases"]) {
      std::printf("%-4s %-16s seed %-4llu max rel error %.3e (%zu coords)\n",
                  c["passed"].get<bool>() ? "ok" : "FAIL", c["name"].get<std::string>().c_str(),
                  static_cast<unsigned long long>(c["seed"].get<uint64_t>()),
                  c["max_error"].get<double>(), c["scalars"].get<size_t>());
    }
    std::printf("%s\n", passed ? "gradient check passed" : "gradient check FAILED");
  }
  return passed ? kOk : kNumericalError;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Neural module network curriculum training"};
  app.require_subcommand(1);
  app.set_version_flag("--version", nmn_version());

  std::string config_path;

  auto *gen = app.add_subcommand("gen-data", "generate synthetic train/test datasets");
  std::string gen_out = "data";
  long long gen_seed = -1, gen_test_seed = -1, gen_features = -1, gen_objects = -1, gen_threads = -1;
  double gen_noise = -1.0, gen_gain = -1.0;
  std::vector<size_t> gen_counts, gen_test_counts;
  gen->add_option("--config", config_path, "JSON run config");
  gen->add_option("--out-dir", gen_out, "output directory (train.jsonl, test.jsonl)");
  gen->add_option("--seed", gen_seed, "train set seed");
  gen->add_option("--test-seed", gen_test_seed, "test set seed");
  gen->add_option("--features", gen_features, "feature size d");
  gen->add_option("--objects", gen_objects, "objects per scene k");
  gen->add_option("--noise", gen_noise, "feature noise sigma");
  gen->add_option("--gain", gen_gain, "multiplier on features and word embeddings");
  gen->add_option("--counts", gen_counts, "train examples per level")->delimiter(',');
  gen->add_option("--test-counts", gen_test_counts, "test examples per level")->delimiter(',');
  gen->add_option("--threads", gen_threads, "worker threads");

  auto *plan = app.add_subcommand("plan", "print the iteration table and scheduled cost");
  PlanFlags plan_flags;
  size_t pool_size = 0;
  bool plan_json = false;
  plan->add_option("--config", config_path, "JSON run config");
  plan_flags.Add(plan);
  plan->add_option("--pool-size", pool_size, "pool size charged for full-pass iterations");
  plan->add_flag("--json", plan_json, "print JSON");

  auto *train = app.add_subcommand("train", "train a model and write a run directory");
  PlanFlags train_flags;
  std::string train_data, test_data, out_dir, init;
  double lr = -1.0, lambda = -1.0;
  long long batch = -1, seed = -1, model_seed = -1, threads = -1, eval_every = -1;
  train->add_option("--config", config_path, "JSON run config");
  train_flags.Add(train);
  train->add_option("--train", train_data, "training dataset (JSONL)");
  train->add_option("--test", test_data, "evaluation dataset (JSONL)");
  train->add_option("--out", out_dir, "run directory");
  train->add_option("--init", init, "initial checkpoint");
  train->add_option("--lr", lr, "learning rate");
  train->add_option("--batch-size", batch, "batch size");
  train->add_option("--lambda", lambda, "intermediate loss weight");
  train->add_option("--seed", seed, "sampling seed");
  train->add_option("--model-seed", model_seed, "parameter init seed");
  train->add_option("--threads", threads, "worker threads (1 = reproducible)");
  train->add_option("--eval-every", eval_every, "evaluation cadence in iterations");

  auto *eval = app.add_subcommand("eval", "report accuracy of a checkpoint on a dataset");
  std::string eval_model, eval_data;
  size_t eval_threads = 1;
  eval->add_option("--model", eval_model, "checkpoint")->required();
  eval->add_option("--data", eval_data, "dataset (JSONL)")->required();
  eval->add_option("--threads", eval_threads, "worker threads");

  auto *exec = app.add_subcommand("exec", "print the execution trace of one example");
  std::string exec_model, exec_data, exec_program;
  size_t exec_index = 0;
  exec->add_option("--model", exec_model, "checkpoint")->required();
  exec->add_option("--data", exec_data, "dataset (JSONL)")->required();
  exec->add_option("--index", exec_index, "example index");
  exec->add_option("--program", exec_program, "program text replacing the example's own");

  auto *grad = app.add_subcommand("gradcheck", "finite-difference gradient suite");
  std::vector<uint64_t> grad_seeds;
  bool grad_json = false;
  grad->add_option("--seed", grad_seeds, "seed (repeatable; default 1..5)");
  grad->add_flag("--json", grad_json, "print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*gen) {
      json o = json::object();
      if (gen_seed >= 0) o["seed"] = gen_seed;
      if (gen_test_seed >= 0) o["test_seed"] = gen_test_seed;
      if (gen_features >= 0) o["features"] = gen_features;
      if (gen_objects >= 0) o["objects"] = gen_objects;
      if (gen_noise >= 0.0) o["noise"] = gen_noise;
      if (gen_gain > 0.0) o["gain"] = gen_gain;
      if (!gen_counts.empty()) o["level_counts"] = gen_counts;
      if (!gen_test_counts.empty()) o["test_level_counts"] = gen_test_counts;
      if (gen_threads >= 0) o["threads"] = gen_threads;
      return GenData(config_path, gen_out, o);
    }
    if (*plan) return Plan(config_path, plan_flags, pool_size, plan_json);
    if (*train) {
      json t = json::object();
      if (lr >= 0.0) t["learning_rate"] = lr;
      if (batch >= 0) t["batch_size"] = batch;
      if (lambda >= 0.0) t["lambda"] = lambda;
      if (seed >= 0) t["seed"] = seed;
      if (threads >= 0) t["threads"] = threads;
      if (eval_every >= 0) t["eval_every"] = eval_every;
      json top = json::object();
      if (!train_data.empty()) top["data"]["train"] = train_data;
      if (!test_data.empty()) top["data"]["test"] = test_data;
      if (!out_dir.empty()) top["output_dir"] = out_dir;
      if (model_seed >= 0) top["model"]["seed"] = model_seed;
      return Train(config_path, train_flags, t, top, init);
    }
    if (*eval) return Eval(eval_model, eval_data, eval_threads);
    if (*exec) return Exec(exec_model, exec_data, exec_index, exec_program);
    if (*grad) return GradCheck(grad_seeds, grad_json);
  } catch (const Failure &f) {
    return f.exit_code;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
