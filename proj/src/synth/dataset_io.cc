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

#include "synth/dataset_io.h"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "util/base64.h"

namespace nmn {

using json = nlohmann::json;

namespace {

constexpr const char *kFormat = "nmn-dataset";
constexpr int kVersion = 1;

json RecordToJson(const SceneExample &ex, const Dataset &ds) {
  json args = json::object();
  for (const auto &[word, e] : ex.embeddings) args[word] = EncodeDoubles(e);
  json targets = json::object();
  for (const auto &[step, t] : ex.targets) {
    targets[std::to_string(step)] = {{"type", ValueTypeName(t.type)}, {"values", t.values}};
  }
  return {
      {"id", ex.id},
      {"program", FormatProgram(ex.program)},
      {"V", EncodeDoubles(ex.features.values())},
      {"args", args},
      {"gold", ex.gold},
      {"answer", ex.gold < ds.answers.size() ? ds.answers[ex.gold] : ""},
      {"targets", targets},
      {"metadata",
       {{"objects", ex.metadata.objects},
        {"length", ex.metadata.length},
        {"answer_kind", ModuleName(ex.metadata.answer_kind)}}},
  };
}

ValueType ParseValueType(const std::string &name, int line) {
  if (name == "attention") return ValueType::kAttention;
  if (name == "boolean") return ValueType::kBoolean;
  throw DatasetError(line, "unknown target type '" + name + "'");
}

SceneExample RecordFromJson(const json &j, const Dataset &ds, int line) {
  SceneExample ex;
  ex.id = j.at("id").get<uint64_t>();
  try {
    ex.program = ParseProgram(j.at("program").get<std::string>());
  } catch (const ProgramError &e) {
    throw DatasetError(line, std::string("bad program: ") + e.what());
  }
  const TypeReport types = Validate(ex.program);
  const auto v = DecodeDoubles(j.at("V").get<std::string>());
  if (v.size() != ds.dims.features * ds.dims.objects) {
    throw DatasetError(line, "V has " + std::to_string(v.size()) + " values, expected " +
                                 std::to_string(ds.dims.features * ds.dims.objects));
  }
  ex.features = Matrix(ds.dims.features, ds.dims.objects, v);
  for (const auto &[word, b64] : j.at("args").items()) {
    auto e = DecodeDoubles(b64.get<std::string>());
    if (e.size() != ds.dims.features) throw DatasetError(line, "embedding for '" + word + "' has wrong size");
    ex.embeddings.emplace(word, std::move(e));
  }
  ex.gold = j.at("gold").get<size_t>();
  if (ex.gold >= ds.answers.size()) throw DatasetError(line, "gold index out of range");
  for (const auto &[key, t] : j.at("targets").items()) {
    const int step = std::stoi(key);
    if (step < 0 || static_cast<size_t>(step) + 1 >= ex.program.size()) {
      throw DatasetError(line, "target step " + key + " out of range");
    }
    StepTarget target;
    target.type = ParseValueType(t.at("type").get<std::string>(), line);
    target.values = t.at("values").get<std::vector<double>>();
    if (target.type != types.step_types[static_cast<size_t>(step)]) {
      throw DatasetError(line, "target type of step " + key + " does not match the program");
    }
    const size_t want = target.type == ValueType::kAttention ? ds.dims.objects : 1;
    if (target.values.size() != want) throw DatasetError(line, "target of step " + key + " has wrong size");
    ex.targets.emplace(step, std::move(target));
  }
  const json &meta = j.at("metadata");
  ex.metadata.objects = meta.at("objects").get<int>();
  ex.metadata.length = meta.at("length").get<int>();
  const auto kind = ModuleKindFromName(meta.at("answer_kind").get<std::string>());
  if (!kind) throw DatasetError(line, "unknown answer kind");
  ex.metadata.answer_kind = *kind;
  if (ex.metadata.objects != NumObjects(ex.program) ||
      ex.metadata.length != ProgramLength(ex.program) ||
      ex.metadata.answer_kind != AnswerKind(ex.program)) {
    throw DatasetError(line, "metadata inconsistent with program");
  }
  return ex;
}

}  // namespace

void WriteDataset(const Dataset &ds, std::ostream &out) {
  const json header = {
      {"format", kFormat}, {"version", kVersion},       {"d", ds.dims.features},
      {"k", ds.dims.objects}, {"answers", ds.answers}, {"seed", ds.seed},
      {"count", ds.examples.size()},
  };
  out << header.dump() << '\n';
  for (const SceneExample &ex : ds.examples) out << RecordToJson(ex, ds).dump() << '\n';
}

Dataset ReadDataset(std::istream &in) {
  Dataset ds;
  std::string text;
  int line = 0;
  size_t expected = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error &e) {
      throw DatasetError(line, std::string("invalid JSON: ") + e.what());
    }
    try {
      if (line == 1) {
        if (j.value("format", "") != kFormat) throw DatasetError(line, "not an nmn dataset");
        if (j.value("version", 0) != kVersion) throw DatasetError(line, "unsupported version");
        ds.dims.features = j.at("d").get<size_t>();
        ds.dims.objects = j.at("k").get<size_t>();
        ds.answers = j.at("answers").get<std::vector<std::string>>();
        ds.dims.answers = ds.answers.size();
        ds.seed = j.at("seed").get<uint64_t>();
        expected = j.at("count").get<size_t>();
        if (ds.answers.size() < 2 || ds.answers[0] != "yes" || ds.answers[1] != "no") {
          throw DatasetError(line, "answer vocabulary must start with yes, no");
        }
        continue;
      }
      ds.examples.push_back(RecordFromJson(j, ds, line));
    } catch (const json::exception &e) {
      throw DatasetError(line, std::string("bad field: ") + e.what());
    } catch (const DatasetError &) {
      throw;
    } catch (const Error &e) {
      throw DatasetError(line, e.what());
    } catch (const std::exception &e) {
      throw DatasetError(line, e.what());
    }
  }
  if (line == 0) throw DatasetError(1, "empty file");
  if (ds.examples.size() != expected) {
    throw DatasetError(line, "expected " + std::to_string(expected) + " records, found " +
                                 std::to_string(ds.examples.size()) + " (truncated file?)");
  }
  return ds;
}

void SaveDataset(const Dataset &ds, const std::string &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
  WriteDataset(ds, out);
  if (!out) Fail(ErrorCode::kIo, "write failed: " + path);
}

Dataset LoadDataset(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return ReadDataset(in);
}

}  // namespace nmn
