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

#ifndef NMN_PROGRAM_PROGRAM_H_
#define NMN_PROGRAM_PROGRAM_H_

#include <string>
#include <string_view>
#include <vector>

#include "program/module_kind.h"
#include "util/error.h"

namespace nmn {

// One module application. Step i of a program writes slot i of the memory
// buffer; deps name earlier slots.
struct ModuleCall {
  ModuleKind kind = ModuleKind::kSelect;
  std::vector<std::string> args;
  std::vector<int> deps;

  bool operator==(const ModuleCall &other) const = default;
};

struct Program {
  std::vector<ModuleCall> steps;

  size_t size() const { return steps.size(); }
  const ModuleCall &operator[](size_t i) const { return steps[i]; }
  bool operator==(const Program &other) const = default;
};

enum class ProgramErrorKind {
  kSyntax,
  kEmpty,
  kUnknownModule,
  kArgCount,
  kArity,
  kUnknownSlot,
  kDuplicateSlot,
  kForwardReference,
  kTypeMismatch,
  kMissingAnswer,
  kAnswerNotLast,
  kUnusedOutput,
};

std::string_view ProgramErrorKindName(ProgramErrorKind kind);

// Parse or validation failure. line and column are 1-based; zero when the
// error is not tied to a source position.
class ProgramError : public Error {
 public:
  ProgramError(ProgramErrorKind kind, const std::string &message, int line = 0,
               int column = 0);

  ProgramErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  ProgramErrorKind kind_;
  int line_;
  int column_;
};

// Resolved output type per step.
struct TypeReport {
  std::vector<ValueType> step_types;
};

// Parses the line grammar (see docs/program_dsl.md) and validates the
// result. Steps are separated by ';' or newlines.
Program ParseProgram(std::string_view text);

// Throws ProgramError unless p is structurally valid and well typed.
TypeReport Validate(const Program &p);

// Canonical text form; slots are named a0.., b0.. by output type.
std::string FormatProgram(const Program &p);

// JSON mirror: {"steps":[{"module":..,"args":[..],"deps":[..]}, ..]}.
std::string ProgramToJson(const Program &p);
Program ProgramFromJson(std::string_view json);

// Number of object-introducing (select) steps.
int NumObjects(const Program &p);
int ProgramLength(const Program &p);
// Kind of the final (answer) step.
ModuleKind AnswerKind(const Program &p);

}  // namespace nmn

#endif  // NMN_PROGRAM_PROGRAM_H_
