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

#include "program/program.h"

#include <cctype>
#include <map>
#include <optional>

#include "json.hpp"

namespace nmn {

namespace {

struct Position {
  int line = 0;
  int column = 0;
};

std::string Quote(std::string_view s) { return "'" + std::string(s) + "'"; }

std::string StepName(const Program &p, int i) {
  return "step " + std::to_string(i) + " (" +
         std::string(ModuleName(p.steps[i].kind)) + ")";
}

// a0, a1, .. for attention steps, b0.. for boolean, o0.. for answer.
std::vector<std::string> DefaultSlotNames(const std::vector<ModuleKind> &kinds) {
  std::vector<std::string> names(kinds.size());
  int attention = 0;
  int boolean = 0;
  int answer = 0;
  for (size_t i = 0; i < kinds.size(); ++i) {
    switch (Info(kinds[i]).output) {
      case ValueType::kAttention: names[i] = "a" + std::to_string(attention++); break;
      case ValueType::kBoolean: names[i] = "b" + std::to_string(boolean++); break;
      case ValueType::kAnswer: names[i] = "o" + std::to_string(answer++); break;
    }
  }
  return names;
}

TypeReport ValidateAt(const Program &p, const std::vector<Position> *where) {
  auto fail = [&](ProgramErrorKind kind, const std::string &msg, int step) {
    Position pos;
    if (where != nullptr && step >= 0 && step < static_cast<int>(where->size())) {
      pos = (*where)[step];
    }
    throw ProgramError(kind, msg, pos.line, pos.column);
  };

  if (p.steps.empty()) fail(ProgramErrorKind::kEmpty, "empty program", -1);

  const int n = static_cast<int>(p.steps.size());
  TypeReport report;
  report.step_types.reserve(n);
  std::vector<bool> consumed(n, false);
  for (int i = 0; i < n; ++i) {
    const ModuleCall &call = p.steps[i];
    const ModuleInfo &info = Info(call.kind);
    const int nargs = static_cast<int>(call.args.size());
    if (nargs < info.min_args || nargs > info.max_args) {
      fail(ProgramErrorKind::kArgCount,
           StepName(p, i) + " takes " + std::to_string(info.min_args) +
               (info.max_args != info.min_args
                    ? ".." + std::to_string(info.max_args)
                    : "") +
               " text arguments, got " + std::to_string(nargs),
           i);
    }
    for (const std::string &arg : call.args) {
      if (arg.empty()) fail(ProgramErrorKind::kSyntax, StepName(p, i) + " has an empty argument", i);
    }
    if (static_cast<int>(call.deps.size()) != info.arity) {
      fail(ProgramErrorKind::kArity,
           StepName(p, i) + " needs " + std::to_string(info.arity) +
               " dependencies, got " + std::to_string(call.deps.size()),
           i);
    }
    for (size_t j = 0; j < call.deps.size(); ++j) {
      const int d = call.deps[j];
      if (d < 0) {
        fail(ProgramErrorKind::kUnknownSlot,
             StepName(p, i) + " references an unknown slot", i);
      }
      if (d >= i) {
        fail(ProgramErrorKind::kForwardReference,
             StepName(p, i) + " references step " + std::to_string(d) +
                 " which does not precede it",
             i);
      }
      const ValueType want = info.dep_types[j];
      const ValueType got = report.step_types[d];
      if (want != got) {
        std::string name(info.name);
        name[0] = static_cast<char>(std::toupper(name[0]));
        fail(ProgramErrorKind::kTypeMismatch,
             name + " requires " + std::string(ValueTypeName(want)) +
                 " deps: " + StepName(p, d) + " produces " +
                 std::string(ValueTypeName(got)) + " consumed by " +
                 StepName(p, i),
             i);
      }
      consumed[d] = true;
    }
    report.step_types.push_back(info.output);
  }

  int answers = 0;
  for (int i = 0; i < n; ++i) {
    if (report.step_types[i] == ValueType::kAnswer) ++answers;
  }
  if (answers == 0) {
    fail(ProgramErrorKind::kMissingAnswer, "program has no answer module", n - 1);
  }
  if (report.step_types[n - 1] != ValueType::kAnswer || answers > 1) {
    for (int i = 0; i < n - 1; ++i) {
      if (report.step_types[i] == ValueType::kAnswer) {
        fail(ProgramErrorKind::kAnswerNotLast,
             StepName(p, i) + " is an answer module but not the last step", i);
      }
    }
    fail(ProgramErrorKind::kAnswerNotLast, "last step is not an answer module", n - 1);
  }
  for (int i = 0; i < n - 1; ++i) {
    if (!consumed[i]) {
      fail(ProgramErrorKind::kUnusedOutput,
           "output of " + StepName(p, i) + " is never consumed", i);
    }
  }
  return report;
}

// Scanner over the line grammar.
class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Program Parse() {
    struct RawStep {
      ModuleKind kind;
      std::vector<std::string> args;
      std::vector<std::pair<std::string, Position>> refs;
      std::optional<std::string> slot;
      Position where;
    };
    std::vector<RawStep> raw;
    while (true) {
      SkipSeparators();
      if (AtEnd()) break;
      RawStep step;
      step.where = Here();
      const std::string name = Identifier("module name");
      auto kind = ModuleKindFromName(name);
      if (!kind) {
        throw ProgramError(ProgramErrorKind::kUnknownModule,
                           "unknown module " + Quote(name), step.where.line,
                           step.where.column);
      }
      step.kind = *kind;
      SkipBlanks();
      if (Peek() == '[') {
        ++pos_;
        ++column_;
        step.args = Arguments();
        SkipBlanks();
      }
      if (Peek() == '(') {
        Advance();
        SkipBlanks();
        if (Peek() != ')') {
          while (true) {
            SkipBlanks();
            Position at = Here();
            step.refs.emplace_back(Identifier("slot reference"), at);
            SkipBlanks();
            if (Peek() == ',') {
              Advance();
              continue;
            }
            break;
          }
        }
        Expect(')');
        SkipBlanks();
      }
      if (Peek() == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
        Advance();
        Advance();
        SkipBlanks();
        step.slot = Identifier("slot name");
        SkipBlanks();
      }
      if (!AtEnd() && Peek() != ';' && Peek() != '\n' && Peek() != '#' &&
          Peek() != '\r') {
        SyntaxError(std::string("unexpected character ") + Quote(std::string(1, Peek())));
      }
      raw.push_back(std::move(step));
    }

    std::map<std::string, int> slots;
    for (size_t i = 0; i < raw.size(); ++i) {
      if (!raw[i].slot) continue;
      if (!slots.emplace(*raw[i].slot, static_cast<int>(i)).second) {
        throw ProgramError(ProgramErrorKind::kDuplicateSlot,
                           "slot " + Quote(*raw[i].slot) + " defined twice",
                           raw[i].where.line, raw[i].where.column);
      }
    }
    // Steps without "-> slot" get the canonical name unless it is taken.
    std::vector<ModuleKind> kinds;
    for (const RawStep &step : raw) kinds.push_back(step.kind);
    const std::vector<std::string> implicit = DefaultSlotNames(kinds);
    for (size_t i = 0; i < raw.size(); ++i) {
      if (!raw[i].slot) slots.emplace(implicit[i], static_cast<int>(i));
    }

    Program program;
    std::vector<Position> where;
    for (size_t i = 0; i < raw.size(); ++i) {
      ModuleCall call;
      call.kind = raw[i].kind;
      call.args = std::move(raw[i].args);
      for (const auto &[ref, at] : raw[i].refs) {
        auto it = slots.find(ref);
        if (it == slots.end()) {
          throw ProgramError(ProgramErrorKind::kUnknownSlot,
                             "unknown slot " + Quote(ref), at.line, at.column);
        }
        if (it->second >= static_cast<int>(i)) {
          throw ProgramError(ProgramErrorKind::kForwardReference,
                             "slot " + Quote(ref) + " is used before it is defined",
                             at.line, at.column);
        }
        call.deps.push_back(it->second);
      }
      program.steps.push_back(std::move(call));
      where.push_back(raw[i].where);
    }
    ValidateAt(program, &where);
    return program;
  }

 private:
  bool AtEnd() const { return pos_ >= text_.size(); }
  char Peek() const { return AtEnd() ? '\0' : text_[pos_]; }
  Position Here() const { return Position{line_, column_}; }

  void Advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  [[noreturn]] void SyntaxError(const std::string &message) {
    throw ProgramError(ProgramErrorKind::kSyntax, message, line_, column_);
  }

  void SkipBlanks() {
    while (!AtEnd() && (Peek() == ' ' || Peek() == '\t')) Advance();
  }

  void SkipSeparators() {
    while (!AtEnd()) {
      const char c = Peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == ';') {
        Advance();
      } else if (c == '#') {
        while (!AtEnd() && Peek() != '\n') Advance();
      } else {
        break;
      }
    }
  }

  void Expect(char c) {
    if (Peek() != c) {
      SyntaxError(std::string("expected ") + Quote(std::string(1, c)) +
                  (AtEnd() ? " at end of input" : ", found " + Quote(std::string(1, Peek()))));
    }
    Advance();
  }

  static bool IsIdentStart(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }
  static bool IsIdentChar(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string Identifier(const char *what) {
    if (!IsIdentStart(Peek())) {
      SyntaxError(std::string("expected ") + what);
    }
    std::string out;
    while (!AtEnd() && IsIdentChar(Peek())) {
      out.push_back(Peek());
      Advance();
    }
    return out;
  }

  // Bracket contents after '['; consumes the closing ']'. Words inside one
  // argument are joined by single spaces.
  std::vector<std::string> Arguments() {
    std::vector<std::string> args;
    std::string current;
    bool pending_space = false;
    while (true) {
      if (AtEnd() || Peek() == '\n') SyntaxError("unterminated argument list");
      const char c = Peek();
      if (c == ']' || c == ',') {
        if (current.empty()) SyntaxError("empty argument");
        args.push_back(current);
        current.clear();
        pending_space = false;
        Advance();
        if (c == ']') break;
        continue;
      }
      if (c == ' ' || c == '\t') {
        pending_space = !current.empty();
        Advance();
        continue;
      }
      if (c == '[' || c == '(' || c == ')' || c == ';' || c == '#') {
        SyntaxError(std::string("unexpected ") + Quote(std::string(1, c)) +
                    " in argument list");
      }
      if (pending_space) current.push_back(' ');
      pending_space = false;
      current.push_back(c);
      Advance();
    }
    return args;
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

}  // namespace

std::string_view ProgramErrorKindName(ProgramErrorKind kind) {
  switch (kind) {
    case ProgramErrorKind::kSyntax: return "syntax";
    case ProgramErrorKind::kEmpty: return "empty";
    case ProgramErrorKind::kUnknownModule: return "unknown_module";
    case ProgramErrorKind::kArgCount: return "arg_count";
    case ProgramErrorKind::kArity: return "arity";
    case ProgramErrorKind::kUnknownSlot: return "unknown_slot";
    case ProgramErrorKind::kDuplicateSlot: return "duplicate_slot";
    case ProgramErrorKind::kForwardReference: return "forward_reference";
    case ProgramErrorKind::kTypeMismatch: return "type_mismatch";
    case ProgramErrorKind::kMissingAnswer: return "missing_answer";
    case ProgramErrorKind::kAnswerNotLast: return "answer_not_last";
    case ProgramErrorKind::kUnusedOutput: return "unused_output";
  }
  return "?";
}

namespace {

std::string WithPosition(const std::string &message, int line, int column) {
  if (line <= 0) return message;
  return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

}  // namespace

ProgramError::ProgramError(ProgramErrorKind kind, const std::string &message,
                           int line, int column)
    : Error(kind == ProgramErrorKind::kTypeMismatch ? ErrorCode::kType
                                                    : ErrorCode::kParse,
            WithPosition(message, line, column)),
      kind_(kind),
      line_(line),
      column_(column) {}

Program ParseProgram(std::string_view text) { return Parser(text).Parse(); }

TypeReport Validate(const Program &p) { return ValidateAt(p, nullptr); }

std::string FormatProgram(const Program &p) {
  std::vector<ModuleKind> kinds;
  for (const ModuleCall &call : p.steps) kinds.push_back(call.kind);
  const std::vector<std::string> names = DefaultSlotNames(kinds);
  std::string out;
  for (size_t i = 0; i < p.steps.size(); ++i) {
    const ModuleCall &call = p.steps[i];
    if (i > 0) out += " ; ";
    out += ModuleName(call.kind);
    if (!call.args.empty()) {
      out += "[";
      for (size_t j = 0; j < call.args.size(); ++j) {
        if (j > 0) out += ",";
        out += call.args[j];
      }
      out += "]";
    }
    if (!call.deps.empty()) {
      out += "(";
      for (size_t j = 0; j < call.deps.size(); ++j) {
        if (j > 0) out += ",";
        const int d = call.deps[j];
        out += (d >= 0 && d < static_cast<int>(names.size())) ? names[d] : "?";
      }
      out += ")";
    }
    if (i + 1 < p.steps.size()) out += " -> " + names[i];
  }
  return out;
}

std::string ProgramToJson(const Program &p) {
  nlohmann::json steps = nlohmann::json::array();
  for (const ModuleCall &call : p.steps) {
    steps.push_back({{"module", std::string(ModuleName(call.kind))},
                     {"args", call.args},
                     {"deps", call.deps}});
  }
  return nlohmann::json{{"steps", steps}}.dump();
}

Program ProgramFromJson(std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception &e) {
    throw ProgramError(ProgramErrorKind::kSyntax, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("steps") || !doc["steps"].is_array()) {
    throw ProgramError(ProgramErrorKind::kSyntax, "expected an object with a \"steps\" array");
  }
  Program program;
  int index = 0;
  for (const auto &step : doc["steps"]) {
    const std::string where = "steps[" + std::to_string(index++) + "]";
    if (!step.is_object() || !step.contains("module") || !step["module"].is_string()) {
      throw ProgramError(ProgramErrorKind::kSyntax, where + ": missing \"module\"");
    }
    const std::string name = step["module"].get<std::string>();
    auto kind = ModuleKindFromName(name);
    if (!kind) {
      throw ProgramError(ProgramErrorKind::kUnknownModule, where + ": unknown module " + Quote(name));
    }
    ModuleCall call;
    call.kind = *kind;
    try {
      if (step.contains("args")) call.args = step["args"].get<std::vector<std::string>>();
      if (step.contains("deps")) call.deps = step["deps"].get<std::vector<int>>();
    } catch (const nlohmann::json::exception &e) {
      throw ProgramError(ProgramErrorKind::kSyntax, where + ": " + e.what());
    }
    program.steps.push_back(std::move(call));
  }
  Validate(program);
  return program;
}

int NumObjects(const Program &p) {
  int count = 0;
  for (const ModuleCall &call : p.steps) {
    if (call.kind == ModuleKind::kSelect) ++count;
  }
  return count;
}

int ProgramLength(const Program &p) { return static_cast<int>(p.steps.size()); }

ModuleKind AnswerKind(const Program &p) {
  if (p.steps.empty()) throw ProgramError(ProgramErrorKind::kEmpty, "empty program");
  return p.steps.back().kind;
}

}  // namespace nmn
