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

#ifndef NMN_UTIL_ERROR_H_
#define NMN_UTIL_ERROR_H_

#include <stdexcept>
#include <string>

namespace nmn {

// Error categories. They map one-to-one onto the C API status codes and
// the CLI exit codes.
enum class ErrorCode {
  kInvalidArgument,
  kShape,
  kParse,
  kType,
  kConfig,
  kData,
  kIo,
  kNumerical,
  kOracle,
  kState,
};

const char *ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string &message) {
  throw Error(code, message);
}

}  // namespace nmn

#endif  // NMN_UTIL_ERROR_H_
