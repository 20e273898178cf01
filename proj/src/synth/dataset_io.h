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

#ifndef NMN_SYNTH_DATASET_IO_H_
#define NMN_SYNTH_DATASET_IO_H_

#include <iosfwd>
#include <string>

#include "executor/example.h"
#include "util/error.h"

namespace nmn {

// Malformed dataset file. line is 1-based (the header is line 1).
class DatasetError : public Error {
 public:
  DatasetError(int line, const std::string &message)
      : Error(ErrorCode::kData, "line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// JSON lines: one header object, then one record per example
// (docs/dataset_format.md).
void WriteDataset(const Dataset &ds, std::ostream &out);
Dataset ReadDataset(std::istream &in);

void SaveDataset(const Dataset &ds, const std::string &path);
Dataset LoadDataset(const std::string &path);

}  // namespace nmn

#endif  // NMN_SYNTH_DATASET_IO_H_
