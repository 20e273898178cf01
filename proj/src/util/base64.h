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

#ifndef NMN_UTIL_BASE64_H_
#define NMN_UTIL_BASE64_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nmn {

// Standard alphabet with '=' padding.
std::string Base64Encode(std::span<const unsigned char> bytes);
// Throws ErrorCode::kParse on malformed input.
std::vector<unsigned char> Base64Decode(std::string_view text);

// Little-endian IEEE-754 doubles.
std::string EncodeDoubles(std::span<const double> values);
std::vector<double> DecodeDoubles(std::string_view text);

}  // namespace nmn

#endif  // NMN_UTIL_BASE64_H_
