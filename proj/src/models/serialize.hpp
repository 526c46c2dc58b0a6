// Copyright 2026 The metaloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef METALOOP_MODELS_SERIALIZE_HPP
#define METALOOP_MODELS_SERIALIZE_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "models/paramset.hpp"

namespace metaloop {

inline constexpr std::string_view kParamMagic = "MLPS1";

// Container layout:
//
//   MLPS1\n
//   entries <N>\n
//   <name> <byte offset> <rank> <d0> ... <dk>\n      (N lines)
//   data <byte count>\n
//   <little-endian float64 payload>
//
// Offsets are relative to the first payload byte. Names must not contain
// whitespace.
void write_tensors(std::ostream& os, const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> read_tensors(std::istream& is);

void save_tensors(const std::string& path, const std::vector<NamedTensor>& entries);
/// Loaded tensors are constants; callers promote parameters as needed.
std::vector<NamedTensor> load_tensors(const std::string& path);

}  // namespace metaloop

#endif  // METALOOP_MODELS_SERIALIZE_HPP
