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

#ifndef METALOOP_COMMON_ERROR_HPP
#define METALOOP_COMMON_ERROR_HPP

#include <stdexcept>
#include <string>

namespace metaloop {

enum class ErrorKind {
  invalid_argument,
  shape,
  config,
  io,
  data,
  numeric,
};

/// Base exception for everything the core throws. The C API maps `kind()`
/// onto its status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace metaloop

#endif  // METALOOP_COMMON_ERROR_HPP
