// Copyright 2026 The neurofail Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace neurofail {

enum class ErrorKind {
  domain,     // non-finite or out-of-range numeric input
  shape,      // dimension mismatch
  parse,      // malformed document
  scenario,   // fault scenario does not fit the network
  policy,     // Byzantine policy has no finite realization
  argument,   // precondition on scalar arguments
  cap,        // enumeration or search cap exceeded
  training,   // divergence during training
  violation,  // an asserted bound was violated
  io,
};

const char* to_string(ErrorKind kind) noexcept;

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

}  // namespace neurofail
