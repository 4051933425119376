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

#include "neurofail/rng.hpp"

#include <cmath>
#include <limits>

#include "neurofail/error.hpp"

namespace neurofail {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::shape: return "shape";
    case ErrorKind::parse: return "parse";
    case ErrorKind::scenario: return "scenario";
    case ErrorKind::policy: return "policy";
    case ErrorKind::argument: return "argument";
    case ErrorKind::cap: return "cap";
    case ErrorKind::training: return "training";
    case ErrorKind::violation: return "violation";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the result unbiased for every n.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v = engine_();
  while (v >= limit) v = engine_();
  return v % n;
}

double Rng::exponential(double mean) {
  // 1 - u lies in (0, 1], so the log is finite.
  return -mean * std::log1p(-uniform());
}

}  // namespace neurofail
