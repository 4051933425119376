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

#include <functional>
#include <span>
#include <string>

#include "neurofail/net.hpp"

namespace neurofail {

/// Continuous map [0,1]^d -> [0,1] that a network approximates.
class TargetFunction {
 public:
  using Fn = std::function<double(std::span<const double>)>;

  /// Registers a target; unless `check_range` is false the evaluator is
  /// sampled on a grid and must stay within [0,1].
  TargetFunction(std::string name, std::size_t dim, Fn fn, bool check_range = true);

  /// (sin(2 pi x) + 1) / 2 on [0,1].
  static TargetFunction ridge_sine();
  /// Bilinear interpolation of XOR: x1 + x2 - 2 x1 x2.
  static TargetFunction smooth_xor();
  /// x1 * x2.
  static TargetFunction product();
  static TargetFunction constant(double c, std::size_t dim = 1);
  /// The network itself as a target (range not checked).
  static TargetFunction of_network(const Network& net);

  /// ridge_sine | smooth_xor | product | constant:<c>
  static TargetFunction by_name(const std::string& name);

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::span<const double> x) const;

 private:
  std::string name_;
  std::size_t dim_;
  Fn fn_;
};

}  // namespace neurofail
