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

#include "neurofail/target.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "neurofail/error.hpp"

namespace neurofail {

TargetFunction::TargetFunction(std::string name, std::size_t dim, Fn fn, bool check_range)
    : name_(std::move(name)), dim_(dim), fn_(std::move(fn)) {
  if (dim_ == 0) fail(ErrorKind::argument, "target dimension must be positive");
  if (!check_range) return;
  // 17 points per axis up to 3 dims, coarser beyond.
  const std::size_t g = dim_ <= 3 ? 17 : 3;
  std::vector<std::size_t> idx(dim_, 0);
  std::vector<double> x(dim_);
  for (;;) {
    for (std::size_t d = 0; d < dim_; ++d) x[d] = static_cast<double>(idx[d]) / (g - 1);
    const double v = fn_(x);
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      fail(ErrorKind::domain, "target " + name_ + " leaves [0,1] on the domain");
    }
    std::size_t d = 0;
    while (d < dim_ && ++idx[d] == g) idx[d++] = 0;
    if (d == dim_) break;
  }
}

TargetFunction TargetFunction::ridge_sine() {
  return {"ridge_sine", 1, [](std::span<const double> x) {
            return (std::sin(2.0 * std::numbers::pi * x[0]) + 1.0) / 2.0;
          }};
}

TargetFunction TargetFunction::smooth_xor() {
  return {"smooth_xor", 2,
          [](std::span<const double> x) { return x[0] + x[1] - 2.0 * x[0] * x[1]; }};
}

TargetFunction TargetFunction::product() {
  return {"product", 2, [](std::span<const double> x) { return x[0] * x[1]; }};
}

TargetFunction TargetFunction::constant(double c, std::size_t dim) {
  std::ostringstream name;
  name.precision(17);
  name << "constant:" << c;
  return {name.str(), dim, [c](std::span<const double>) { return c; }};
}

TargetFunction TargetFunction::of_network(const Network& net) {
  return {"network", net.input_dim(),
          [net](std::span<const double> x) { return forward(net, x); }, false};
}

TargetFunction TargetFunction::by_name(const std::string& name) {
  if (name == "ridge_sine") return ridge_sine();
  if (name == "smooth_xor") return smooth_xor();
  if (name == "product") return product();
  if (name.rfind("constant:", 0) == 0) {
    try {
      return constant(std::stod(name.substr(9)));
    } catch (const std::logic_error&) {
      fail(ErrorKind::argument, "bad constant target: " + name);
    }
  }
  fail(ErrorKind::argument, "unknown target: " + name);
}

double TargetFunction::operator()(std::span<const double> x) const {
  if (x.size() != dim_) fail(ErrorKind::shape, "target " + name_ + " dimension mismatch");
  return fn_(x);
}

}  // namespace neurofail
