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

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace neurofail {

using Json = nlohmann::json;

enum class ActivationKind { sigmoid, tanh };

/// K-tuned squashing function. sigmoid is evaluated as sigmoid(4Kx) and tanh
/// as tanh(Kx); both have Lipschitz constant exactly K, attained at 0.
class ActivationSpec {
 public:
  ActivationSpec(ActivationKind kind, double k);

  ActivationKind kind() const noexcept { return kind_; }
  double k() const noexcept { return k_; }

  /// Checked evaluation; throws a domain error for non-finite x.
  double operator()(double x) const;
  double eval(double x) const noexcept;
  double derivative(double x) const noexcept;
  /// Largest absolute value the function approaches (1 for both kinds).
  double sup_abs() const noexcept { return 1.0; }

  ActivationSpec with_k(double k) const { return {kind_, k}; }

  bool operator==(const ActivationSpec&) const = default;

 private:
  ActivationKind kind_;
  double k_;
};

const char* to_string(ActivationKind kind) noexcept;

/// Dense row-major matrix. Row j holds the weights into receiving neuron j.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct Layer {
  Matrix weights;
  /// Bias neuron: outputs the constant 1, its incoming row is ignored.
  std::optional<std::size_t> constant_neuron;

  std::size_t size() const noexcept { return weights.rows(); }
  bool is_constant(std::size_t j) const noexcept {
    return constant_neuron && *constant_neuron == j;
  }

  bool operator==(const Layer&) const = default;
};

struct NetworkParts {
  std::size_t input_dim = 0;
  /// Appends a constant 1 to the input so layer 1 can carry a bias; the
  /// layer-1 matrix then has input_dim + 1 columns.
  bool input_bias = false;
  std::vector<Layer> layers;
  std::vector<double> output_weights;
  ActivationSpec activation{ActivationKind::sigmoid, 1.0};
  /// When set, every non-constant neuron output is rounded to the nearest
  /// multiple of 2^-bits.
  std::optional<int> quantization_bits;
  Json metadata = Json::object();
};

/// Feed-forward network with a linear output node. Immutable once built;
/// modify a copy of parts() and construct a new Network.
class Network {
 public:
  explicit Network(NetworkParts parts);

  const NetworkParts& parts() const noexcept { return p_; }
  std::size_t input_dim() const noexcept { return p_.input_dim; }
  bool input_bias() const noexcept { return p_.input_bias; }
  std::size_t num_layers() const noexcept { return p_.layers.size(); }
  /// Layer at 0-based position i (layer i+1 in 1-based numbering).
  const Layer& layer(std::size_t i) const { return p_.layers.at(i); }
  const std::vector<Layer>& layers() const noexcept { return p_.layers; }
  const std::vector<double>& output_weights() const noexcept { return p_.output_weights; }
  const ActivationSpec& activation() const noexcept { return p_.activation; }
  const std::optional<int>& quantization_bits() const noexcept {
    return p_.quantization_bits;
  }
  const Json& metadata() const noexcept { return p_.metadata; }

  /// Number of senders into the layer at 0-based position i.
  std::size_t fan_in(std::size_t i) const;
  std::size_t total_neurons() const;

  bool operator==(const Network& o) const;

 private:
  NetworkParts p_;
};

/// Rejects wrong dimension (shape) and components outside [0,1] or non-finite
/// (domain).
void check_input(const Network& net, std::span<const double> x);

/// Applies rounding to an activation value when the network is quantized.
double quantize_output(const Network& net, double y) noexcept;

/// Layer outputs y^(1..L) for input x, each vector sized N_l.
std::vector<std::vector<double>> forward_layers(const Network& net,
                                                std::span<const double> x);

/// F_neu(x) = sum_i w_i^(L+1) y_i^(L).
double forward(const Network& net, std::span<const double> x);

/// Max |incoming weight| per layer 1..L, then max |output weight|; length L+1.
/// Rows of constant neurons are skipped since they are never read.
std::vector<double> max_weights(const Network& net);

Json to_json(const Network& net);
Network network_from_json(const Json& doc);

std::string save(const Network& net);
Network load(std::string_view document);

Network load_file(const std::string& path);
void save_file(const Network& net, const std::string& path);

}  // namespace neurofail
