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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "neurofail/bounds.hpp"
#include "neurofail/net.hpp"
#include "neurofail/target.hpp"

namespace neurofail {

enum class Optimizer { gradient_descent, adam };

struct TrainConfig {
  std::vector<std::size_t> layer_sizes{8};
  ActivationSpec activation{ActivationKind::sigmoid, 1.0};
  Optimizer optimizer = Optimizer::adam;
  double learning_rate = 0.01;
  std::size_t epochs = 2000;
  std::size_t batch_size = 0;  // 0: full batch
  std::size_t samples = 256;
  std::uint64_t seed = 1;
  double weight_decay = 0.0;
  /// Stop once the grid estimate of eps' drops to this value.
  std::optional<double> target_eps_prime;
  std::size_t grid_per_dim = 0;  // 0: 512 for d=1, 64 for d=2, 16 otherwise
  std::size_t log_every = 100;
  bool input_bias = true;
  bool constant_neurons = false;
  /// Only the output weights are updated.
  bool output_only = false;
  double init_scale = 1.0;
};

/// Validates hyperparameters; throws ErrorKind::argument.
void validate(const TrainConfig& cfg, std::size_t input_dim);

std::size_t default_grid(std::size_t dim);

struct TrainLogRow {
  std::size_t epoch = 0;
  double loss = 0.0;
  double grid_eps_prime = 0.0;  // NaN when not measured at this epoch
};

struct TrainResult {
  Network net;
  std::vector<TrainLogRow> log;
  double eps_prime = 0.0;  // grid estimate on the final network
};

/// Random initial network for cfg (Xavier-style uniform, seeded).
Network initial_network(std::size_t input_dim, const TrainConfig& cfg);

/// Gradient descent on 0.5 * mean squared error (+ 0.5 * decay * |w|^2) over
/// `cfg.samples` seeded inputs. Deterministic for a given seed.
TrainResult train(const TargetFunction& target, const TrainConfig& cfg);

/// Continues training from an existing network.
TrainResult train_from(Network start, const TargetFunction& target, const TrainConfig& cfg);

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<double> targets;
};

Dataset sample_dataset(const TargetFunction& target, std::size_t count, std::uint64_t seed);

/// Gradient of the training objective w.r.t. every weight, with the same
/// shapes as the network (constant-neuron rows are zero).
struct Gradient {
  std::vector<Matrix> layers;
  std::vector<double> output;
};

double objective(const Network& net, const Dataset& data, double weight_decay);
Gradient objective_gradient(const Network& net, const Dataset& data, double weight_decay);

std::string training_log_csv(const std::vector<TrainLogRow>& log);

struct Quantized {
  Network net;
  std::vector<double> lambdas;  // 2^-(bits+1) per layer
};

/// Network whose neuron outputs are rounded to multiples of 2^-bits.
Quantized quantize(const Network& net, int fractional_bits);

struct QuantizationRow {
  int bits = 0;
  double lambda = 0.0;
  double bound = 0.0;
  double max_error = 0.0;  // max |exact - quantized| over the grid
  std::size_t violations = 0;
};

// Grid with at least `min_inputs` points (per-dimension count rounded up).
std::vector<QuantizationRow> quantization_experiment(const Network& net,
                                                     const std::vector<int>& bits,
                                                     std::size_t min_inputs);

std::string quantization_csv(const std::vector<QuantizationRow>& rows);

/// Duplicates every non-constant neuron and halves its outgoing weights. The
/// computed function is unchanged. Without constant neurons w_m of every
/// non-input layer halves; weights leaving a constant neuron are kept.
Network widen_by_splitting(const Network& net);

struct OverprovisionConfig {
  TrainConfig base;
  std::size_t max_neurons = 4096;
  std::size_t max_retrain_rounds = 4;  // fresh trainings while eps' is missed
  std::size_t finetune_epochs = 200;
  double finetune_decay = 1e-4;
};

struct OverprovisionResult {
  Network net;
  FepReport report;
  double measured_eps_prime = 0.0;
  bool accurate = false;   // measured eps' <= target eps'
  bool certified = false;  // accurate && report.certified
  std::vector<std::string> steps;
};

/// Searches for a network that approximates the target within eps' (grid
/// estimate) and whose neuron certificate for `dist` holds: retrain at doubled
/// widths until eps' is met, then widen by splitting with weight-decay
/// fine-tuning until Fep < eps - eps'. Hitting the neuron cap returns the last
/// attempt with certified = false.
OverprovisionResult overprovision_pair(const TargetFunction& target, double eps,
                                       double eps_prime, const FaultDistribution& dist,
                                       double capacity, const OverprovisionConfig& cfg);

}  // namespace neurofail
