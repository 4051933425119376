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
#include <vector>

#include "neurofail/fault.hpp"
#include "neurofail/net.hpp"

namespace neurofail {

enum class Condition { neurons, synapses };

/// Forward error propagation bound with optional certificate fields. When the
/// report comes from a plain fep_* call, eps fields are empty, slack is NaN and
/// certified is false.
struct FepReport {
  double fep = 0.0;
  std::vector<double> per_layer;  // fep == sum(per_layer)
  std::optional<double> eps;
  std::optional<double> eps_prime;
  double slack = 0.0;             // eps - eps' - fep
  bool certified = false;
  bool widths_ok = true;          // f_l < N_l for every neuron layer
  Condition condition = Condition::neurons;
  double capacity = 0.0;
  double lipschitz_k = 0.0;
  FaultDistribution dist;
  std::vector<double> max_weights;
  /// Synapse reports only: the same sum with (N_l' - f_l') factors. It can
  /// undercount, see fep_synapses.
  std::optional<double> literal_fep;
};

/// Fep = C * sum_l f_l K^(L-l) w_m^(L+1) prod_{l'=l+1..L} (N_l' - f_l') w_m^(l').
/// N_l counts every neuron of the layer, the constant neuron included.
FepReport fep_neurons(const Network& net, const FaultDistribution& dist, double capacity);

/// Same quantity from bare parameters (widths N_1..N_L, w_m^(1..L+1)).
std::vector<double> fep_neuron_terms(const std::vector<std::size_t>& widths,
                                     const std::vector<double>& wm, double k,
                                     const std::vector<std::size_t>& f, double capacity);

/// Largest N_fail with N_fail <= (eps - eps') / w_m for a single-layer network,
/// capped at N_1. Returns N_1 when every output weight is 0.
std::size_t crash_bound_single_layer(const Network& net, double eps, double eps_prime);

/// certified = (f_l < N_l for all l) && Fep < eps - eps'.
FepReport certify_neurons(const Network& net, const FaultDistribution& dist, double eps,
                          double eps_prime, double capacity);

/// Bound on the output error when f_l synapses into each layer l = 1..L+1
/// transmit values within C of the nominal sender output:
///   C * sum_l f_l K^(L+1-l) w_m^(l) prod_{l'=l+1..L+1} N_l' w_m^(l')   (N_{L+1}=1)
/// Every synapse leaving a correct neuron still carries upstream error, so no
/// width is reduced by the synapse counts.
FepReport fep_synapses(const Network& net, const FaultDistribution& dist, double capacity);

/// certified = fep < eps - eps' (strict, as for neurons).
FepReport certify_synapses(const Network& net, const FaultDistribution& dist, double eps,
                           double eps_prime, double capacity);

/// Worst-case output shift of a neuron whose received sum is off by lambda:
/// K * |lambda|.
double synapse_error_as_neuron_error(double lambda, const ActivationSpec& spec);

/// sum_l K^(L-l) lambda_l prod_{l'=l..L} N_l' w_m^(l'+1).
double quantization_bound(const Network& net, const std::vector<double>& lambdas);

/// Capacity to feed the bounds when faults are clamped in ClampMode::value:
/// a transmitted |v| <= C can sit C + sup|phi| away from the nominal output.
double value_mode_capacity(const ActivationSpec& spec, double capacity);

/// Capacity for crash-only studies: the largest value a neuron can send.
double crash_capacity(const ActivationSpec& spec);

struct MaxTolerableResult {
  std::vector<FaultDistribution> maximal;  // lexicographic order
  bool partial = false;                    // search cap hit
  std::uint64_t evaluated = 0;
};

/// Every neuron distribution that certifies and cannot have any single f_l
/// incremented while still certifying. Fep is not monotone in f_l for l > 1,
/// so the whole box prod_l N_l is scanned, up to `cap` points.
MaxTolerableResult max_tolerable(const Network& net, double eps, double eps_prime,
                                 double capacity, std::uint64_t cap = 1'000'000);

Json to_json(const FepReport& report);

}  // namespace neurofail
