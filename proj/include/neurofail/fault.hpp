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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "neurofail/net.hpp"

namespace neurofail {

enum class DistributionKind { neuron, synapse };

/// Per-layer fault counts. Neuron kind: f_1..f_L. Synapse kind: f_1..f_{L+1},
/// where f_l counts faulty synapses into layer l and layer L+1 is the output
/// node.
struct FaultDistribution {
  DistributionKind kind = DistributionKind::neuron;
  std::vector<std::size_t> per_layer;

  static FaultDistribution neurons(std::vector<std::size_t> f) {
    return {DistributionKind::neuron, std::move(f)};
  }
  static FaultDistribution synapses(std::vector<std::size_t> f) {
    return {DistributionKind::synapse, std::move(f)};
  }
  bool all_zero() const noexcept;
  bool operator==(const FaultDistribution&) const = default;
};

/// Checks length and f_l <= N_l (neurons) or f_l <= N_l * N_{l-1} (synapses).
void validate(const Network& net, const FaultDistribution& dist);

/// Transmission capacity C of a faulty synapse; unbounded when empty.
class Capacity {
 public:
  static Capacity unbounded() { return Capacity(); }
  static Capacity bounded(double c);

  bool is_bounded() const noexcept { return c_.has_value(); }
  double value() const;

  bool operator==(const Capacity&) const = default;

 private:
  std::optional<double> c_;
};

/// What the capacity bounds.
///  deviation: |v - y_nominal| <= C, the error lambda of a faulty transmission.
///  value:     |v| <= C, the raw transmitted value.
/// The error-propagation bounds hold with capacity C in deviation mode and with
/// C + sup|phi| in value mode (see value_mode_capacity in bounds.hpp).
enum class ClampMode { deviation, value };

struct ByzantinePolicy {
  enum class Strategy { worst_case_sign, constant, random_in_capacity, offset };

  Strategy strategy = Strategy::worst_case_sign;
  double value = 0.0;  // constant: the emitted value; offset: delta
  std::uint64_t seed = 0;

  static ByzantinePolicy worst_case_sign() { return {Strategy::worst_case_sign, 0.0, 0}; }
  static ByzantinePolicy constant(double v) { return {Strategy::constant, v, 0}; }
  static ByzantinePolicy random_in_capacity(std::uint64_t seed) {
    return {Strategy::random_in_capacity, 0.0, seed};
  }
  static ByzantinePolicy offset(double delta) { return {Strategy::offset, delta, 0}; }

  bool operator==(const ByzantinePolicy&) const = default;
};

struct FaultMode {
  bool crash = true;
  ByzantinePolicy policy;

  static FaultMode crashed() { return {true, {}}; }
  static FaultMode byzantine(ByzantinePolicy p) { return {false, p}; }
  bool operator==(const FaultMode&) const = default;
};

/// Neuron `index` (0-based) of layer `layer` (1-based, 1..L).
struct NeuronFault {
  std::size_t layer = 1;
  std::size_t index = 0;
  FaultMode mode;
  bool operator==(const NeuronFault&) const = default;
};

/// Synapse from `sender` in layer-1 to `receiver` in `layer` (1..L+1; the
/// output node is layer L+1 with receiver 0). Layer-1 senders are inputs.
struct SynapseFault {
  std::size_t layer = 1;
  std::size_t receiver = 0;
  std::size_t sender = 0;
  FaultMode mode;
  bool operator==(const SynapseFault&) const = default;
};

struct FaultScenario {
  std::vector<NeuronFault> neurons;
  std::vector<SynapseFault> synapses;
  Capacity capacity = Capacity::unbounded();
  ClampMode clamp = ClampMode::deviation;

  bool empty() const noexcept { return neurons.empty() && synapses.empty(); }
  bool operator==(const FaultScenario&) const = default;
};

/// Index validity and duplicate detection; throws ErrorKind::scenario.
void validate(const Network& net, const FaultScenario& scenario);

struct FaultyEvaluation {
  std::vector<std::vector<double>> nominal;  // fault-free y^(l)
  std::vector<std::vector<double>> faulty;   // y^(l) computed from faulty sums
  double nominal_output = 0.0;
  double faulty_output = 0.0;
  /// Largest |v - y_nominal| and |v| over all Byzantine transmissions.
  double max_byzantine_deviation = 0.0;
  double max_byzantine_value = 0.0;
};

/// Evaluates the network with the scenario applied. Crashed neurons and
/// synapses transmit 0; Byzantine ones transmit policy values, chosen per
/// outgoing synapse and clamped per the scenario's ClampMode when the capacity
/// is bounded. Faulty neuron entries in `faulty` hold the value the neuron
/// would compute, not what it transmits.
FaultyEvaluation evaluate_faulty(const Network& net, std::span<const double> x,
                                 const FaultScenario& scenario);

double forward_faulty(const Network& net, std::span<const double> x,
                      const FaultScenario& scenario);

struct SelectionOptions {
  FaultMode mode = FaultMode::byzantine(ByzantinePolicy::worst_case_sign());
  bool include_constant = false;
  ClampMode clamp = ClampMode::deviation;
};

/// Number of units eligible for selection in each layer of the distribution.
std::vector<std::size_t> eligible_counts(const Network& net, DistributionKind kind,
                                         bool include_constant);

/// Picks, per layer, the f_l units with the largest outgoing |weight| (neurons)
/// or largest |weight| (synapses). Ties go to the lowest index.
FaultScenario adversarial_scenario(const Network& net, const FaultDistribution& dist,
                                   Capacity capacity, const SelectionOptions& opts = {});

/// Uniformly samples f_l distinct units per layer; a pure function of its
/// arguments.
FaultScenario random_scenario(const Network& net, const FaultDistribution& dist,
                              Capacity capacity, std::uint64_t seed,
                              const SelectionOptions& opts = {});

/// Product over layers of C(eligible_l, f_l), saturating at UINT64_MAX.
std::uint64_t scenario_count(const Network& net, const FaultDistribution& dist,
                             bool include_constant = false);

/// Restartable stream of every scenario of a distribution, in lexicographic
/// order of the per-layer index combinations (last layer varies fastest).
class ScenarioEnumerator {
 public:
  static constexpr std::uint64_t default_cap = 1'000'000;

  ScenarioEnumerator(const Network& net, FaultDistribution dist, Capacity capacity,
                     SelectionOptions opts = {}, std::uint64_t cap = default_cap);

  std::uint64_t count() const noexcept { return count_; }
  std::optional<FaultScenario> next();
  void reset();

 private:
  FaultScenario build() const;
  bool advance();

  FaultDistribution dist_;
  Capacity capacity_;
  SelectionOptions opts_;
  std::vector<std::vector<std::size_t>> units_;   // eligible unit ids per layer
  std::vector<std::vector<std::size_t>> combo_;   // current combination per layer
  std::vector<std::size_t> fan_in_;
  std::uint64_t count_ = 0;
  bool started_ = false;
  bool done_ = false;
};

Json to_json(const FaultScenario& scenario);
FaultScenario scenario_from_json(const Json& doc);
Json to_json(const FaultDistribution& dist);

/// Parses "1,0,2" into per-layer counts.
std::vector<std::size_t> parse_counts(std::string_view text);

}  // namespace neurofail
