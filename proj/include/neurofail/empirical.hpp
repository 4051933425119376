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
#include <functional>
#include <limits>
#include <optional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurofail/bounds.hpp"
#include "neurofail/error.hpp"
#include "neurofail/fault.hpp"
#include "neurofail/net.hpp"
#include "neurofail/target.hpp"

namespace neurofail {

/// Visits every point of the uniform grid {0, 1/(g-1), ..., 1}^dim.
void for_each_grid_point(std::size_t dim, std::size_t grid_per_dim,
                         const std::function<void(std::span<const double>)>& visit);

struct EpsPrimeEstimate {
  double value = 0.0;          // max |F(x) - F_neu(x)| over the grid
  std::vector<double> argmax;
  std::size_t grid_per_dim = 0;
};

/// Grid maximum of |F - F_neu|: a lower estimate of the true supremum.
EpsPrimeEstimate measure_eps_prime(const Network& net, const TargetFunction& target,
                                   std::size_t grid_per_dim);

struct ExperimentRecord {
  std::uint64_t scenario_id = 0;
  std::vector<double> input;
  double nominal_output = 0.0;
  double faulty_output = 0.0;
  double observed_error = 0.0;
  double bound = 0.0;
  double utilization = 0.0;
};

/// error / bound, with 0/0 defined as 0.
double utilization(double observed_error, double bound);

struct SweepRow {
  double axis = 0.0;
  std::size_t trials = 0;
  double max_error = 0.0;
  double mean_error = 0.0;
  double bound = 0.0;
  double max_utilization = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepRow> rows;
  std::vector<ExperimentRecord> records;
};

/// Raised when an observed error exceeds its bound. Carries the serialized
/// counterexample (network, scenario, input, outputs).
class BoundViolation : public Error {
 public:
  BoundViolation(const std::string& what, Json counterexample)
      : Error(ErrorKind::violation, what), counterexample_(std::move(counterexample)) {}
  const Json& counterexample() const noexcept { return counterexample_; }

 private:
  Json counterexample_;
};

/// Absolute slack added to every soundness comparison for float accumulation.
inline constexpr double kSoundnessTolerance = 1e-9;

enum class PolicyMix { random, adversarial, mixed };

struct SoundnessOptions {
  PolicyMix policies = PolicyMix::mixed;
  ClampMode clamp = ClampMode::deviation;
  bool keep_records = true;
};

/// Random inputs x random scenarios of `dist` x random Byzantine policies.
/// Throws BoundViolation on the first trial with error > bound + tolerance.
/// The bound is fep_neurons / fep_synapses at the capacity the clamp mode
/// implies. Trial i draws from derive_seed(seed, i).
SweepResult soundness_sweep(const Network& net, const FaultDistribution& dist, double capacity,
                            std::size_t trials, std::uint64_t seed,
                            const SoundnessOptions& opts = {});

std::string soundness_csv(const SweepResult& result);

struct TightnessResult {
  std::size_t n_fail = 0;
  double w_m = 0.0;
  double alpha = 0.0;
  double observed_error = 0.0;
  double bound = 0.0;  // n_fail * w_m
  double utilization = 0.0;
  Network net;
};

/// Single-layer worst case for crashes: every output weight is +w_m, the input
/// x = 1 drives each neuron above 1 - alpha, and the n_fail neurons with the
/// largest weights crash. Utilization >= 1 - alpha.
TightnessResult tightness_experiment(std::size_t n_fail, double w_m, std::size_t n_neurons,
                                     double alpha, double k = 1.0);

/// Same with n_fail taken as floor(eps_slack / w_m).
TightnessResult tightness_from_slack(double eps_slack, double w_m, std::size_t n_neurons,
                                     double alpha, double k = 1.0);

enum class BruteMode { crash, byzantine_worst_case };

struct BruteForceResult {
  bool pass = false;
  double max_error = 0.0;  // max |F(x) - F_fail(x)| over scenarios x grid
  std::uint64_t scenarios = 0;
  std::vector<double> worst_input;
  FaultScenario worst_scenario;
};

/// Exhaustive check of the robustness definition on a grid: every scenario of
/// the distribution against every grid input; pass iff max error <= eps.
BruteForceResult brute_force_certify(const Network& net, const FaultDistribution& dist,
                                     double eps, const TargetFunction& target, double capacity,
                                     std::size_t grid_per_dim, BruteMode mode,
                                     std::uint64_t cap = ScenarioEnumerator::default_cap);

struct Lemma1Result {
  FaultScenario scenario;  // unbounded capacity, one Byzantine layer-L neuron
  std::vector<double> input;
  std::size_t neuron = 0;
  double emitted_value = 0.0;
  double nominal_output = 0.0;
  double faulty_output = 0.0;
  double observed_error = 0.0;
  // Same scenario replayed with a bounded capacity (NaN when not requested).
  double clamped_capacity = std::numeric_limits<double>::quiet_NaN();
  double clamped_error = std::numeric_limits<double>::quiet_NaN();
  double clamped_bound = std::numeric_limits<double>::quiet_NaN();
};

/// One layer-L neuron (largest |output weight|) emits a constant large enough
/// that the output moves by more than eps + 1. Throws ErrorKind::argument when
/// every output weight is 0.
Lemma1Result lemma1_demo(const Network& net, double eps, std::span<const double> x,
                         std::optional<double> clamp_capacity = std::nullopt);
Json to_json(const Lemma1Result& result);

/// Shape of the engineered family for K sweeps: every layer sits at the
/// centre of the activation, so a small perturbation is amplified by exactly
/// K * w per layer up to second order.
struct LinearRegimeFamily {
  std::size_t input_dim = 2;
  std::size_t layers = 3;
  std::size_t width = 5;  // includes one constant neuron per layer
  double weight = 0.1;
};

Network linear_regime_network(const LinearRegimeFamily& family, double k);

/// For each K builds the family network, runs `trials` random inputs with
/// random placements of `dist` under worst-case-sign Byzantine faults at the
/// given capacity, and records max / mean error against Fep.
SweepResult k_sweep(const LinearRegimeFamily& family, const FaultDistribution& dist,
                    const std::vector<double>& k_values, double capacity, std::size_t trials,
                    std::uint64_t seed);

std::string k_sweep_csv(const SweepResult& result);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

Json to_json(const SweepResult& result);

}  // namespace neurofail
