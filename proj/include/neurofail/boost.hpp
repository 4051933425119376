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
#include <span>
#include <string>
#include <vector>

#include "neurofail/bounds.hpp"
#include "neurofail/empirical.hpp"
#include "neurofail/fault.hpp"
#include "neurofail/net.hpp"
#include "neurofail/target.hpp"

namespace neurofail {

enum class LatencyKind { uniform, exponential, heavy_tail };

// Per-neuron delivery delay. Draws depend only on (seed, layer, neuron).
struct LatencyModel {
  LatencyKind kind = LatencyKind::uniform;
  double a = 1.0;  // uniform: lo, exponential/heavy_tail: mean
  double b = 2.0;  // uniform: hi
  double p_straggler = 0.0;
  double straggler_factor = 1.0;
  std::uint64_t seed = 0;

  static LatencyModel uniform(double lo, double hi, std::uint64_t seed = 0);
  static LatencyModel exponential(double mean, std::uint64_t seed = 0);
  static LatencyModel heavy_tail(double mean, double p_straggler, double straggler_factor,
                                 std::uint64_t seed = 0);

  LatencyModel with_seed(std::uint64_t s) const;
  double sample(std::size_t layer, std::size_t neuron) const;
};

void validate(const LatencyModel& model);
LatencyModel latency_from_string(const std::string& text);  // "uniform:1,2", "exponential:1", "heavy_tail:1,0.2,10"
std::string to_string(const LatencyModel& model);

class BoostPolicy {
 public:
  // Checks the crash-mode certificate at C = 1; throws policy errors otherwise.
  static BoostPolicy certified(const Network& net, std::vector<std::size_t> cut_counts,
                               double eps, double eps_prime);
  // All-zero cut: never drops anything, only needs eps_prime < eps.
  static BoostPolicy wait_all(const Network& net, double eps, double eps_prime);

  const std::vector<std::size_t>& cut_counts() const noexcept { return cut_; }
  const FepReport& report() const noexcept { return report_; }
  double eps() const noexcept { return eps_; }
  double eps_prime() const noexcept { return eps_prime_; }

 private:
  BoostPolicy() = default;
  std::vector<std::size_t> cut_;
  FepReport report_;
  double eps_ = 0.0;
  double eps_prime_ = 0.0;
  std::size_t layers_ = 0;
  std::vector<std::size_t> widths_;
  friend void check_policy(const Network& net, const BoostPolicy& policy);
};

void check_policy(const Network& net, const BoostPolicy& policy);

struct BoostOutcome {
  double output = 0.0;
  double nominal_output = 0.0;
  std::vector<std::vector<std::size_t>> per_layer_dropped;  // 0-based indices per layer 1..L
  double makespan_boosted = 0.0;
  double makespan_full = 0.0;
  double observed_error_vs_nominal = 0.0;
  FaultScenario induced;  // crash scenario equivalent to the cut
};

BoostOutcome simulate_boost(const Network& net, std::span<const double> x,
                            const LatencyModel& latency, const BoostPolicy& policy);

struct BoostTrial {
  std::size_t trial = 0;
  double output = 0.0;
  double target = 0.0;
  double abs_err = 0.0;
  double makespan_full = 0.0;
  double makespan_boost = 0.0;
  double speedup = 1.0;
};

struct BoostCampaignResult {
  SweepResult summary;  // one row: max/mean abs error against F, bound = eps
  std::vector<BoostTrial> trials;
  double eps = 0.0;
  double mean_speedup = 1.0;
  double min_speedup = 1.0;
  double max_speedup = 1.0;
};

// Throws BoundViolation on the first trial with |F(x) - output| > eps.
BoostCampaignResult boost_campaign(const Network& net, const TargetFunction& target, double eps,
                                   double eps_prime, const LatencyModel& latency,
                                   const BoostPolicy& policy, std::size_t trials,
                                   std::uint64_t seed);

std::string boost_csv(const BoostCampaignResult& result);
Json to_json(const BoostOutcome& outcome);

}  // namespace neurofail
