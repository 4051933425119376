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

#include "neurofail/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "neurofail/rng.hpp"

namespace neurofail {

void for_each_grid_point(std::size_t dim, std::size_t grid_per_dim,
                         const std::function<void(std::span<const double>)>& visit) {
  if (grid_per_dim < 2) fail(ErrorKind::argument, "grid needs at least 2 points per dimension");
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> x(dim, 0.0);
  const double step = 1.0 / static_cast<double>(grid_per_dim - 1);
  for (;;) {
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = idx[d] + 1 == grid_per_dim ? 1.0 : static_cast<double>(idx[d]) * step;
    }
    visit(x);
    std::size_t d = 0;
    while (d < dim && ++idx[d] == grid_per_dim) idx[d++] = 0;
    if (d == dim) return;
  }
}

EpsPrimeEstimate measure_eps_prime(const Network& net, const TargetFunction& target,
                                   std::size_t grid_per_dim) {
  if (target.dim() != net.input_dim()) fail(ErrorKind::shape, "target and network dimensions differ");
  EpsPrimeEstimate est;
  est.grid_per_dim = grid_per_dim;
  est.value = -1.0;
  for_each_grid_point(net.input_dim(), grid_per_dim, [&](std::span<const double> x) {
    const double e = std::abs(target(x) - forward(net, x));
    if (e > est.value) {
      est.value = e;
      est.argmax.assign(x.begin(), x.end());
    }
  });
  return est;
}

double utilization(double observed_error, double bound) {
  if (bound == 0.0) return observed_error == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return observed_error / bound;
}

namespace {

Json record_json(const Network& net, const FaultScenario& s, const ExperimentRecord& r) {
  return {{"network", to_json(net)},
          {"scenario", to_json(s)},
          {"input", r.input},
          {"nominal_output", r.nominal_output},
          {"faulty_output", r.faulty_output},
          {"observed_error", r.observed_error},
          {"bound", r.bound}};
}

ByzantinePolicy random_policy(Rng& rng, double capacity) {
  switch (rng.below(4)) {
    case 0: return ByzantinePolicy::worst_case_sign();
    case 1: return ByzantinePolicy::random_in_capacity(rng.next());
    case 2: return ByzantinePolicy::constant(rng.uniform(-3.0 * capacity, 3.0 * capacity));
    default: return ByzantinePolicy::offset(rng.uniform(-3.0 * capacity, 3.0 * capacity));
  }
}

}  // namespace

SweepResult soundness_sweep(const Network& net, const FaultDistribution& dist, double capacity,
                            std::size_t trials, std::uint64_t seed,
                            const SoundnessOptions& opts) {
  if (trials == 0) fail(ErrorKind::argument, "trials must be >= 1");
  const double bound_capacity = opts.clamp == ClampMode::deviation
                                    ? capacity
                                    : value_mode_capacity(net.activation(), capacity);
  const FepReport report = dist.kind == DistributionKind::neuron
                               ? fep_neurons(net, dist, bound_capacity)
                               : fep_synapses(net, dist, bound_capacity);
  const bool crash_ok = capacity >= crash_capacity(net.activation());

  SweepResult res;
  res.axis = "trial";
  SweepRow row;
  row.bound = report.fep;
  double total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    std::vector<double> x(net.input_dim());
    for (double& v : x) v = rng.uniform();

    bool adversarial = opts.policies == PolicyMix::adversarial ||
                       (opts.policies == PolicyMix::mixed && rng.below(4) == 0);
    SelectionOptions sel;
    sel.clamp = opts.clamp;
    FaultScenario scenario;
    if (adversarial) {
      sel.mode = FaultMode::byzantine(ByzantinePolicy::worst_case_sign());
      scenario = adversarial_scenario(net, dist, Capacity::bounded(capacity), sel);
    } else {
      if (crash_ok && rng.below(8) == 0) {
        sel.mode = FaultMode::crashed();
      } else {
        sel.mode = FaultMode::byzantine(random_policy(rng, capacity));
      }
      scenario = random_scenario(net, dist, Capacity::bounded(capacity), rng.next(), sel);
    }
    const FaultyEvaluation ev = evaluate_faulty(net, x, scenario);
    ExperimentRecord r;
    r.scenario_id = t;
    r.input = x;
    r.nominal_output = ev.nominal_output;
    r.faulty_output = ev.faulty_output;
    r.observed_error = std::abs(ev.nominal_output - ev.faulty_output);
    r.bound = report.fep;
    r.utilization = utilization(r.observed_error, r.bound);
    if (r.observed_error > r.bound + kSoundnessTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "trial " << t << ": observed error " << r.observed_error << " exceeds bound "
         << r.bound;
      throw BoundViolation(os.str(), record_json(net, scenario, r));
    }
    row.max_error = std::max(row.max_error, r.observed_error);
    row.max_utilization = std::max(row.max_utilization, r.utilization);
    total += r.observed_error;
    if (opts.keep_records) res.records.push_back(std::move(r));
  }
  row.trials = trials;
  row.mean_error = total / static_cast<double>(trials);
  res.rows.push_back(row);
  return res;
}

std::string soundness_csv(const SweepResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "trial,observed,bound,utilization\n";
  for (const auto& r : result.records) {
    os << r.scenario_id << ',' << r.observed_error << ',' << r.bound << ',' << r.utilization
       << '\n';
  }
  return os.str();
}

TightnessResult tightness_experiment(std::size_t n_fail, double w_m, std::size_t n_neurons,
                                     double alpha, double k) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(ErrorKind::argument, "alpha must lie in (0,1)");
  if (!(w_m > 0.0) || !std::isfinite(w_m)) fail(ErrorKind::argument, "w_m must be positive");
  if (n_neurons == 0 || n_fail > n_neurons) {
    fail(ErrorKind::argument, "need 0 <= n_fail <= n_neurons and n_neurons >= 1");
  }
  // sigmoid(4 k w) > 1 - alpha/2 for x = 1.
  const double logit = std::log((1.0 - alpha / 2.0) / (alpha / 2.0));
  const double w_in = logit / (4.0 * k);

  NetworkParts p;
  p.input_dim = 1;
  p.activation = ActivationSpec(ActivationKind::sigmoid, k);
  Layer layer;
  layer.weights = Matrix(n_neurons, 1, w_in);
  p.layers.push_back(std::move(layer));
  p.output_weights.assign(n_neurons, w_m);
  p.metadata = {{"construction", "single-layer crash tightness"}, {"alpha", alpha}};

  TightnessResult res{n_fail, w_m, alpha, 0.0, static_cast<double>(n_fail) * w_m, 0.0,
                      Network(std::move(p))};
  SelectionOptions sel;
  sel.mode = FaultMode::crashed();
  const FaultScenario s = adversarial_scenario(
      res.net, FaultDistribution::neurons({n_fail}), Capacity::bounded(1.0), sel);
  const double x[] = {1.0};
  const FaultyEvaluation ev = evaluate_faulty(res.net, x, s);
  res.observed_error = std::abs(ev.nominal_output - ev.faulty_output);
  res.utilization = utilization(res.observed_error, res.bound);
  return res;
}

TightnessResult tightness_from_slack(double eps_slack, double w_m, std::size_t n_neurons,
                                     double alpha, double k) {
  if (!(eps_slack >= 0.0) || !(w_m > 0.0)) fail(ErrorKind::argument, "bad slack or w_m");
  const auto n_fail = static_cast<std::size_t>(std::floor(eps_slack / w_m));
  return tightness_experiment(std::min(n_fail, n_neurons), w_m, n_neurons, alpha, k);
}

BruteForceResult brute_force_certify(const Network& net, const FaultDistribution& dist,
                                     double eps, const TargetFunction& target, double capacity,
                                     std::size_t grid_per_dim, BruteMode mode,
                                     std::uint64_t cap) {
  if (target.dim() != net.input_dim()) fail(ErrorKind::shape, "target and network dimensions differ");
  SelectionOptions sel;
  sel.mode = mode == BruteMode::crash ? FaultMode::crashed()
                                      : FaultMode::byzantine(ByzantinePolicy::worst_case_sign());
  ScenarioEnumerator it(net, dist, Capacity::bounded(capacity), sel, cap);

  // Grid inputs and target values are shared by every scenario.
  std::vector<std::vector<double>> grid;
  std::vector<double> truth;
  for_each_grid_point(net.input_dim(), grid_per_dim, [&](std::span<const double> x) {
    grid.emplace_back(x.begin(), x.end());
    truth.push_back(target(x));
  });

  BruteForceResult res;
  res.scenarios = it.count();
  res.max_error = -1.0;
  while (auto s = it.next()) {
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double e = std::abs(truth[g] - forward_faulty(net, grid[g], *s));
      if (e > res.max_error) {
        res.max_error = e;
        res.worst_input = grid[g];
        res.worst_scenario = *s;
      }
    }
  }
  res.pass = res.max_error <= eps;
  return res;
}

Lemma1Result lemma1_demo(const Network& net, double eps, std::span<const double> x,
                         std::optional<double> clamp_capacity) {
  if (!(eps > 0.0) || !std::isfinite(eps)) fail(ErrorKind::argument, "eps must be positive");
  const auto& w = net.output_weights();
  std::size_t pick = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (std::abs(w[i]) > std::abs(w[pick])) pick = i;
  }
  if (w[pick] == 0.0) {
    fail(ErrorKind::argument, "every output weight is 0: no Byzantine neuron can move the output");
  }
  const auto ys = forward_layers(net, x);
  const double nominal = forward(net, x);
  double rest = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i != pick) rest += w[i] * ys.back()[i];
  }
  const double magnitude = (eps + 1.0 + std::abs(nominal) + std::abs(rest)) / std::abs(w[pick]);
  const double v = w[pick] > 0.0 ? magnitude : -magnitude;

  Lemma1Result res;
  res.scenario.capacity = Capacity::unbounded();
  res.scenario.neurons.push_back(
      {net.num_layers(), pick, FaultMode::byzantine(ByzantinePolicy::constant(v))});
  res.input.assign(x.begin(), x.end());
  res.neuron = pick;
  res.emitted_value = v;
  const FaultyEvaluation ev = evaluate_faulty(net, x, res.scenario);
  res.nominal_output = ev.nominal_output;
  res.faulty_output = ev.faulty_output;
  res.observed_error = std::abs(ev.nominal_output - ev.faulty_output);
  if (clamp_capacity) {
    FaultScenario clamped = res.scenario;
    clamped.capacity = Capacity::bounded(*clamp_capacity);
    clamped.clamp = ClampMode::deviation;
    const FaultyEvaluation cev = evaluate_faulty(net, x, clamped);
    std::vector<std::size_t> f(net.num_layers(), 0);
    f.back() = 1;
    res.clamped_capacity = *clamp_capacity;
    res.clamped_error = std::abs(cev.nominal_output - cev.faulty_output);
    res.clamped_bound = fep_neurons(net, FaultDistribution::neurons(f), *clamp_capacity).fep;
  }
  return res;
}

Json to_json(const Lemma1Result& r) {
  Json doc = {{"scenario", to_json(r.scenario)},
              {"input", r.input},
              {"neuron", r.neuron},
              {"emitted_value", r.emitted_value},
              {"nominal_output", r.nominal_output},
              {"faulty_output", r.faulty_output},
              {"observed_error", r.observed_error}};
  if (!std::isnan(r.clamped_capacity)) {
    doc["clamped"] = {{"capacity", r.clamped_capacity},
                      {"observed_error", r.clamped_error},
                      {"bound", r.clamped_bound}};
  }
  return doc;
}

Network linear_regime_network(const LinearRegimeFamily& fam, double k) {
  if (fam.layers == 0 || fam.width < 2 || fam.input_dim == 0) {
    fail(ErrorKind::argument, "linear-regime family needs layers >= 1 and width >= 2");
  }
  NetworkParts p;
  p.input_dim = fam.input_dim;
  p.activation = ActivationSpec(ActivationKind::sigmoid, k);
  const std::size_t c = fam.width - 1;  // constant neuron index
  // Regular neurons output sigmoid(0) = 1/2; the bias cancels their weighted
  // sum so every receiver sits at s = 0.
  const double bias = -fam.weight * 0.5 * static_cast<double>(fam.width - 1);
  for (std::size_t l = 0; l < fam.layers; ++l) {
    Layer layer;
    layer.constant_neuron = c;
    if (l == 0) {
      layer.weights = Matrix(fam.width, fam.input_dim, 0.0);
    } else {
      layer.weights = Matrix(fam.width, fam.width, fam.weight);
      for (std::size_t j = 0; j < fam.width; ++j) layer.weights(j, c) = bias;
      for (std::size_t i = 0; i < fam.width; ++i) layer.weights(c, i) = 0.0;
    }
    p.layers.push_back(std::move(layer));
  }
  p.output_weights.assign(fam.width, fam.weight);
  p.output_weights[c] = bias;
  p.metadata = {{"family", "linear_regime"}, {"k", k}};
  return Network(std::move(p));
}

SweepResult k_sweep(const LinearRegimeFamily& family, const FaultDistribution& dist,
                    const std::vector<double>& k_values, double capacity, std::size_t trials,
                    std::uint64_t seed) {
  if (k_values.empty()) fail(ErrorKind::argument, "k_values must not be empty");
  if (trials == 0) fail(ErrorKind::argument, "trials must be >= 1");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (!(k_values[i] > 0.0) || (i > 0 && !(k_values[i] > k_values[i - 1]))) {
      fail(ErrorKind::argument, "k_values must be positive and strictly increasing");
    }
  }
  SweepResult res;
  res.axis = "k";
  for (double k : k_values) {
    const Network net = linear_regime_network(family, k);
    const FepReport rep = fep_neurons(net, dist, capacity);
    SweepRow row;
    row.axis = k;
    row.bound = rep.fep;
    row.trials = trials;
    double total = 0.0;
    SelectionOptions sel;
    sel.mode = FaultMode::byzantine(ByzantinePolicy::worst_case_sign());
    for (std::size_t t = 0; t < trials; ++t) {
      // Same draws for every K so rows differ only through the activation.
      Rng rng(derive_seed(seed, t));
      std::vector<double> x(net.input_dim());
      for (double& v : x) v = rng.uniform();
      const FaultScenario s =
          random_scenario(net, dist, Capacity::bounded(capacity), rng.next(), sel);
      const FaultyEvaluation ev = evaluate_faulty(net, x, s);
      const double e = std::abs(ev.nominal_output - ev.faulty_output);
      row.max_error = std::max(row.max_error, e);
      row.max_utilization = std::max(row.max_utilization, utilization(e, rep.fep));
      total += e;
    }
    row.mean_error = total / static_cast<double>(trials);
    res.rows.push_back(row);
  }
  return res;
}

std::string k_sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "k,fep,max_err,mean_err,trials\n";
  for (const auto& r : result.rows) {
    os << r.axis << ',' << r.bound << ',' << r.max_error << ',' << r.mean_error << ','
       << r.trials << '\n';
  }
  return os.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::argument, "slope needs >= 2 points");
  double mx = 0.0, my = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) fail(ErrorKind::domain, "log-log fit needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

Json to_json(const SweepResult& result) {
  Json doc;
  doc["axis"] = result.axis;
  doc["rows"] = Json::array();
  for (const auto& r : result.rows) {
    doc["rows"].push_back({{"axis", r.axis},
                           {"trials", r.trials},
                           {"max_error", r.max_error},
                           {"mean_error", r.mean_error},
                           {"bound", r.bound},
                           {"max_utilization", r.max_utilization}});
  }
  return doc;
}

}  // namespace neurofail
