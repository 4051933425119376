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

#include "neurofail/fault.hpp"

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <tuple>

#include "neurofail/error.hpp"
#include "neurofail/rng.hpp"

namespace neurofail {

bool FaultDistribution::all_zero() const noexcept {
  return std::all_of(per_layer.begin(), per_layer.end(), [](std::size_t f) { return f == 0; });
}

void validate(const Network& net, const FaultDistribution& dist) {
  const std::size_t L = net.num_layers();
  if (dist.kind == DistributionKind::neuron) {
    if (dist.per_layer.size() != L) {
      fail(ErrorKind::shape, "neuron distribution needs " + std::to_string(L) + " entries");
    }
    for (std::size_t l = 0; l < L; ++l) {
      if (dist.per_layer[l] > net.layer(l).size()) {
        fail(ErrorKind::argument, "f_" + std::to_string(l + 1) + " exceeds layer width");
      }
    }
    return;
  }
  if (dist.per_layer.size() != L + 1) {
    fail(ErrorKind::shape, "synapse distribution needs " + std::to_string(L + 1) + " entries");
  }
  for (std::size_t l = 0; l <= L; ++l) {
    const std::size_t receivers = l < L ? net.layer(l).size() : 1;
    if (dist.per_layer[l] > receivers * net.fan_in(l)) {
      fail(ErrorKind::argument, "f_" + std::to_string(l + 1) + " exceeds synapse count");
    }
  }
}

Capacity Capacity::bounded(double c) {
  if (!std::isfinite(c) || c <= 0.0) fail(ErrorKind::argument, "capacity must be positive");
  Capacity cap;
  cap.c_ = c;
  return cap;
}

double Capacity::value() const {
  if (!c_) fail(ErrorKind::policy, "capacity is unbounded");
  return *c_;
}

// ---------------------------------------------------------------------------
// Scenario validation and evaluation

void validate(const Network& net, const FaultScenario& scenario) {
  const std::size_t L = net.num_layers();
  std::set<std::pair<std::size_t, std::size_t>> seen_neurons;
  for (const auto& f : scenario.neurons) {
    if (f.layer < 1 || f.layer > L || f.index >= net.layer(f.layer - 1).size()) {
      fail(ErrorKind::scenario, "neuron fault (" + std::to_string(f.layer) + "," +
                                    std::to_string(f.index) + ") is out of range");
    }
    if (!seen_neurons.emplace(f.layer, f.index).second) {
      fail(ErrorKind::scenario, "duplicate neuron fault");
    }
  }
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen_synapses;
  for (const auto& f : scenario.synapses) {
    const bool ok = f.layer >= 1 && f.layer <= L + 1 &&
                    f.receiver < (f.layer <= L ? net.layer(f.layer - 1).size() : 1) &&
                    f.sender < net.fan_in(f.layer - 1);
    if (!ok) {
      fail(ErrorKind::scenario, "synapse fault (" + std::to_string(f.layer) + "," +
                                    std::to_string(f.receiver) + "," +
                                    std::to_string(f.sender) + ") is out of range");
    }
    if (!seen_synapses.emplace(f.layer, f.receiver, f.sender).second) {
      fail(ErrorKind::scenario, "duplicate synapse fault");
    }
  }
  auto check_policy = [&](const FaultMode& m) {
    if (m.crash) return;
    const auto s = m.policy.strategy;
    if (!scenario.capacity.is_bounded() &&
        (s == ByzantinePolicy::Strategy::worst_case_sign ||
         s == ByzantinePolicy::Strategy::random_in_capacity)) {
      fail(ErrorKind::policy, "policy needs a bounded capacity: no finite worst value exists");
    }
    if (!std::isfinite(m.policy.value)) fail(ErrorKind::policy, "policy value is not finite");
  };
  for (const auto& f : scenario.neurons) check_policy(f.mode);
  for (const auto& f : scenario.synapses) check_policy(f.mode);
}

namespace {

struct Transmitter {
  const FaultScenario& scenario;
  double capacity = 0.0;
  double max_dev = 0.0;
  double max_abs = 0.0;

  // Value carried by a faulty link. `nominal` is the fault-free sender output,
  // `weight` the synapse weight, ids identify the link for random policies.
  double emit(const FaultMode& mode, double nominal, double weight, std::uint64_t layer,
              std::uint64_t sender, std::uint64_t receiver, std::uint64_t tag) {
    if (mode.crash) return 0.0;
    const bool bounded = scenario.capacity.is_bounded();
    const bool dev = scenario.clamp == ClampMode::deviation;
    const double center = dev ? nominal : 0.0;
    double v = 0.0;
    switch (mode.policy.strategy) {
      case ByzantinePolicy::Strategy::worst_case_sign:
        v = center + (weight >= 0.0 ? capacity : -capacity);
        break;
      case ByzantinePolicy::Strategy::constant:
        v = mode.policy.value;
        break;
      case ByzantinePolicy::Strategy::random_in_capacity: {
        const double u =
            unit_from_bits(derive_seed(mode.policy.seed, tag, layer, sender, receiver));
        v = center + capacity * (2.0 * u - 1.0);
        break;
      }
      case ByzantinePolicy::Strategy::offset:
        v = nominal + mode.policy.value;
        break;
    }
    if (bounded) v = std::clamp(v, center - capacity, center + capacity);
    max_dev = std::max(max_dev, std::abs(v - nominal));
    max_abs = std::max(max_abs, std::abs(v));
    return v;
  }
};

}  // namespace

FaultyEvaluation evaluate_faulty(const Network& net, std::span<const double> x,
                                 const FaultScenario& scenario) {
  validate(net, scenario);
  const std::size_t L = net.num_layers();

  FaultyEvaluation ev;
  ev.nominal = forward_layers(net, x);
  {
    const auto& last = ev.nominal.back();
    for (std::size_t i = 0; i < last.size(); ++i) {
      ev.nominal_output += net.output_weights()[i] * last[i];
    }
  }

  // Lookup tables: faulty neuron per (layer, index) and faulty synapse per
  // (layer, receiver, sender); layer indices are 1-based here.
  std::vector<std::vector<const FaultMode*>> neuron_fault(L + 1);
  for (std::size_t l = 1; l <= L; ++l) neuron_fault[l].assign(net.layer(l - 1).size(), nullptr);
  for (const auto& f : scenario.neurons) neuron_fault[f.layer][f.index] = &f.mode;

  std::vector<std::vector<const SynapseFault*>> synapse_faults(L + 2);
  for (const auto& f : scenario.synapses) synapse_faults[f.layer].push_back(&f);
  auto synapse_at = [&](std::size_t layer, std::size_t receiver,
                        std::size_t sender) -> const SynapseFault* {
    for (const SynapseFault* f : synapse_faults[layer]) {
      if (f->receiver == receiver && f->sender == sender) return f;
    }
    return nullptr;
  };

  Transmitter tx{scenario, scenario.capacity.is_bounded() ? scenario.capacity.value() : 0.0};

  std::vector<double> input(x.begin(), x.end());
  if (net.input_bias()) input.push_back(1.0);

  // Value that sender i of layer `l - 1` delivers to receiver j of layer l.
  // `prev_faulty` holds the faulty-pass outputs of layer l-1.
  auto delivered = [&](std::size_t l, std::size_t j, std::size_t i, double weight,
                       const std::vector<double>& prev_faulty,
                       const std::vector<double>& prev_nominal) {
    if (const SynapseFault* sf = synapse_at(l, j, i)) {
      return tx.emit(sf->mode, prev_nominal[i], weight, l, i, j, 2);
    }
    if (l >= 2 && neuron_fault[l - 1][i]) {
      return tx.emit(*neuron_fault[l - 1][i], prev_nominal[i], weight, l - 1, i, j, 1);
    }
    return prev_faulty[i];
  };

  const ActivationSpec& act = net.activation();
  std::vector<double> prev_faulty = input;
  std::vector<double> prev_nominal = input;
  for (std::size_t l = 1; l <= L; ++l) {
    const Layer& layer = net.layer(l - 1);
    std::vector<double> y(layer.size());
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (layer.is_constant(j)) {
        y[j] = 1.0;
        continue;
      }
      const auto row = layer.weights.row(j);
      double s = 0.0;
      for (std::size_t i = 0; i < row.size(); ++i) {
        s += row[i] * delivered(l, j, i, row[i], prev_faulty, prev_nominal);
      }
      y[j] = quantize_output(net, act.eval(s));
    }
    ev.faulty.push_back(y);
    prev_faulty = std::move(y);
    prev_nominal = ev.nominal[l - 1];
  }

  double out = 0.0;
  for (std::size_t i = 0; i < prev_faulty.size(); ++i) {
    const double w = net.output_weights()[i];
    out += w * delivered(L + 1, 0, i, w, prev_faulty, prev_nominal);
  }
  ev.faulty_output = out;
  ev.max_byzantine_deviation = tx.max_dev;
  ev.max_byzantine_value = tx.max_abs;
  if (scenario.capacity.is_bounded()) {
    const double c = scenario.capacity.value();
    const double slack = 1e-12 * (1.0 + c);
    if (scenario.clamp == ClampMode::deviation) {
      assert(tx.max_dev <= c + slack);
    } else {
      assert(tx.max_abs <= c + slack);
    }
    (void)slack;
  }
  return ev;
}

double forward_faulty(const Network& net, std::span<const double> x,
                      const FaultScenario& scenario) {
  return evaluate_faulty(net, x, scenario).faulty_output;
}

// ---------------------------------------------------------------------------
// Scenario construction

namespace {

// Eligible unit ids per layer. Neurons: index. Synapses: receiver * fan_in +
// sender (receiver 0 for the output node).
std::vector<std::vector<std::size_t>> eligible_units(const Network& net, DistributionKind kind,
                                                     bool include_constant) {
  const std::size_t L = net.num_layers();
  std::vector<std::vector<std::size_t>> units;
  if (kind == DistributionKind::neuron) {
    for (std::size_t l = 0; l < L; ++l) {
      std::vector<std::size_t> u;
      for (std::size_t j = 0; j < net.layer(l).size(); ++j) {
        if (include_constant || !net.layer(l).is_constant(j)) u.push_back(j);
      }
      units.push_back(std::move(u));
    }
    return units;
  }
  for (std::size_t l = 0; l <= L; ++l) {
    const std::size_t fan = net.fan_in(l);
    std::vector<std::size_t> u;
    const std::size_t receivers = l < L ? net.layer(l).size() : 1;
    for (std::size_t j = 0; j < receivers; ++j) {
      if (l < L && net.layer(l).is_constant(j)) continue;
      for (std::size_t i = 0; i < fan; ++i) u.push_back(j * fan + i);
    }
    units.push_back(std::move(u));
  }
  return units;
}

double synapse_weight(const Network& net, std::size_t l0, std::size_t unit) {
  const std::size_t fan = net.fan_in(l0);
  const std::size_t j = unit / fan;
  const std::size_t i = unit % fan;
  if (l0 == net.num_layers()) return net.output_weights()[i];
  return net.layer(l0).weights(j, i);
}

// Largest |outgoing weight| of neuron j in layer l0 (0-based).
double outgoing_max(const Network& net, std::size_t l0, std::size_t j) {
  if (l0 + 1 == net.num_layers()) return std::abs(net.output_weights()[j]);
  const Layer& next = net.layer(l0 + 1);
  double m = 0.0;
  for (std::size_t r = 0; r < next.size(); ++r) {
    if (next.is_constant(r)) continue;
    m = std::max(m, std::abs(next.weights(r, j)));
  }
  return m;
}

FaultScenario assemble(const Network& net, DistributionKind kind,
                       const std::vector<std::vector<std::size_t>>& chosen, Capacity capacity,
                       const SelectionOptions& opts) {
  FaultScenario s;
  s.capacity = capacity;
  s.clamp = opts.clamp;
  for (std::size_t l0 = 0; l0 < chosen.size(); ++l0) {
    std::vector<std::size_t> units = chosen[l0];
    std::sort(units.begin(), units.end());
    for (std::size_t u : units) {
      if (kind == DistributionKind::neuron) {
        s.neurons.push_back({l0 + 1, u, opts.mode});
      } else {
        const std::size_t fan = net.fan_in(l0);
        s.synapses.push_back({l0 + 1, u / fan, u % fan, opts.mode});
      }
    }
  }
  return s;
}

void check_fits(const FaultDistribution& dist, const std::vector<std::vector<std::size_t>>& units) {
  for (std::size_t l = 0; l < units.size(); ++l) {
    if (dist.per_layer[l] > units[l].size()) {
      fail(ErrorKind::argument, "f_" + std::to_string(l + 1) + " = " +
                                    std::to_string(dist.per_layer[l]) + " exceeds the " +
                                    std::to_string(units[l].size()) + " eligible units");
    }
  }
}

}  // namespace

std::vector<std::size_t> eligible_counts(const Network& net, DistributionKind kind,
                                         bool include_constant) {
  std::vector<std::size_t> counts;
  for (const auto& u : eligible_units(net, kind, include_constant)) counts.push_back(u.size());
  return counts;
}

FaultScenario adversarial_scenario(const Network& net, const FaultDistribution& dist,
                                   Capacity capacity, const SelectionOptions& opts) {
  validate(net, dist);
  auto units = eligible_units(net, dist.kind, opts.include_constant);
  check_fits(dist, units);
  std::vector<std::vector<std::size_t>> chosen(units.size());
  for (std::size_t l0 = 0; l0 < units.size(); ++l0) {
    auto& u = units[l0];
    auto score = [&](std::size_t unit) {
      return dist.kind == DistributionKind::neuron ? outgoing_max(net, l0, unit)
                                                   : std::abs(synapse_weight(net, l0, unit));
    };
    std::stable_sort(u.begin(), u.end(),
                     [&](std::size_t a, std::size_t b) { return score(a) > score(b); });
    chosen[l0].assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(dist.per_layer[l0]));
  }
  return assemble(net, dist.kind, chosen, capacity, opts);
}

FaultScenario random_scenario(const Network& net, const FaultDistribution& dist,
                              Capacity capacity, std::uint64_t seed,
                              const SelectionOptions& opts) {
  validate(net, dist);
  auto units = eligible_units(net, dist.kind, opts.include_constant);
  check_fits(dist, units);
  std::vector<std::vector<std::size_t>> chosen(units.size());
  for (std::size_t l0 = 0; l0 < units.size(); ++l0) {
    Rng rng(derive_seed(seed, l0));
    auto& u = units[l0];
    const std::size_t f = dist.per_layer[l0];
    // Partial Fisher-Yates: the first f slots become a uniform f-subset.
    for (std::size_t k = 0; k < f; ++k) {
      const std::size_t pick = k + static_cast<std::size_t>(rng.below(u.size() - k));
      std::swap(u[k], u[pick]);
    }
    chosen[l0].assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(f));
  }
  return assemble(net, dist.kind, chosen, capacity, opts);
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // r * (n - k + i) / i stays exact because r is C(n-k+i-1, i-1).
    const std::uint64_t num = n - k + i;
    const std::uint64_t g = std::gcd(r, i);
    const std::uint64_t rr = r / g;
    const std::uint64_t ii = i / g;
    r = saturating_mul(rr, num / ii);
    if (r == std::numeric_limits<std::uint64_t>::max()) return r;
  }
  return r;
}

}  // namespace

std::uint64_t scenario_count(const Network& net, const FaultDistribution& dist,
                             bool include_constant) {
  validate(net, dist);
  const auto counts = eligible_counts(net, dist.kind, include_constant);
  std::uint64_t total = 1;
  for (std::size_t l = 0; l < counts.size(); ++l) {
    total = saturating_mul(total, binomial(counts[l], dist.per_layer[l]));
  }
  return total;
}

ScenarioEnumerator::ScenarioEnumerator(const Network& net, FaultDistribution dist,
                                       Capacity capacity, SelectionOptions opts,
                                       std::uint64_t cap)
    : dist_(std::move(dist)), capacity_(capacity), opts_(opts) {
  validate(net, dist_);
  units_ = eligible_units(net, dist_.kind, opts_.include_constant);
  check_fits(dist_, units_);
  count_ = scenario_count(net, dist_, opts_.include_constant);
  if (count_ > cap) {
    fail(ErrorKind::cap, "enumeration would yield " + std::to_string(count_) +
                             " scenarios, above the cap of " + std::to_string(cap));
  }
  for (std::size_t l = 0; l < units_.size(); ++l) fan_in_.push_back(net.fan_in(l));
  reset();
}

void ScenarioEnumerator::reset() {
  combo_.assign(units_.size(), {});
  for (std::size_t l = 0; l < units_.size(); ++l) {
    combo_[l].resize(dist_.per_layer[l]);
    std::iota(combo_[l].begin(), combo_[l].end(), std::size_t{0});
  }
  started_ = false;
  done_ = count_ == 0;
}

bool ScenarioEnumerator::advance() {
  // Odometer over layers, last layer fastest; within a layer the next
  // k-combination of positions in lexicographic order.
  for (std::size_t l = combo_.size(); l-- > 0;) {
    auto& c = combo_[l];
    const std::size_t n = units_[l].size();
    const std::size_t k = c.size();
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + (i - 1)) --i;
    if (i > 0) {
      ++c[i - 1];
      for (std::size_t t = i; t < k; ++t) c[t] = c[t - 1] + 1;
      return true;
    }
    std::iota(c.begin(), c.end(), std::size_t{0});
  }
  return false;
}

FaultScenario ScenarioEnumerator::build() const {
  FaultScenario s;
  s.capacity = capacity_;
  s.clamp = opts_.clamp;
  for (std::size_t l0 = 0; l0 < combo_.size(); ++l0) {
    for (std::size_t pos : combo_[l0]) {
      const std::size_t u = units_[l0][pos];
      if (dist_.kind == DistributionKind::neuron) {
        s.neurons.push_back({l0 + 1, u, opts_.mode});
      } else {
        s.synapses.push_back({l0 + 1, u / fan_in_[l0], u % fan_in_[l0], opts_.mode});
      }
    }
  }
  return s;
}

std::optional<FaultScenario> ScenarioEnumerator::next() {
  if (done_) return std::nullopt;
  if (started_ && !advance()) {
    done_ = true;
    return std::nullopt;
  }
  started_ = true;
  return build();
}

// ---------------------------------------------------------------------------
// Documents

namespace {

const char* strategy_name(ByzantinePolicy::Strategy s) {
  switch (s) {
    case ByzantinePolicy::Strategy::worst_case_sign: return "worst_case_sign";
    case ByzantinePolicy::Strategy::constant: return "constant";
    case ByzantinePolicy::Strategy::random_in_capacity: return "random_in_capacity";
    case ByzantinePolicy::Strategy::offset: return "offset";
  }
  return "worst_case_sign";
}

Json mode_to_json(const FaultMode& m) {
  if (m.crash) return "crash";
  Json p;
  p["strategy"] = strategy_name(m.policy.strategy);
  if (m.policy.strategy == ByzantinePolicy::Strategy::constant ||
      m.policy.strategy == ByzantinePolicy::Strategy::offset) {
    p["value"] = m.policy.value;
  }
  if (m.policy.strategy == ByzantinePolicy::Strategy::random_in_capacity) {
    p["seed"] = m.policy.seed;
  }
  return Json{{"byzantine", p}};
}

FaultMode mode_from_json(const Json& j, const std::string& path) {
  if (j.is_string() && j == "crash") return FaultMode::crashed();
  if (!j.is_object() || !j.contains("byzantine") || !j["byzantine"].is_object()) {
    fail(ErrorKind::parse, path + ": expected \"crash\" or {\"byzantine\": {...}}");
  }
  const Json& p = j["byzantine"];
  const std::string s = p.value("strategy", std::string("worst_case_sign"));
  ByzantinePolicy pol;
  if (s == "worst_case_sign") {
    pol = ByzantinePolicy::worst_case_sign();
  } else if (s == "constant" || s == "offset") {
    if (!p.contains("value") || !p["value"].is_number()) {
      fail(ErrorKind::parse, path + ".byzantine.value: required number");
    }
    pol = s == "constant" ? ByzantinePolicy::constant(p["value"].get<double>())
                          : ByzantinePolicy::offset(p["value"].get<double>());
  } else if (s == "random_in_capacity") {
    pol = ByzantinePolicy::random_in_capacity(p.value("seed", std::uint64_t{0}));
  } else {
    fail(ErrorKind::parse, path + ".byzantine.strategy: unknown strategy " + s);
  }
  return FaultMode::byzantine(pol);
}

std::size_t uint_field(const Json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key) || !obj[key].is_number_integer() || obj[key].get<long long>() < 0) {
    fail(ErrorKind::parse, path + "." + key + ": expected a non-negative integer");
  }
  return obj[key].get<std::size_t>();
}

}  // namespace

Json to_json(const FaultScenario& scenario) {
  Json doc;
  doc["capacity"] = scenario.capacity.is_bounded() ? Json(scenario.capacity.value())
                                                   : Json("unbounded");
  doc["clamp"] = scenario.clamp == ClampMode::deviation ? "deviation" : "value";
  doc["neurons"] = Json::array();
  for (const auto& f : scenario.neurons) {
    doc["neurons"].push_back({{"layer", f.layer}, {"index", f.index}, {"mode", mode_to_json(f.mode)}});
  }
  doc["synapses"] = Json::array();
  for (const auto& f : scenario.synapses) {
    doc["synapses"].push_back({{"layer", f.layer},
                               {"receiver", f.receiver},
                               {"sender", f.sender},
                               {"mode", mode_to_json(f.mode)}});
  }
  return doc;
}

FaultScenario scenario_from_json(const Json& doc) {
  if (!doc.is_object()) fail(ErrorKind::parse, "scenario: expected an object");
  FaultScenario s;
  if (!doc.contains("capacity")) fail(ErrorKind::parse, "capacity: required field missing");
  const Json& c = doc["capacity"];
  if (c.is_string() && c == "unbounded") {
    s.capacity = Capacity::unbounded();
  } else if (c.is_number() && c.get<double>() > 0.0) {
    s.capacity = Capacity::bounded(c.get<double>());
  } else {
    fail(ErrorKind::parse, "capacity: expected a positive number or \"unbounded\"");
  }
  if (doc.contains("clamp")) {
    if (doc["clamp"] == "deviation") {
      s.clamp = ClampMode::deviation;
    } else if (doc["clamp"] == "value") {
      s.clamp = ClampMode::value;
    } else {
      fail(ErrorKind::parse, "clamp: expected \"deviation\" or \"value\"");
    }
  }
  if (doc.contains("neurons")) {
    if (!doc["neurons"].is_array()) fail(ErrorKind::parse, "neurons: expected an array");
    for (std::size_t k = 0; k < doc["neurons"].size(); ++k) {
      const Json& e = doc["neurons"][k];
      const std::string path = "neurons[" + std::to_string(k) + "]";
      if (!e.is_object()) fail(ErrorKind::parse, path + ": expected an object");
      s.neurons.push_back({uint_field(e, "layer", path), uint_field(e, "index", path),
                           mode_from_json(e.value("mode", Json("crash")), path + ".mode")});
    }
  }
  if (doc.contains("synapses")) {
    if (!doc["synapses"].is_array()) fail(ErrorKind::parse, "synapses: expected an array");
    for (std::size_t k = 0; k < doc["synapses"].size(); ++k) {
      const Json& e = doc["synapses"][k];
      const std::string path = "synapses[" + std::to_string(k) + "]";
      if (!e.is_object()) fail(ErrorKind::parse, path + ": expected an object");
      s.synapses.push_back({uint_field(e, "layer", path), uint_field(e, "receiver", path),
                            uint_field(e, "sender", path),
                            mode_from_json(e.value("mode", Json("crash")), path + ".mode")});
    }
  }
  return s;
}

Json to_json(const FaultDistribution& dist) {
  return {{"kind", dist.kind == DistributionKind::neuron ? "neuron" : "synapse"},
          {"per_layer", dist.per_layer}};
}

std::vector<std::size_t> parse_counts(std::string_view text) {
  std::vector<std::size_t> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string_view tok = text.substr(pos, comma - pos);
    while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
    while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      fail(ErrorKind::argument, "bad count list: " + std::string(text));
    }
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

}  // namespace neurofail
