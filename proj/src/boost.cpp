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

#include "neurofail/boost.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <queue>
#include <sstream>

#include "neurofail/rng.hpp"

namespace neurofail {

namespace {

constexpr std::uint64_t kLatencyTag = 0x6c6174656e6379ULL;

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

double parse_real(const std::string& s, const std::string& whole) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) fail(ErrorKind::parse, "bad latency model '" + whole + "'");
  return v;
}

}  // namespace

LatencyModel LatencyModel::uniform(double lo, double hi, std::uint64_t seed) {
  LatencyModel m;
  m.kind = LatencyKind::uniform;
  m.a = lo;
  m.b = hi;
  m.seed = seed;
  validate(m);
  return m;
}

LatencyModel LatencyModel::exponential(double mean, std::uint64_t seed) {
  LatencyModel m;
  m.kind = LatencyKind::exponential;
  m.a = mean;
  m.seed = seed;
  validate(m);
  return m;
}

LatencyModel LatencyModel::heavy_tail(double mean, double p, double factor, std::uint64_t seed) {
  LatencyModel m;
  m.kind = LatencyKind::heavy_tail;
  m.a = mean;
  m.p_straggler = p;
  m.straggler_factor = factor;
  m.seed = seed;
  validate(m);
  return m;
}

LatencyModel LatencyModel::with_seed(std::uint64_t s) const {
  LatencyModel m = *this;
  m.seed = s;
  return m;
}

double LatencyModel::sample(std::size_t layer, std::size_t neuron) const {
  Rng rng(derive_seed(seed, kLatencyTag, layer, neuron));
  switch (kind) {
    case LatencyKind::uniform:
      return rng.uniform(a, b);
    case LatencyKind::exponential:
      return rng.exponential(a);
    case LatencyKind::heavy_tail: {
      double t = a * (0.5 + rng.uniform());
      if (rng.uniform() < p_straggler) t *= straggler_factor;
      return t;
    }
  }
  return a;
}

void validate(const LatencyModel& m) {
  switch (m.kind) {
    case LatencyKind::uniform:
      if (!positive(m.a) || !positive(m.b) || m.b < m.a) {
        fail(ErrorKind::argument, "uniform latency needs 0 < lo <= hi");
      }
      break;
    case LatencyKind::exponential:
      if (!positive(m.a)) fail(ErrorKind::argument, "exponential latency needs mean > 0");
      break;
    case LatencyKind::heavy_tail:
      if (!positive(m.a)) fail(ErrorKind::argument, "heavy_tail latency needs mean > 0");
      if (!(m.p_straggler >= 0.0 && m.p_straggler <= 1.0)) {
        fail(ErrorKind::argument, "straggler probability must lie in [0,1]");
      }
      if (!(m.straggler_factor >= 1.0) || !std::isfinite(m.straggler_factor)) {
        fail(ErrorKind::argument, "straggler factor must be >= 1");
      }
      break;
  }
}

LatencyModel latency_from_string(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::vector<double> args;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) args.push_back(parse_real(tok, text));
  }
  if (kind == "uniform" && args.size() == 2) return LatencyModel::uniform(args[0], args[1]);
  if (kind == "exponential" && args.size() == 1) return LatencyModel::exponential(args[0]);
  if (kind == "heavy_tail" && args.size() == 3) {
    return LatencyModel::heavy_tail(args[0], args[1], args[2]);
  }
  fail(ErrorKind::parse, "bad latency model '" + text +
                             "' (uniform:lo,hi | exponential:mean | heavy_tail:mean,p,factor)");
}

std::string to_string(const LatencyModel& m) {
  // Shortest text that parses back to the same double.
  auto num = [](double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
  };
  switch (m.kind) {
    case LatencyKind::uniform: return "uniform:" + num(m.a) + ',' + num(m.b);
    case LatencyKind::exponential: return "exponential:" + num(m.a);
    case LatencyKind::heavy_tail:
      return "heavy_tail:" + num(m.a) + ',' + num(m.p_straggler) + ',' + num(m.straggler_factor);
  }
  return {};
}

BoostPolicy BoostPolicy::certified(const Network& net, std::vector<std::size_t> cut_counts,
                                   double eps, double eps_prime) {
  if (cut_counts.size() != net.num_layers()) {
    fail(ErrorKind::policy, "cut_counts needs one entry per hidden layer");
  }
  for (std::size_t l = 0; l < cut_counts.size(); ++l) {
    const Layer& layer = net.layer(l);
    const std::size_t regular = layer.size() - (layer.constant_neuron ? 1 : 0);
    if (cut_counts[l] > regular) {
      fail(ErrorKind::policy, "cut count for layer " + std::to_string(l + 1) +
                                  " exceeds its non-constant neurons");
    }
  }
  BoostPolicy p;
  p.report_ = certify_neurons(net, FaultDistribution::neurons(cut_counts), eps, eps_prime,
                              crash_capacity(net.activation()));
  if (!p.report_.certified) {
    std::ostringstream os;
    os.precision(6);
    os << "cut policy is not certified: Fep " << p.report_.fep << " vs eps - eps' "
       << eps - eps_prime;
    fail(ErrorKind::policy, os.str());
  }
  p.cut_ = std::move(cut_counts);
  p.eps_ = eps;
  p.eps_prime_ = eps_prime;
  p.layers_ = net.num_layers();
  for (const Layer& layer : net.layers()) p.widths_.push_back(layer.size());
  return p;
}

BoostPolicy BoostPolicy::wait_all(const Network& net, double eps, double eps_prime) {
  return certified(net, std::vector<std::size_t>(net.num_layers(), 0), eps, eps_prime);
}

void check_policy(const Network& net, const BoostPolicy& policy) {
  bool same = policy.layers_ == net.num_layers();
  for (std::size_t l = 0; same && l < net.num_layers(); ++l) {
    same = policy.widths_[l] == net.layer(l).size();
  }
  if (!same) fail(ErrorKind::policy, "policy was validated for a different network shape");
}

namespace {

struct Arrival {
  double time;
  std::size_t index;
  bool operator>(const Arrival& o) const {
    return time != o.time ? time > o.time : index > o.index;
  }
};

// Pops arrivals in (time, index) order. Returns the time at which `quota`
// senders have arrived; the rest go to `dropped`.
double collect(std::vector<Arrival> arrivals, std::size_t quota,
               std::vector<std::size_t>* dropped) {
  std::priority_queue<Arrival, std::vector<Arrival>, std::greater<>> q(
      std::greater<>{}, std::move(arrivals));
  double t = 0.0;
  std::size_t got = 0;
  while (!q.empty()) {
    const Arrival a = q.top();
    q.pop();
    if (got < quota) {
      ++got;
      t = a.time;
    } else if (dropped) {
      dropped->push_back(a.index);
    }
  }
  return t;
}

std::vector<Arrival> arrivals_for(const Network& net, std::size_t l, double start,
                                  const std::vector<double>& lat) {
  const Layer& layer = net.layer(l);
  std::vector<Arrival> a(layer.size());
  for (std::size_t j = 0; j < layer.size(); ++j) {
    a[j] = {layer.is_constant(j) ? start : start + lat[j], j};
  }
  return a;
}

}  // namespace

BoostOutcome simulate_boost(const Network& net, std::span<const double> x,
                            const LatencyModel& latency, const BoostPolicy& policy) {
  check_policy(net, policy);
  validate(latency);
  check_input(net, x);
  const std::size_t L = net.num_layers();
  const auto& cut = policy.cut_counts();

  BoostOutcome out;
  out.per_layer_dropped.resize(L);
  double start_boost = 0.0;
  double start_full = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    const Layer& layer = net.layer(l);
    std::vector<double> lat(layer.size());
    for (std::size_t j = 0; j < layer.size(); ++j) lat[j] = latency.sample(l + 1, j);
    auto& dropped = out.per_layer_dropped[l];
    start_boost = collect(arrivals_for(net, l, start_boost, lat), layer.size() - cut[l], &dropped);
    start_full = collect(arrivals_for(net, l, start_full, lat), layer.size(), nullptr);
    std::sort(dropped.begin(), dropped.end());
  }
  out.makespan_boosted = start_boost;
  out.makespan_full = start_full;

  // Values: dropped senders contribute nothing, the receivers sum the rest.
  const ActivationSpec& act = net.activation();
  std::vector<double> prev(x.begin(), x.end());
  if (net.input_bias()) prev.push_back(1.0);
  std::vector<double> nominal_prev = prev;
  for (std::size_t l = 0; l < L; ++l) {
    const Layer& layer = net.layer(l);
    std::vector<double> y(layer.size()), yn(layer.size());
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (layer.is_constant(j)) {
        y[j] = yn[j] = 1.0;
        continue;
      }
      double s = 0.0, sn = 0.0;
      const auto row = layer.weights.row(j);
      for (std::size_t i = 0; i < row.size(); ++i) {
        s += row[i] * prev[i];
        sn += row[i] * nominal_prev[i];
      }
      y[j] = quantize_output(net, act.eval(s));
      yn[j] = quantize_output(net, act.eval(sn));
    }
    for (std::size_t j : out.per_layer_dropped[l]) y[j] = 0.0;
    prev = std::move(y);
    nominal_prev = std::move(yn);
  }
  const auto& w = net.output_weights();
  for (std::size_t i = 0; i < w.size(); ++i) {
    out.output += w[i] * prev[i];
    out.nominal_output += w[i] * nominal_prev[i];
  }
  out.observed_error_vs_nominal = std::abs(out.output - out.nominal_output);

  out.induced.capacity = Capacity::bounded(crash_capacity(act));
  for (std::size_t l = 0; l < L; ++l) {
    for (std::size_t j : out.per_layer_dropped[l]) {
      out.induced.neurons.push_back({l + 1, j, FaultMode::crashed()});
    }
  }
  const double reference = forward_faulty(net, x, out.induced);
  if (!(std::abs(reference - out.output) <= 1e-12)) {
    fail(ErrorKind::violation, "boosted output disagrees with the induced crash scenario");
  }
  return out;
}

BoostCampaignResult boost_campaign(const Network& net, const TargetFunction& target, double eps,
                                   double eps_prime, const LatencyModel& latency,
                                   const BoostPolicy& policy, std::size_t trials,
                                   std::uint64_t seed) {
  if (trials == 0) fail(ErrorKind::argument, "trials must be >= 1");
  if (target.dim() != net.input_dim()) fail(ErrorKind::shape, "target and network dimensions differ");
  if (policy.eps() != eps || policy.eps_prime() != eps_prime) {
    fail(ErrorKind::policy, "policy was validated for a different (eps, eps')");
  }
  BoostCampaignResult res;
  res.eps = eps;
  res.summary.axis = "trial";
  SweepRow row;
  row.bound = eps;
  row.trials = trials;
  double total_err = 0.0, total_speedup = 0.0;
  res.min_speedup = std::numeric_limits<double>::infinity();
  res.max_speedup = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, t));
    std::vector<double> x(net.input_dim());
    for (double& v : x) v = rng.uniform();
    const BoostOutcome o = simulate_boost(net, x, latency.with_seed(rng.next()), policy);
    BoostTrial tr;
    tr.trial = t;
    tr.output = o.output;
    tr.target = target(x);
    tr.abs_err = std::abs(tr.target - tr.output);
    tr.makespan_full = o.makespan_full;
    tr.makespan_boost = o.makespan_boosted;
    tr.speedup = o.makespan_boosted > 0.0 ? o.makespan_full / o.makespan_boosted : 1.0;
    if (tr.abs_err > eps) {
      std::ostringstream os;
      os.precision(17);
      os << "trial " << t << ": |F(x) - boosted output| = " << tr.abs_err << " exceeds eps "
         << eps;
      Json ce = to_json(o);
      ce["input"] = x;
      ce["target"] = tr.target;
      ce["latency"] = to_string(latency);
      throw BoundViolation(os.str(), ce);
    }
    row.max_error = std::max(row.max_error, tr.abs_err);
    row.max_utilization = std::max(row.max_utilization, utilization(tr.abs_err, eps));
    total_err += tr.abs_err;
    total_speedup += tr.speedup;
    res.min_speedup = std::min(res.min_speedup, tr.speedup);
    res.max_speedup = std::max(res.max_speedup, tr.speedup);
    res.trials.push_back(tr);
  }
  row.mean_error = total_err / static_cast<double>(trials);
  res.mean_speedup = total_speedup / static_cast<double>(trials);
  res.summary.rows.push_back(row);
  return res;
}

std::string boost_csv(const BoostCampaignResult& result) {
  std::ostringstream os;
  os.precision(17);
  os << "trial,output,target,abs_err,eps,makespan_full,makespan_boost,speedup\n";
  for (const auto& t : result.trials) {
    os << t.trial << ',' << t.output << ',' << t.target << ',' << t.abs_err << ',' << result.eps
       << ',' << t.makespan_full << ',' << t.makespan_boost << ',' << t.speedup << '\n';
  }
  return os.str();
}

Json to_json(const BoostOutcome& o) {
  return {{"output", o.output},
          {"nominal_output", o.nominal_output},
          {"per_layer_dropped", o.per_layer_dropped},
          {"makespan_boosted", o.makespan_boosted},
          {"makespan_full", o.makespan_full},
          {"observed_error_vs_nominal", o.observed_error_vs_nominal},
          {"induced_scenario", to_json(o.induced)}};
}

}  // namespace neurofail
