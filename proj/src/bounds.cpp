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

#include "neurofail/bounds.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "neurofail/error.hpp"

namespace neurofail {

namespace {

std::vector<std::size_t> widths_of(const Network& net) {
  std::vector<std::size_t> n;
  for (const Layer& l : net.layers()) n.push_back(l.size());
  return n;
}

void check_eps(double eps, double eps_prime) {
  if (!std::isfinite(eps) || !std::isfinite(eps_prime) || eps_prime <= 0.0) {
    fail(ErrorKind::argument, "eps' must be positive and finite");
  }
  if (eps_prime > eps) fail(ErrorKind::argument, "eps' must not exceed eps");
}

void check_capacity(double c) {
  if (!std::isfinite(c) || c <= 0.0) fail(ErrorKind::argument, "capacity must be positive");
}

void finish_certificate(FepReport& r, double eps, double eps_prime) {
  r.eps = eps;
  r.eps_prime = eps_prime;
  r.slack = eps - eps_prime - r.fep;
  r.certified = r.widths_ok && r.fep < eps - eps_prime;
}

}  // namespace

std::vector<double> fep_neuron_terms(const std::vector<std::size_t>& widths,
                                     const std::vector<double>& wm, double k,
                                     const std::vector<std::size_t>& f, double capacity) {
  const std::size_t L = widths.size();
  std::vector<double> terms(L, 0.0);
  for (std::size_t l = 1; l <= L; ++l) {
    const std::size_t fl = f[l - 1];
    if (fl == 0) continue;
    double t = capacity * static_cast<double>(fl) * std::pow(k, static_cast<double>(L - l)) *
               wm[L];
    for (std::size_t lp = l + 1; lp <= L; ++lp) {
      t *= (static_cast<double>(widths[lp - 1]) - static_cast<double>(f[lp - 1])) * wm[lp - 1];
    }
    terms[l - 1] = t;
  }
  return terms;
}

FepReport fep_neurons(const Network& net, const FaultDistribution& dist, double capacity) {
  if (dist.kind != DistributionKind::neuron) {
    fail(ErrorKind::argument, "fep_neurons needs a neuron distribution");
  }
  validate(net, dist);
  check_capacity(capacity);
  FepReport r;
  r.condition = Condition::neurons;
  r.capacity = capacity;
  r.lipschitz_k = net.activation().k();
  r.dist = dist;
  r.max_weights = max_weights(net);
  const auto widths = widths_of(net);
  r.per_layer = fep_neuron_terms(widths, r.max_weights, r.lipschitz_k, dist.per_layer, capacity);
  r.fep = std::accumulate(r.per_layer.begin(), r.per_layer.end(), 0.0);
  for (std::size_t l = 0; l < widths.size(); ++l) {
    if (dist.per_layer[l] >= widths[l]) r.widths_ok = false;
  }
  r.slack = std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::size_t crash_bound_single_layer(const Network& net, double eps, double eps_prime) {
  if (net.num_layers() != 1) fail(ErrorKind::argument, "crash bound needs a single-layer network");
  check_eps(eps, eps_prime);
  const std::size_t n1 = net.layer(0).size();
  const double wm = max_weights(net).back();
  if (wm == 0.0) return n1;
  const double slack = eps - eps_prime;
  double q = std::floor(slack / wm);
  if (q >= static_cast<double>(n1)) return n1;
  auto n = static_cast<std::size_t>(q);
  // Division can land just below an exact integer; accept n + 1 when the
  // product itself still fits.
  if (n < n1 && static_cast<double>(n + 1) * wm <= slack) ++n;
  return n;
}

FepReport certify_neurons(const Network& net, const FaultDistribution& dist, double eps,
                          double eps_prime, double capacity) {
  check_eps(eps, eps_prime);
  FepReport r = fep_neurons(net, dist, capacity);
  finish_certificate(r, eps, eps_prime);
  return r;
}

FepReport fep_synapses(const Network& net, const FaultDistribution& dist, double capacity) {
  if (dist.kind != DistributionKind::synapse) {
    fail(ErrorKind::argument, "fep_synapses needs a synapse distribution");
  }
  validate(net, dist);
  check_capacity(capacity);
  const std::size_t L = net.num_layers();
  FepReport r;
  r.condition = Condition::synapses;
  r.capacity = capacity;
  r.lipschitz_k = net.activation().k();
  r.dist = dist;
  r.max_weights = max_weights(net);
  const auto& wm = r.max_weights;
  const double k = r.lipschitz_k;
  auto width = [&](std::size_t l) -> double {  // 1-based, N_{L+1} = 1
    return l <= L ? static_cast<double>(net.layer(l - 1).size()) : 1.0;
  };

  r.per_layer.assign(L + 1, 0.0);
  double literal = 0.0;
  for (std::size_t l = 1; l <= L + 1; ++l) {
    const double fl = static_cast<double>(dist.per_layer[l - 1]);
    if (fl == 0.0) continue;
    const double head = capacity * fl * std::pow(k, static_cast<double>(L + 1 - l)) * wm[l - 1];
    double sound = head;
    double lit = head;
    for (std::size_t lp = l + 1; lp <= L + 1; ++lp) {
      sound *= width(lp) * wm[lp - 1];
      lit *= (width(lp) - static_cast<double>(dist.per_layer[lp - 1])) * wm[lp - 1];
    }
    r.per_layer[l - 1] = sound;
    literal += lit;
  }
  r.fep = std::accumulate(r.per_layer.begin(), r.per_layer.end(), 0.0);
  r.literal_fep = literal;
  r.slack = std::numeric_limits<double>::quiet_NaN();
  return r;
}

FepReport certify_synapses(const Network& net, const FaultDistribution& dist, double eps,
                           double eps_prime, double capacity) {
  check_eps(eps, eps_prime);
  FepReport r = fep_synapses(net, dist, capacity);
  finish_certificate(r, eps, eps_prime);
  return r;
}

double synapse_error_as_neuron_error(double lambda, const ActivationSpec& spec) {
  if (!std::isfinite(lambda)) fail(ErrorKind::domain, "lambda is not finite");
  return spec.k() * std::abs(lambda);
}

double quantization_bound(const Network& net, const std::vector<double>& lambdas) {
  const std::size_t L = net.num_layers();
  if (lambdas.size() != L) {
    fail(ErrorKind::shape, "quantization bound needs " + std::to_string(L) + " lambdas");
  }
  const auto wm = max_weights(net);
  const double k = net.activation().k();
  double total = 0.0;
  for (std::size_t l = 1; l <= L; ++l) {
    const double lam = lambdas[l - 1];
    if (!std::isfinite(lam) || lam < 0.0) fail(ErrorKind::argument, "lambda must be >= 0");
    double t = std::pow(k, static_cast<double>(L - l)) * lam;
    for (std::size_t lp = l; lp <= L; ++lp) {
      t *= static_cast<double>(net.layer(lp - 1).size()) * wm[lp];
    }
    total += t;
  }
  return total;
}

double value_mode_capacity(const ActivationSpec& spec, double capacity) {
  check_capacity(capacity);
  return capacity + spec.sup_abs();
}

double crash_capacity(const ActivationSpec& spec) { return spec.sup_abs(); }

MaxTolerableResult max_tolerable(const Network& net, double eps, double eps_prime,
                                 double capacity, std::uint64_t cap) {
  check_eps(eps, eps_prime);
  check_capacity(capacity);
  MaxTolerableResult res;
  const double slack = eps - eps_prime;
  if (slack <= 0.0) return res;

  const auto widths = widths_of(net);
  const auto wm = max_weights(net);
  const double k = net.activation().k();
  const std::size_t L = widths.size();

  auto feasible = [&](const std::vector<std::size_t>& f) {
    for (std::size_t l = 0; l < L; ++l) {
      if (f[l] >= widths[l]) return false;
    }
    const auto t = fep_neuron_terms(widths, wm, k, f, capacity);
    return std::accumulate(t.begin(), t.end(), 0.0) < slack;
  };

  std::vector<std::size_t> f(L, 0);
  for (;;) {
    if (res.evaluated >= cap) {
      res.partial = true;
      break;
    }
    ++res.evaluated;
    if (feasible(f)) {
      bool maximal = true;
      for (std::size_t l = 0; l < L && maximal; ++l) {
        auto g = f;
        ++g[l];
        if (feasible(g)) maximal = false;
      }
      if (maximal) res.maximal.push_back(FaultDistribution::neurons(f));
    }
    bool wrapped = true;
    for (std::size_t l = L; l-- > 0;) {
      if (++f[l] < widths[l]) {
        wrapped = false;
        break;
      }
      f[l] = 0;
    }
    if (wrapped) break;
  }
  return res;
}

Json to_json(const FepReport& r) {
  Json doc;
  doc["condition"] = r.condition == Condition::neurons ? "neurons" : "synapses";
  doc["fep"] = r.fep;
  doc["per_layer"] = r.per_layer;
  doc["capacity"] = r.capacity;
  doc["k"] = r.lipschitz_k;
  doc["distribution"] = to_json(r.dist);
  doc["max_weights"] = r.max_weights;
  if (r.eps) {
    doc["eps"] = *r.eps;
    doc["eps_prime"] = *r.eps_prime;
    doc["slack"] = r.slack;
    doc["certified"] = r.certified;
    doc["widths_ok"] = r.widths_ok;
  } else {
    doc["slack"] = nullptr;
    doc["certified"] = false;
  }
  if (r.literal_fep) doc["literal_fep"] = *r.literal_fep;
  return doc;
}

}  // namespace neurofail
