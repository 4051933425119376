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

#include "neurofail/neurofail.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <string>

#include "neurofail/boost.hpp"
#include "neurofail/bounds.hpp"
#include "neurofail/empirical.hpp"
#include "neurofail/error.hpp"
#include "neurofail/fault.hpp"
#include "neurofail/net.hpp"
#include "neurofail/target.hpp"
#include "neurofail/trainer.hpp"

struct nf_network {
  neurofail::Network net;
};

namespace nf = neurofail;
using nf::Json;

namespace {

thread_local std::string g_last_error;

nf_status status_of(nf::ErrorKind kind) {
  switch (kind) {
    case nf::ErrorKind::domain: return NF_ERR_DOMAIN;
    case nf::ErrorKind::shape: return NF_ERR_SHAPE;
    case nf::ErrorKind::parse: return NF_ERR_PARSE;
    case nf::ErrorKind::scenario: return NF_ERR_SCENARIO;
    case nf::ErrorKind::policy: return NF_ERR_POLICY;
    case nf::ErrorKind::argument: return NF_ERR_ARGUMENT;
    case nf::ErrorKind::cap: return NF_ERR_CAP;
    case nf::ErrorKind::training: return NF_ERR_TRAINING;
    case nf::ErrorKind::violation: return NF_ERR_VIOLATION;
    case nf::ErrorKind::io: return NF_ERR_IO;
  }
  return NF_ERR_INTERNAL;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// Runs fn, translating exceptions into a status and the thread-local message.
// `error_doc` receives a description of the failure when non-null.
template <typename Fn>
nf_status guarded(Fn&& fn, Json* error_doc = nullptr) {
  nf_status st = NF_OK;
  try {
    fn();
    g_last_error.clear();
    return NF_OK;
  } catch (const nf::BoundViolation& e) {
    g_last_error = e.what();
    st = NF_ERR_VIOLATION;
    if (error_doc) (*error_doc)["counterexample"] = e.counterexample();
  } catch (const nf::Error& e) {
    g_last_error = e.what();
    st = status_of(e.kind());
  } catch (const Json::exception& e) {
    g_last_error = std::string("request: ") + e.what();
    st = NF_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    st = NF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    st = NF_ERR_INTERNAL;
  }
  if (error_doc) {
    (*error_doc)["error"] = g_last_error;
    (*error_doc)["kind"] = nf_status_name(st);
  }
  return st;
}

nf_status null_arg(const char* what) {
  g_last_error = std::string(what) + " must not be null";
  return NF_ERR_ARGUMENT;
}

nf::FaultDistribution make_dist(nf_fault_kind kind, const size_t* counts, size_t n) {
  if (n > 0 && !counts) nf::fail(nf::ErrorKind::argument, "counts must not be null");
  std::vector<std::size_t> f(counts, counts + n);
  return kind == NF_SYNAPSES ? nf::FaultDistribution::synapses(std::move(f))
                             : nf::FaultDistribution::neurons(std::move(f));
}

// ---------------------------------------------------------------------------
// Request helpers

template <typename T>
T opt(const Json& req, const char* key, T fallback) {
  const auto it = req.find(key);
  if (it == req.end() || it->is_null()) return fallback;
  return it->get<T>();
}

template <typename T>
T need(const Json& req, const char* key) {
  const auto it = req.find(key);
  if (it == req.end() || it->is_null()) {
    nf::fail(nf::ErrorKind::argument, std::string("request is missing '") + key + "'");
  }
  return it->get<T>();
}

// Inline document under "net", or a file under "net_path".
nf::Network net_of(const Json& req) {
  if (!req.contains("net") && req.contains("net_path")) {
    return nf::load_file(need<std::string>(req, "net_path"));
  }
  return nf::network_from_json(need<Json>(req, "net"));
}

nf::DistributionKind kind_of(const Json& req) {
  const std::string k = opt<std::string>(req, "kind", "neurons");
  if (k == "neurons" || k == "neuron") return nf::DistributionKind::neuron;
  if (k == "synapses" || k == "synapse") return nf::DistributionKind::synapse;
  nf::fail(nf::ErrorKind::argument, "kind must be neurons or synapses, got '" + k + "'");
}

nf::FaultDistribution dist_of(const Json& req) {
  auto f = need<std::vector<std::size_t>>(req, "dist");
  return kind_of(req) == nf::DistributionKind::neuron ? nf::FaultDistribution::neurons(f)
                                                      : nf::FaultDistribution::synapses(f);
}

nf::ClampMode clamp_of(const Json& req) {
  const std::string c = opt<std::string>(req, "clamp", "deviation");
  if (c == "deviation") return nf::ClampMode::deviation;
  if (c == "value") return nf::ClampMode::value;
  nf::fail(nf::ErrorKind::argument, "clamp must be deviation or value, got '" + c + "'");
}

// Capacity the analytic bound has to use for a given clamp convention.
double bound_capacity(const nf::Network& net, double capacity, nf::ClampMode clamp) {
  return clamp == nf::ClampMode::value ? nf::value_mode_capacity(net.activation(), capacity)
                                       : capacity;
}

nf::FepReport fep_of(const nf::Network& net, const nf::FaultDistribution& dist, double c) {
  return dist.kind == nf::DistributionKind::neuron ? nf::fep_neurons(net, dist, c)
                                                   : nf::fep_synapses(net, dist, c);
}

nf::FepReport certify_of(const nf::Network& net, const nf::FaultDistribution& dist, double eps,
                         double eps_prime, double c) {
  return dist.kind == nf::DistributionKind::neuron
             ? nf::certify_neurons(net, dist, eps, eps_prime, c)
             : nf::certify_synapses(net, dist, eps, eps_prime, c);
}

nf::TargetFunction target_of(const Json& req, const nf::Network* net) {
  const std::string name = opt<std::string>(req, "target", "ridge_sine");
  if (name == "self") {
    if (!net) nf::fail(nf::ErrorKind::argument, "target 'self' needs a network");
    return nf::TargetFunction::of_network(*net);
  }
  return nf::TargetFunction::by_name(name);
}

nf::ActivationSpec activation_of(const Json& req) {
  const std::string kind = opt<std::string>(req, "activation", "sigmoid");
  const double k = opt<double>(req, "k", 1.0);
  if (kind == "sigmoid") return {nf::ActivationKind::sigmoid, k};
  if (kind == "tanh") return {nf::ActivationKind::tanh, k};
  nf::fail(nf::ErrorKind::argument, "activation must be sigmoid or tanh, got '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Operations. Each fills `res` with result / csv / verdict.

void op_analyze(const Json& req, Json& res, bool certify) {
  const nf::Network net = net_of(req);
  const nf::FaultDistribution dist = dist_of(req);
  const double capacity = need<double>(req, "capacity");
  const double c = bound_capacity(net, capacity, clamp_of(req));
  Json out;
  out["bound_capacity"] = c;
  if (certify) {
    const nf::FepReport r =
        certify_of(net, dist, need<double>(req, "eps"), need<double>(req, "eps_prime"), c);
    out["report"] = nf::to_json(r);
    res["verdict"] = r.certified;
  } else {
    out["report"] = nf::to_json(fep_of(net, dist, c));
    if (req.contains("eps") && req.contains("eps_prime")) {
      const double eps = need<double>(req, "eps");
      const double eps_prime = need<double>(req, "eps_prime");
      if (dist.kind == nf::DistributionKind::neuron) {
        const auto mt = nf::max_tolerable(net, eps, eps_prime, c,
                                          opt<std::uint64_t>(req, "cap", 1000000));
        Json m = Json::array();
        for (const auto& d : mt.maximal) m.push_back(d.per_layer);
        out["max_tolerable"] = {
            {"maximal", m}, {"partial", mt.partial}, {"evaluated", mt.evaluated}};
      }
      if (net.num_layers() == 1) {
        out["crash_bound_single_layer"] = nf::crash_bound_single_layer(net, eps, eps_prime);
      }
    }
  }
  res["result"] = out;
}

void op_inject(const Json& req, Json& res) {
  const nf::Network net = net_of(req);
  const nf::FaultScenario s = nf::scenario_from_json(need<Json>(req, "scenario"));
  std::vector<double> x = opt<std::vector<double>>(
      req, "input", std::vector<double>(net.input_dim(), 0.5));
  const nf::FaultyEvaluation ev = nf::evaluate_faulty(net, x, s);
  const double err = std::abs(ev.nominal_output - ev.faulty_output);
  Json out = {{"input", x},
              {"nominal_output", ev.nominal_output},
              {"faulty_output", ev.faulty_output},
              {"observed_error", err},
              {"max_byzantine_deviation", ev.max_byzantine_deviation},
              {"max_byzantine_value", ev.max_byzantine_value}};

  // A bound exists when the faults are all of one kind and values are capped.
  bool any_byz = false;
  for (const auto& n : s.neurons) any_byz |= !n.mode.crash;
  for (const auto& y : s.synapses) any_byz |= !y.mode.crash;
  const bool one_kind = s.neurons.empty() || s.synapses.empty();
  if (one_kind && (s.capacity.is_bounded() || !any_byz)) {
    double c = s.capacity.is_bounded() ? bound_capacity(net, s.capacity.value(), s.clamp) : 0.0;
    const bool any_crash = std::any_of(s.neurons.begin(), s.neurons.end(),
                                       [](const auto& n) { return n.mode.crash; }) ||
                           std::any_of(s.synapses.begin(), s.synapses.end(),
                                       [](const auto& y) { return y.mode.crash; });
    if (any_crash) c = std::max(c, nf::crash_capacity(net.activation()));
    const std::size_t L = net.num_layers();
    nf::FaultDistribution dist;
    if (!s.synapses.empty()) {
      std::vector<std::set<std::pair<std::size_t, std::size_t>>> units(L + 1);
      for (const auto& y : s.synapses) units.at(y.layer - 1).insert({y.receiver, y.sender});
      std::vector<std::size_t> f;
      for (const auto& u : units) f.push_back(u.size());
      dist = nf::FaultDistribution::synapses(f);
    } else {
      std::vector<std::set<std::size_t>> units(L);
      for (const auto& n : s.neurons) units.at(n.layer - 1).insert(n.index);
      std::vector<std::size_t> f;
      for (const auto& u : units) f.push_back(u.size());
      dist = nf::FaultDistribution::neurons(f);
    }
    if (c > 0.0) {
      const nf::FepReport r = fep_of(net, dist, c);
      out["bound"] = r.fep;
      out["bound_capacity"] = c;
      out["dist"] = nf::to_json(dist);
      res["verdict"] = err <= r.fep + nf::kSoundnessTolerance;
    } else {
      out["bound"] = 0.0;
      res["verdict"] = err == 0.0;
    }
  }
  res["result"] = out;
}

void op_soundness(const Json& req, Json& res) {
  const nf::Network net = net_of(req);
  nf::SoundnessOptions o;
  o.clamp = clamp_of(req);
  const std::string mix = opt<std::string>(req, "policies", "mixed");
  if (mix == "random") o.policies = nf::PolicyMix::random;
  else if (mix == "adversarial") o.policies = nf::PolicyMix::adversarial;
  else if (mix == "mixed") o.policies = nf::PolicyMix::mixed;
  else nf::fail(nf::ErrorKind::argument, "policies must be random, adversarial or mixed");
  const auto r = nf::soundness_sweep(net, dist_of(req), need<double>(req, "capacity"),
                                     opt<std::size_t>(req, "trials", 1000),
                                     opt<std::uint64_t>(req, "seed", 0), o);
  res["result"] = nf::to_json(r);
  res["csv"] = nf::soundness_csv(r);
  res["verdict"] = true;
}

void op_sweep_k(const Json& req, Json& res) {
  nf::LinearRegimeFamily fam;
  fam.input_dim = opt<std::size_t>(req, "input_dim", fam.input_dim);
  fam.layers = opt<std::size_t>(req, "layers", fam.layers);
  fam.width = opt<std::size_t>(req, "width", fam.width);
  fam.weight = opt<double>(req, "weight", fam.weight);
  const std::size_t layer = opt<std::size_t>(req, "fault_layer", 1);
  if (layer < 1 || layer > fam.layers) {
    nf::fail(nf::ErrorKind::argument, "fault_layer must lie in 1..layers");
  }
  std::vector<std::size_t> f(fam.layers, 0);
  f[layer - 1] = opt<std::size_t>(req, "faults", 1);
  const auto ks = need<std::vector<double>>(req, "k");
  const auto r = nf::k_sweep(fam, nf::FaultDistribution::neurons(f), ks,
                             opt<double>(req, "capacity", 0.01),
                             opt<std::size_t>(req, "trials", 200),
                             opt<std::uint64_t>(req, "seed", 0));
  Json out = nf::to_json(r);
  out["expected_slope"] = static_cast<double>(fam.layers - layer);
  if (ks.size() >= 2) {
    std::vector<double> fep, obs;
    for (const auto& row : r.rows) {
      fep.push_back(row.bound);
      obs.push_back(row.max_error);
    }
    const bool positive = std::all_of(fep.begin(), fep.end(), [](double v) { return v > 0; }) &&
                          std::all_of(obs.begin(), obs.end(), [](double v) { return v > 0; });
    if (positive) {
      out["fep_slope"] = nf::loglog_slope(ks, fep);
      out["observed_slope"] = nf::loglog_slope(ks, obs);
    }
  }
  res["result"] = out;
  res["csv"] = nf::k_sweep_csv(r);
}

void op_quantize(const Json& req, Json& res) {
  const nf::Network net = net_of(req);
  const auto bits = opt<std::vector<int>>(req, "bits", {4, 6, 8, 10});
  const auto rows = nf::quantization_experiment(net, bits, opt<std::size_t>(req, "inputs", 1000));
  Json arr = Json::array();
  bool ok = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    arr.push_back({{"bits", r.bits},
                   {"lambda", r.lambda},
                   {"bound", r.bound},
                   {"max_error", r.max_error},
                   {"violations", r.violations}});
    ok = ok && r.violations == 0;
    if (i > 0 && bits[i] > bits[i - 1]) ok = ok && r.max_error <= rows[i - 1].max_error;
  }
  res["result"] = {{"rows", arr}};
  res["csv"] = nf::quantization_csv(rows);
  res["verdict"] = ok;
}

nf::TrainConfig train_config_of(const Json& req) {
  nf::TrainConfig cfg;
  cfg.layer_sizes = opt<std::vector<std::size_t>>(req, "layers", cfg.layer_sizes);
  cfg.activation = activation_of(req);
  const std::string o = opt<std::string>(req, "optimizer", "adam");
  if (o == "adam") cfg.optimizer = nf::Optimizer::adam;
  else if (o == "gd") cfg.optimizer = nf::Optimizer::gradient_descent;
  else nf::fail(nf::ErrorKind::argument, "optimizer must be adam or gd");
  cfg.learning_rate = opt<double>(req, "lr", cfg.learning_rate);
  cfg.epochs = opt<std::size_t>(req, "epochs", cfg.epochs);
  cfg.batch_size = opt<std::size_t>(req, "batch_size", cfg.batch_size);
  cfg.samples = opt<std::size_t>(req, "samples", cfg.samples);
  cfg.seed = opt<std::uint64_t>(req, "seed", cfg.seed);
  cfg.weight_decay = opt<double>(req, "weight_decay", cfg.weight_decay);
  if (req.contains("target_eps_prime") && !req["target_eps_prime"].is_null()) {
    cfg.target_eps_prime = req["target_eps_prime"].get<double>();
  }
  cfg.grid_per_dim = opt<std::size_t>(req, "grid", cfg.grid_per_dim);
  cfg.log_every = opt<std::size_t>(req, "log_every", cfg.log_every);
  cfg.input_bias = opt<bool>(req, "input_bias", cfg.input_bias);
  cfg.output_only = opt<bool>(req, "output_only", cfg.output_only);
  cfg.init_scale = opt<double>(req, "init_scale", cfg.init_scale);
  return cfg;
}

void op_train(const Json& req, Json& res) {
  const nf::TargetFunction target = target_of(req, nullptr);
  const nf::TrainConfig cfg = train_config_of(req);
  if (req.contains("overprovision")) {
    const Json& op = req["overprovision"];
    nf::OverprovisionConfig oc;
    oc.base = cfg;
    oc.max_neurons = opt<std::size_t>(op, "max_neurons", oc.max_neurons);
    oc.max_retrain_rounds = opt<std::size_t>(op, "rounds", oc.max_retrain_rounds);
    oc.finetune_epochs = opt<std::size_t>(op, "finetune_epochs", oc.finetune_epochs);
    oc.finetune_decay = opt<double>(op, "finetune_decay", oc.finetune_decay);
    const auto r = nf::overprovision_pair(
        target, need<double>(op, "eps"), need<double>(op, "eps_prime"),
        nf::FaultDistribution::neurons(need<std::vector<std::size_t>>(op, "dist")),
        opt<double>(op, "capacity", 1.0), oc);
    res["result"] = {{"net", nf::to_json(r.net)},
                     {"report", nf::to_json(r.report)},
                     {"measured_eps_prime", r.measured_eps_prime},
                     {"accurate", r.accurate},
                     {"certified", r.certified},
                     {"steps", r.steps}};
    res["verdict"] = r.certified;
    return;
  }
  const nf::TrainResult r = nf::train(target, cfg);
  res["result"] = {{"net", nf::to_json(r.net)}, {"eps_prime", r.eps_prime}};
  res["csv"] = nf::training_log_csv(r.log);
}

void op_boost(const Json& req, Json& res) {
  const nf::Network net = net_of(req);
  const nf::TargetFunction target = target_of(req, &net);
  const double eps = need<double>(req, "eps");
  const double eps_prime = need<double>(req, "eps_prime");
  const auto policy = nf::BoostPolicy::certified(
      net, need<std::vector<std::size_t>>(req, "cut"), eps, eps_prime);
  const auto latency = nf::latency_from_string(opt<std::string>(req, "latency", "heavy_tail:1,0.2,10"));
  const auto r = nf::boost_campaign(net, target, eps, eps_prime, latency, policy,
                                    opt<std::size_t>(req, "trials", 1000),
                                    opt<std::uint64_t>(req, "seed", 0));
  res["result"] = {{"summary", nf::to_json(r.summary)},
                   {"policy", nf::to_json(policy.report())},
                   {"latency", nf::to_string(latency)},
                   {"mean_speedup", r.mean_speedup},
                   {"min_speedup", r.min_speedup},
                   {"max_speedup", r.max_speedup}};
  res["csv"] = nf::boost_csv(r);
  res["verdict"] = true;
}

void op_brute_check(const Json& req, Json& res) {
  const nf::Network net = net_of(req);
  const nf::TargetFunction target = target_of(req, &net);
  const nf::FaultDistribution dist = dist_of(req);
  const double eps = need<double>(req, "eps");
  const std::string mode = opt<std::string>(req, "mode", "crash");
  nf::BruteMode bm;
  if (mode == "crash") bm = nf::BruteMode::crash;
  else if (mode == "byzantine") bm = nf::BruteMode::byzantine_worst_case;
  else nf::fail(nf::ErrorKind::argument, "mode must be crash or byzantine");
  const double capacity = opt<double>(req, "capacity", 1.0);
  const auto r = nf::brute_force_certify(net, dist, eps, target, capacity,
                                         opt<std::size_t>(req, "grid", 11), bm,
                                         opt<std::uint64_t>(req, "cap", 1000000));
  Json out = {{"pass", r.pass},
              {"max_error", r.max_error},
              {"scenarios", r.scenarios},
              {"worst_input", r.worst_input},
              {"worst_scenario", nf::to_json(r.worst_scenario)}};
  if (req.contains("eps_prime")) {
    out["certify"] = nf::to_json(certify_of(net, dist, eps, need<double>(req, "eps_prime"),
                                            bm == nf::BruteMode::crash
                                                ? std::max(capacity, 1.0)
                                                : capacity));
  }
  res["result"] = out;
  res["verdict"] = r.pass;
  if (!r.pass) {
    res["counterexample"] = {{"input", r.worst_input},
                             {"scenario", nf::to_json(r.worst_scenario)},
                             {"error", r.max_error},
                             {"eps", eps}};
  }
}

void op_lemma1(const Json& req, Json& res) {
  const nf::Network net = net_of(req);
  const double eps = need<double>(req, "eps");
  const auto x = opt<std::vector<double>>(req, "input",
                                          std::vector<double>(net.input_dim(), 0.5));
  std::optional<double> c;
  if (req.contains("capacity")) c = need<double>(req, "capacity");
  const auto r = nf::lemma1_demo(net, eps, x, c);
  res["result"] = nf::to_json(r);
  bool ok = r.observed_error > eps;
  if (c) ok = ok && r.clamped_error <= r.clamped_bound + nf::kSoundnessTolerance;
  res["verdict"] = ok;
}

void op_tightness(const Json& req, Json& res) {
  const double w_m = need<double>(req, "w_m");
  const std::size_t n = need<std::size_t>(req, "neurons");
  const double alpha = opt<double>(req, "alpha", 0.01);
  const double k = opt<double>(req, "k", 1.0);
  const auto r = req.contains("slack")
                     ? nf::tightness_from_slack(need<double>(req, "slack"), w_m, n, alpha, k)
                     : nf::tightness_experiment(need<std::size_t>(req, "n_fail"), w_m, n, alpha, k);
  res["result"] = {{"n_fail", r.n_fail},
                   {"w_m", r.w_m},
                   {"alpha", r.alpha},
                   {"observed_error", r.observed_error},
                   {"bound", r.bound},
                   {"utilization", r.utilization},
                   {"net", nf::to_json(r.net)}};
  res["verdict"] = r.observed_error <= r.bound + nf::kSoundnessTolerance;
}

}  // namespace

extern "C" {

const char* nf_last_error(void) { return g_last_error.c_str(); }

const char* nf_status_name(nf_status status) {
  switch (status) {
    case NF_OK: return "ok";
    case NF_ERR_DOMAIN: return "domain";
    case NF_ERR_SHAPE: return "shape";
    case NF_ERR_PARSE: return "parse";
    case NF_ERR_SCENARIO: return "scenario";
    case NF_ERR_POLICY: return "policy";
    case NF_ERR_ARGUMENT: return "argument";
    case NF_ERR_CAP: return "cap";
    case NF_ERR_TRAINING: return "training";
    case NF_ERR_VIOLATION: return "violation";
    case NF_ERR_IO: return "io";
    case NF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* nf_version(void) { return "0.1.0"; }

nf_status nf_network_load(const char* path, nf_network** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new nf_network{nf::load_file(path)}; });
}

nf_status nf_network_parse(const char* json, nf_network** out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new nf_network{nf::load(json)}; });
}

nf_status nf_network_save(const nf_network* net, const char* path) {
  if (!net) return null_arg("net");
  if (!path) return null_arg("path");
  return guarded([&] { nf::save_file(net->net, path); });
}

nf_status nf_network_to_json(const nf_network* net, char** out) {
  if (!net) return null_arg("net");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    *out = dup_string(nf::save(net->net));
    if (!*out) throw std::bad_alloc();
  });
}

void nf_network_free(nf_network* net) { delete net; }

nf_status nf_network_shape(const nf_network* net, size_t* input_dim, size_t* layers) {
  if (!net) return null_arg("net");
  if (input_dim) *input_dim = net->net.input_dim();
  if (layers) *layers = net->net.num_layers();
  g_last_error.clear();
  return NF_OK;
}

nf_status nf_network_layer_size(const nf_network* net, size_t layer, size_t* size) {
  if (!net) return null_arg("net");
  if (!size) return null_arg("size");
  return guarded([&] {
    if (layer < 1 || layer > net->net.num_layers()) {
      nf::fail(nf::ErrorKind::argument, "layer must lie in 1..L");
    }
    *size = net->net.layer(layer - 1).size();
  });
}

nf_status nf_network_forward(const nf_network* net, const double* x, size_t n, double* out) {
  if (!net) return null_arg("net");
  if (!x && n > 0) return null_arg("x");
  if (!out) return null_arg("out");
  return guarded([&] { *out = nf::forward(net->net, std::span<const double>(x, n)); });
}

nf_status nf_fep(const nf_network* net, nf_fault_kind kind, const size_t* counts,
                 size_t n_counts, double capacity, double* fep) {
  if (!net) return null_arg("net");
  if (!fep) return null_arg("fep");
  return guarded(
      [&] { *fep = fep_of(net->net, make_dist(kind, counts, n_counts), capacity).fep; });
}

nf_status nf_certify(const nf_network* net, nf_fault_kind kind, const size_t* counts,
                     size_t n_counts, double eps, double eps_prime, double capacity,
                     int* certified, double* fep) {
  if (!net) return null_arg("net");
  if (!certified) return null_arg("certified");
  return guarded([&] {
    const auto r =
        certify_of(net->net, make_dist(kind, counts, n_counts), eps, eps_prime, capacity);
    *certified = r.certified ? 1 : 0;
    if (fep) *fep = r.fep;
  });
}

nf_status nf_quantization_bound(const nf_network* net, const double* lambdas, size_t n,
                                double* bound) {
  if (!net) return null_arg("net");
  if (!lambdas && n > 0) return null_arg("lambdas");
  if (!bound) return null_arg("bound");
  return guarded([&] {
    *bound = nf::quantization_bound(net->net, std::vector<double>(lambdas, lambdas + n));
  });
}

nf_status nf_call(const char* op, const char* request, char** response) {
  if (response) *response = nullptr;
  if (!op) return null_arg("op");
  if (!request) return null_arg("request");
  Json res = Json::object();
  Json err = Json::object();
  const std::string name(op);
  const nf_status st = guarded(
      [&] {
        const Json req = Json::parse(request);
        if (!req.is_object()) nf::fail(nf::ErrorKind::parse, "request must be a JSON object");
        if (name == "analyze") op_analyze(req, res, false);
        else if (name == "certify") op_analyze(req, res, true);
        else if (name == "train") op_train(req, res);
        else if (name == "inject") op_inject(req, res);
        else if (name == "soundness") op_soundness(req, res);
        else if (name == "sweep_k") op_sweep_k(req, res);
        else if (name == "quantize") op_quantize(req, res);
        else if (name == "boost") op_boost(req, res);
        else if (name == "brute_check") op_brute_check(req, res);
        else if (name == "lemma1_demo") op_lemma1(req, res);
        else if (name == "tightness") op_tightness(req, res);
        else nf::fail(nf::ErrorKind::argument, "unknown operation '" + name + "'");
      },
      &err);
  if (response) {
    const Json& doc = st == NF_OK ? res : err;
    *response = dup_string(doc.dump(2));
  }
  return st;
}

void nf_string_free(char* s) { std::free(s); }

}  // extern "C"
