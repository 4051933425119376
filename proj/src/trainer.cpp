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

#include "neurofail/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "neurofail/empirical.hpp"
#include "neurofail/error.hpp"
#include "neurofail/rng.hpp"

namespace neurofail {

std::size_t default_grid(std::size_t dim) {
  if (dim == 1) return 512;
  if (dim == 2) return 64;
  return 16;
}

void validate(const TrainConfig& cfg, std::size_t input_dim) {
  if (input_dim == 0) fail(ErrorKind::argument, "input dimension must be positive");
  if (cfg.layer_sizes.empty()) fail(ErrorKind::argument, "layer_sizes must not be empty");
  for (std::size_t n : cfg.layer_sizes) {
    if (n == 0) fail(ErrorKind::argument, "layer sizes must be positive");
    if (cfg.constant_neurons && n < 2) {
      fail(ErrorKind::argument, "layers with a constant neuron need at least 2 neurons");
    }
  }
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    fail(ErrorKind::argument, "learning_rate must be positive");
  }
  if (cfg.samples == 0) fail(ErrorKind::argument, "samples must be positive");
  if (cfg.weight_decay < 0.0) fail(ErrorKind::argument, "weight_decay must be >= 0");
  if (cfg.log_every == 0) fail(ErrorKind::argument, "log_every must be positive");
  if (!(cfg.init_scale > 0.0)) fail(ErrorKind::argument, "init_scale must be positive");
}

Network initial_network(std::size_t input_dim, const TrainConfig& cfg) {
  validate(cfg, input_dim);
  Rng rng(derive_seed(cfg.seed, 0x1417));
  NetworkParts p;
  p.input_dim = input_dim;
  p.input_bias = cfg.input_bias;
  p.activation = cfg.activation;
  // Sigmoid(4Kx) and tanh(Kx) both have unit-free slope K at 0; scale the
  // range so pre-activations start in the responsive region.
  const double k = cfg.activation.k();
  std::size_t fan_in = input_dim + (cfg.input_bias ? 1 : 0);
  for (std::size_t li = 0; li < cfg.layer_sizes.size(); ++li) {
    const std::size_t n = cfg.layer_sizes[li];
    Layer layer;
    layer.weights = Matrix(n, fan_in);
    if (cfg.constant_neurons) layer.constant_neuron = n - 1;
    double a = cfg.init_scale * std::sqrt(6.0 / static_cast<double>(fan_in + n)) / k;
    if (li == 0) a = cfg.init_scale * 4.0 / k;  // spread first-layer centres over [0,1]
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = 0; i < fan_in; ++i) {
        layer.weights(j, i) = layer.is_constant(j) ? 0.0 : rng.uniform(-a, a);
      }
    }
    p.layers.push_back(std::move(layer));
    fan_in = n;
  }
  const double a = cfg.init_scale * std::sqrt(6.0 / static_cast<double>(fan_in + 1));
  for (std::size_t i = 0; i < fan_in; ++i) p.output_weights.push_back(rng.uniform(-a, a));
  p.metadata = {{"seed", cfg.seed}};
  return Network(std::move(p));
}

Dataset sample_dataset(const TargetFunction& target, std::size_t count, std::uint64_t seed) {
  Dataset d;
  Rng rng(derive_seed(seed, 0xda7a));
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<double> x(target.dim());
    for (double& v : x) v = rng.uniform();
    d.targets.push_back(target(x));
    d.inputs.push_back(std::move(x));
  }
  return d;
}

namespace {

struct Pass {
  std::vector<std::vector<double>> y;  // y[0] = input (+bias), y[l] = layer l outputs
  double out = 0.0;
};

Pass run(const Network& net, std::span<const double> x) {
  Pass p;
  std::vector<double> in(x.begin(), x.end());
  if (net.input_bias()) in.push_back(1.0);
  p.y.push_back(std::move(in));
  const ActivationSpec& act = net.activation();
  for (const Layer& layer : net.layers()) {
    const auto& prev = p.y.back();
    std::vector<double> y(layer.size());
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (layer.is_constant(j)) {
        y[j] = 1.0;
        continue;
      }
      double s = 0.0;
      const auto row = layer.weights.row(j);
      for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * prev[i];
      y[j] = act.eval(s);
    }
    p.y.push_back(std::move(y));
  }
  const auto& last = p.y.back();
  for (std::size_t i = 0; i < last.size(); ++i) p.out += net.output_weights()[i] * last[i];
  return p;
}

// dy/ds written in terms of y.
double slope_from_output(const ActivationSpec& act, double y) {
  if (act.kind() == ActivationKind::tanh) return act.k() * (1.0 - y * y);
  return 4.0 * act.k() * y * (1.0 - y);
}

double sum_squares(const Network& net) {
  double s = 0.0;
  for (const Layer& layer : net.layers()) {
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (layer.is_constant(j)) continue;
      for (double w : layer.weights.row(j)) s += w * w;
    }
  }
  for (double w : net.output_weights()) s += w * w;
  return s;
}

Gradient gradient_over(const Network& net, const Dataset& data,
                       std::span<const std::size_t> batch, double weight_decay,
                       double* loss_out) {
  const std::size_t L = net.num_layers();
  Gradient g;
  for (const Layer& layer : net.layers()) {
    g.layers.emplace_back(layer.weights.rows(), layer.weights.cols());
  }
  g.output.assign(net.output_weights().size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;

  for (std::size_t idx : batch) {
    const Pass p = run(net, data.inputs[idx]);
    const double err = p.out - data.targets[idx];
    loss += 0.5 * err * err * inv_n;
    const double d_out = err * inv_n;

    const auto& yl = p.y[L];
    std::vector<double> d_y(yl.size());
    for (std::size_t i = 0; i < yl.size(); ++i) {
      g.output[i] += d_out * yl[i];
      d_y[i] = d_out * net.output_weights()[i];
    }
    for (std::size_t l = L; l >= 1; --l) {
      const Layer& layer = net.layer(l - 1);
      const auto& y = p.y[l];
      const auto& prev = p.y[l - 1];
      std::vector<double> d_prev(prev.size(), 0.0);
      for (std::size_t j = 0; j < layer.size(); ++j) {
        if (layer.is_constant(j)) continue;
        const double d_s = d_y[j] * slope_from_output(net.activation(), y[j]);
        auto grow = g.layers[l - 1].row(j);
        const auto wrow = layer.weights.row(j);
        for (std::size_t i = 0; i < prev.size(); ++i) {
          grow[i] += d_s * prev[i];
          d_prev[i] += d_s * wrow[i];
        }
      }
      d_y = std::move(d_prev);
    }
  }

  if (weight_decay > 0.0) {
    loss += 0.5 * weight_decay * sum_squares(net);
    for (std::size_t l = 0; l < L; ++l) {
      const Layer& layer = net.layer(l);
      for (std::size_t j = 0; j < layer.size(); ++j) {
        if (layer.is_constant(j)) continue;
        for (std::size_t i = 0; i < layer.weights.cols(); ++i) {
          g.layers[l](j, i) += weight_decay * layer.weights(j, i);
        }
      }
    }
    for (std::size_t i = 0; i < g.output.size(); ++i) {
      g.output[i] += weight_decay * net.output_weights()[i];
    }
  }
  if (loss_out) *loss_out = loss;
  return g;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

// Flat views over parameters and gradients, in a fixed order.
std::vector<double*> parameter_slots(NetworkParts& p, bool output_only) {
  std::vector<double*> slots;
  if (!output_only) {
    for (Layer& layer : p.layers) {
      for (double& w : layer.weights.values()) slots.push_back(&w);
    }
  }
  for (double& w : p.output_weights) slots.push_back(&w);
  return slots;
}

std::vector<double> flatten(Gradient& g, bool output_only) {
  std::vector<double> flat;
  if (!output_only) {
    for (Matrix& m : g.layers) {
      for (double v : m.values()) flat.push_back(v);
    }
  }
  flat.insert(flat.end(), g.output.begin(), g.output.end());
  return flat;
}

}  // namespace

double objective(const Network& net, const Dataset& data, double weight_decay) {
  double loss = 0.0;
  for (std::size_t n = 0; n < data.inputs.size(); ++n) {
    const double e = forward(net, data.inputs[n]) - data.targets[n];
    loss += 0.5 * e * e;
  }
  loss /= static_cast<double>(data.inputs.size());
  if (weight_decay > 0.0) loss += 0.5 * weight_decay * sum_squares(net);
  return loss;
}

Gradient objective_gradient(const Network& net, const Dataset& data, double weight_decay) {
  const auto idx = all_indices(data.inputs.size());
  return gradient_over(net, data, idx, weight_decay, nullptr);
}

TrainResult train_from(Network start, const TargetFunction& target, const TrainConfig& cfg) {
  validate(cfg, target.dim());
  if (start.input_dim() != target.dim()) {
    fail(ErrorKind::shape, "network and target dimensions differ");
  }
  const Dataset data = sample_dataset(target, cfg.samples, cfg.seed);
  const std::size_t grid = cfg.grid_per_dim ? cfg.grid_per_dim : default_grid(target.dim());

  NetworkParts parts = start.parts();
  parts.quantization_bits.reset();
  auto slots = parameter_slots(parts, cfg.output_only);
  std::vector<double> m(slots.size(), 0.0), v(slots.size(), 0.0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  double b1t = 1.0, b2t = 1.0;

  std::vector<std::size_t> order = all_indices(data.inputs.size());
  const std::size_t batch = cfg.batch_size == 0 ? order.size()
                                                : std::min(cfg.batch_size, order.size());
  TrainResult res{Network(parts), {}, 0.0};

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.batch_size != 0) {
      Rng rng(derive_seed(cfg.seed, 0x5eed, epoch));
      for (std::size_t k = order.size(); k > 1; --k) {
        std::swap(order[k - 1], order[static_cast<std::size_t>(rng.below(k))]);
      }
    }
    double epoch_loss = 0.0;
    for (std::size_t startb = 0; startb < order.size(); startb += batch) {
      const std::size_t len = std::min(batch, order.size() - startb);
      const Network current(parts);
      double loss = 0.0;
      Gradient g = gradient_over(current, data, std::span(order).subspan(startb, len),
                                 cfg.weight_decay, &loss);
      epoch_loss += loss * static_cast<double>(len) / static_cast<double>(order.size());
      const auto flat = flatten(g, cfg.output_only);
      if (cfg.optimizer == Optimizer::gradient_descent) {
        for (std::size_t k = 0; k < slots.size(); ++k) *slots[k] -= cfg.learning_rate * flat[k];
      } else {
        b1t *= beta1;
        b2t *= beta2;
        for (std::size_t k = 0; k < slots.size(); ++k) {
          m[k] = beta1 * m[k] + (1.0 - beta1) * flat[k];
          v[k] = beta2 * v[k] + (1.0 - beta2) * flat[k] * flat[k];
          const double mh = m[k] / (1.0 - b1t);
          const double vh = v[k] / (1.0 - b2t);
          *slots[k] -= cfg.learning_rate * mh / (std::sqrt(vh) + adam_eps);
        }
      }
      // Constant-neuron rows are never read; keep them at zero.
      for (Layer& layer : parts.layers) {
        if (layer.constant_neuron) {
          for (double& w : layer.weights.row(*layer.constant_neuron)) w = 0.0;
        }
      }
    }
    if (!std::isfinite(epoch_loss)) {
      fail(ErrorKind::training, "loss diverged at epoch " + std::to_string(epoch));
    }
    for (double* s : slots) {
      if (!std::isfinite(*s)) {
        fail(ErrorKind::training, "non-finite weight at epoch " + std::to_string(epoch));
      }
    }
    const bool log_now = epoch % cfg.log_every == 0 || epoch == cfg.epochs;
    if (log_now) {
      const Network current(parts);
      const double ep = measure_eps_prime(current, target, grid).value;
      res.log.push_back({epoch, epoch_loss, ep});
      if (cfg.target_eps_prime && ep <= *cfg.target_eps_prime) break;
    }
  }

  parts.metadata["seed"] = cfg.seed;
  parts.metadata["target"] = target.name();
  Network trained(parts);
  const auto est = measure_eps_prime(trained, target, grid);
  parts.metadata["eps_prime"] = est.value;
  parts.metadata["eps_prime_grid"] = grid;
  res.net = Network(std::move(parts));
  res.eps_prime = est.value;
  return res;
}

TrainResult train(const TargetFunction& target, const TrainConfig& cfg) {
  return train_from(initial_network(target.dim(), cfg), target, cfg);
}

std::string training_log_csv(const std::vector<TrainLogRow>& log) {
  std::ostringstream os;
  os.precision(17);
  os << "epoch,loss,grid_eps_prime\n";
  for (const auto& r : log) os << r.epoch << ',' << r.loss << ',' << r.grid_eps_prime << '\n';
  return os.str();
}

Quantized quantize(const Network& net, int fractional_bits) {
  if (fractional_bits < 1) fail(ErrorKind::argument, "fractional_bits must be >= 1");
  NetworkParts p = net.parts();
  p.quantization_bits = fractional_bits;
  const double lambda = std::ldexp(1.0, -(fractional_bits + 1));
  return {Network(std::move(p)), std::vector<double>(net.num_layers(), lambda)};
}

std::vector<QuantizationRow> quantization_experiment(const Network& net,
                                                     const std::vector<int>& bits,
                                                     std::size_t min_inputs) {
  if (bits.empty()) fail(ErrorKind::argument, "need at least one bit width");
  if (min_inputs < 2) fail(ErrorKind::argument, "need at least 2 inputs");
  const std::size_t d = net.input_dim();
  std::size_t g = 2;
  auto points = [&](std::size_t per) {
    double n = 1.0;
    for (std::size_t i = 0; i < d; ++i) n *= static_cast<double>(per);
    return n;
  };
  while (points(g) < static_cast<double>(min_inputs)) ++g;

  std::vector<std::vector<double>> xs;
  std::vector<double> exact;
  for_each_grid_point(d, g, [&](std::span<const double> x) {
    xs.emplace_back(x.begin(), x.end());
    exact.push_back(forward(net, x));
  });
  std::vector<QuantizationRow> rows;
  for (int b : bits) {
    const Quantized q = quantize(net, b);
    QuantizationRow row;
    row.bits = b;
    row.lambda = q.lambdas.front();
    row.bound = quantization_bound(net, q.lambdas);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = std::abs(exact[i] - forward(q.net, xs[i]));
      row.max_error = std::max(row.max_error, e);
      if (e > row.bound + kSoundnessTolerance) ++row.violations;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string quantization_csv(const std::vector<QuantizationRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "bits,lambda,bound,max_error,violations\n";
  for (const auto& r : rows) {
    os << r.bits << ',' << r.lambda << ',' << r.bound << ',' << r.max_error << ','
       << r.violations << '\n';
  }
  return os.str();
}

Network widen_by_splitting(const Network& net) {
  NetworkParts p = net.parts();
  const std::size_t L = p.layers.size();
  for (std::size_t l = 0; l < L; ++l) {
    Layer& layer = p.layers[l];
    const std::size_t n = layer.size();
    std::vector<std::size_t> dup;  // source index of each appended copy
    for (std::size_t j = 0; j < n; ++j) {
      if (!layer.is_constant(j)) dup.push_back(j);
    }
    Matrix grown(n + dup.size(), layer.weights.cols());
    for (std::size_t j = 0; j < n; ++j) {
      std::copy_n(layer.weights.row(j).begin(), grown.cols(), grown.row(j).begin());
    }
    for (std::size_t c = 0; c < dup.size(); ++c) {
      std::copy_n(layer.weights.row(dup[c]).begin(), grown.cols(), grown.row(n + c).begin());
    }
    layer.weights = std::move(grown);

    // Split outgoing weights of each duplicated neuron between the copies.
    auto split_columns = [&](Matrix& next) {
      Matrix wider(next.rows(), n + dup.size());
      for (std::size_t r = 0; r < next.rows(); ++r) {
        for (std::size_t i = 0; i < n; ++i) wider(r, i) = next(r, i);
        for (std::size_t c = 0; c < dup.size(); ++c) {
          const double half = next(r, dup[c]) * 0.5;
          wider(r, dup[c]) = half;
          wider(r, n + c) = half;
        }
      }
      next = std::move(wider);
    };
    if (l + 1 < L) {
      split_columns(p.layers[l + 1].weights);
    } else {
      std::vector<double>& out = p.output_weights;
      out.resize(n + dup.size());
      for (std::size_t c = 0; c < dup.size(); ++c) {
        const double half = out[dup[c]] * 0.5;
        out[dup[c]] = half;
        out[n + c] = half;
      }
    }
  }
  return Network(std::move(p));
}

OverprovisionResult overprovision_pair(const TargetFunction& target, double eps,
                                       double eps_prime, const FaultDistribution& dist,
                                       double capacity, const OverprovisionConfig& cfg) {
  if (!(eps_prime > 0.0) || !(eps_prime < eps)) {
    fail(ErrorKind::argument, "overprovision_pair needs 0 < eps' < eps");
  }
  if (dist.kind != DistributionKind::neuron) {
    fail(ErrorKind::argument, "overprovision_pair needs a neuron distribution");
  }
  const std::size_t grid =
      cfg.base.grid_per_dim ? cfg.base.grid_per_dim : default_grid(target.dim());
  auto total = [](const std::vector<std::size_t>& sizes) {
    return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  };
  auto fits = [&](const Network& net) {
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      if (dist.per_layer.size() != net.num_layers() || dist.per_layer[l] >= net.layer(l).size()) {
        return false;
      }
    }
    return true;
  };

  OverprovisionResult res{initial_network(target.dim(), cfg.base), {}, 0.0, false, false, {}};
  TrainConfig tc = cfg.base;
  if (!tc.target_eps_prime) tc.target_eps_prime = eps_prime;

  // Phase 1: reach eps' by fresh training at doubling widths.
  for (std::size_t round = 0;; ++round) {
    TrainResult tr = train(target, tc);
    res.net = tr.net;
    res.measured_eps_prime = tr.eps_prime;
    std::ostringstream os;
    os << "train widths=" << total(tc.layer_sizes) << " eps'=" << tr.eps_prime;
    res.steps.push_back(os.str());
    if (tr.eps_prime <= eps_prime) break;
    std::vector<std::size_t> doubled = tc.layer_sizes;
    for (auto& n : doubled) n *= 2;
    if (round + 1 >= cfg.max_retrain_rounds || total(doubled) > cfg.max_neurons) break;
    tc.layer_sizes = doubled;
  }
  res.accurate = res.measured_eps_prime <= eps_prime;

  auto certify = [&](const Network& net) {
    return fits(net) ? certify_neurons(net, dist, eps, eps_prime, capacity) : FepReport{};
  };
  if (!res.accurate) {
    if (fits(res.net)) res.report = certify(res.net);
    return res;
  }

  // Phase 2: widen by splitting (function preserving, halves w_m) and let a
  // short weight-decay fine-tune shrink weights further when it keeps eps'.
  res.report = certify(res.net);
  while (!(fits(res.net) && res.report.certified)) {
    if (2 * res.net.total_neurons() > cfg.max_neurons) {
      res.steps.push_back("neuron cap reached");
      break;
    }
    Network wide = widen_by_splitting(res.net);
    double wide_eps = measure_eps_prime(wide, target, grid).value;
    FepReport wide_report = certify(wide);
    if (cfg.finetune_epochs > 0) {
      TrainConfig ft = cfg.base;
      ft.epochs = cfg.finetune_epochs;
      ft.weight_decay = cfg.finetune_decay;
      ft.target_eps_prime.reset();
      ft.log_every = cfg.finetune_epochs;
      TrainResult tuned = train_from(wide, target, ft);
      if (tuned.eps_prime <= eps_prime && fits(tuned.net)) {
        FepReport tuned_report = certify(tuned.net);
        if (tuned_report.fep <= wide_report.fep) {
          wide = tuned.net;
          wide_eps = tuned.eps_prime;
          wide_report = tuned_report;
        }
      }
    }
    res.net = std::move(wide);
    res.measured_eps_prime = wide_eps;
    res.report = wide_report;
    std::ostringstream os;
    os << "split neurons=" << res.net.total_neurons() << " eps'=" << wide_eps
       << " fep=" << res.report.fep;
    res.steps.push_back(os.str());
  }
  res.accurate = res.measured_eps_prime <= eps_prime;
  res.certified = res.accurate && fits(res.net) && res.report.certified;
  NetworkParts p = res.net.parts();
  p.metadata["eps_prime"] = res.measured_eps_prime;
  p.metadata["overprovision"] = {{"eps", eps}, {"eps_prime_target", eps_prime},
                                 {"certified", res.certified}};
  res.net = Network(std::move(p));
  return res;
}

}  // namespace neurofail
