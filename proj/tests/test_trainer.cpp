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

#include <doctest.h>

#include <cmath>
#include <optional>
#include <random>

#include "neurofail/empirical.hpp"
#include "neurofail/error.hpp"
#include "neurofail/trainer.hpp"
#include "oracles.hpp"

using namespace neurofail;

namespace {

TrainConfig quick(std::vector<std::size_t> sizes, std::size_t epochs, std::uint64_t seed = 1) {
  TrainConfig cfg;
  cfg.layer_sizes = std::move(sizes);
  cfg.epochs = epochs;
  cfg.seed = seed;
  cfg.log_every = epochs;
  return cfg;
}

// Central differences of the objective with respect to one parameter.
double numeric_partial(const Network& net, const Dataset& data, double decay, std::size_t layer,
                       std::size_t r, std::size_t c, double h) {
  auto shifted = [&](double delta) {
    NetworkParts p = net.parts();
    if (layer < p.layers.size()) {
      p.layers[layer].weights(r, c) += delta;
    } else {
      p.output_weights[c] += delta;
    }
    return objective(Network(p), data, decay);
  };
  return (shifted(h) - shifted(-h)) / (2.0 * h);
}

}  // namespace

TEST_SUITE("trainer") {

TEST_CASE("config validation") {
  TrainConfig cfg;
  CHECK_NOTHROW(validate(cfg, 1));
  CHECK_THROWS_AS(validate(cfg, 0), Error);
  cfg.layer_sizes = {};
  CHECK_THROWS_AS(validate(cfg, 1), Error);
  cfg = TrainConfig{};
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(validate(cfg, 1), Error);
  cfg = TrainConfig{};
  cfg.log_every = 0;
  CHECK_THROWS_AS(validate(cfg, 1), Error);
  cfg = TrainConfig{};
  cfg.constant_neurons = true;
  cfg.layer_sizes = {1};
  CHECK_THROWS_AS(validate(cfg, 1), Error);
  CHECK(default_grid(1) == 512);
  CHECK(default_grid(2) == 64);
  CHECK(default_grid(3) == 16);
}

TEST_CASE("a constant target is learned") {
  const auto r = train(TargetFunction::constant(0.5), quick({4}, 300));
  CHECK(r.eps_prime <= 0.02);
  CHECK(r.net.metadata().at("target") == "constant:0.5");
}

TEST_CASE("analytic gradient matches finite differences") {
  std::mt19937_64 gen(5);
  for (bool bias : {false, true}) {
    for (bool constants : {false, true}) {
      for (double decay : {0.0, 1e-3}) {
        TrainConfig cfg = quick({4, 3}, 1);
        cfg.input_bias = bias;
        cfg.constant_neurons = constants;
        cfg.activation = ActivationSpec(constants ? ActivationKind::tanh : ActivationKind::sigmoid, 1.3);
        const Network net = initial_network(2, cfg);
        const Dataset data = sample_dataset(TargetFunction::smooth_xor(), 32, 9);
        const Gradient g = objective_gradient(net, data, decay);
        std::size_t checked = 0;
        while (checked < 20) {
          const std::size_t layer = std::uniform_int_distribution<std::size_t>(0, net.num_layers())(gen);
          std::size_t r = 0, c;
          double analytic;
          if (layer < net.num_layers()) {
            const Matrix& w = net.layer(layer).weights;
            r = std::uniform_int_distribution<std::size_t>(0, w.rows() - 1)(gen);
            c = std::uniform_int_distribution<std::size_t>(0, w.cols() - 1)(gen);
            if (net.layer(layer).is_constant(r)) {
              CHECK(g.layers[layer](r, c) == 0.0);
              continue;
            }
            analytic = g.layers[layer](r, c);
          } else {
            c = std::uniform_int_distribution<std::size_t>(0, net.output_weights().size() - 1)(gen);
            analytic = g.output[c];
          }
          const double numeric = numeric_partial(net, data, decay, layer, r, c, 1e-5);
          const double scale = std::max(std::abs(numeric), 1e-6);
          CHECK(std::abs(analytic - numeric) / scale <= 1e-4);
          ++checked;
        }
      }
    }
  }
}

TEST_CASE("training is reproducible") {
  TrainConfig cfg = quick({5}, 200, 42);
  cfg.log_every = 50;
  const auto a = train(TargetFunction::ridge_sine(), cfg);
  const auto b = train(TargetFunction::ridge_sine(), cfg);
  CHECK(save(a.net) == save(b.net));
  CHECK(training_log_csv(a.log) == training_log_csv(b.log));
  CHECK(training_log_csv(a.log).rfind("epoch,loss,grid_eps_prime\n", 0) == 0);
  CHECK(a.log.size() == 4);
  cfg.seed = 43;
  CHECK(save(train(TargetFunction::ridge_sine(), cfg).net) != save(a.net));
}

TEST_CASE("minibatch training is reproducible too") {
  TrainConfig cfg = quick({5}, 50, 3);
  cfg.batch_size = 16;
  CHECK(save(train(TargetFunction::ridge_sine(), cfg).net) ==
        save(train(TargetFunction::ridge_sine(), cfg).net));
}

TEST_CASE("gradient descent lowers the loss for output-only training") {
  TrainConfig cfg = quick({6}, 1);
  cfg.optimizer = Optimizer::gradient_descent;
  cfg.output_only = true;
  cfg.learning_rate = 0.05;
  const auto target = TargetFunction::ridge_sine();
  const Dataset data = sample_dataset(target, cfg.samples, cfg.seed);
  Network net = initial_network(1, cfg);
  double prev = objective(net, data, 0.0);
  for (int step = 0; step < 30; ++step) {
    const Network next = train_from(net, target, cfg).net;
    const double loss = objective(next, data, 0.0);
    CHECK(loss <= prev + 1e-15);
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      CHECK(next.layer(l).weights == net.layer(l).weights);
    }
    prev = loss;
    net = next;
  }
}

TEST_CASE("divergence is reported") {
  TrainConfig cfg = quick({4}, 200);
  cfg.optimizer = Optimizer::gradient_descent;
  cfg.learning_rate = 1e6;
  bool raised = false;
  try {
    train(TargetFunction::ridge_sine(), cfg);
  } catch (const Error& e) {
    raised = e.kind() == ErrorKind::training;
  }
  CHECK(raised);
}

TEST_CASE("quantization") {
  const Network net = train(TargetFunction::ridge_sine(), quick({6}, 400)).net;
  const Quantized q = quantize(net, 8);
  REQUIRE(q.lambdas.size() == 1);
  CHECK(q.lambdas[0] == std::ldexp(1.0, -9));
  CHECK(q.net.quantization_bits() == 8);
  CHECK_THROWS_AS(quantize(net, 0), Error);

  const auto rows = quantization_experiment(net, {2, 4, 6, 8, 10}, 1000);
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].violations == 0);
    CHECK(rows[i].max_error <= rows[i].bound);
    if (i > 0) CHECK(rows[i].bound < rows[i - 1].bound);
  }
  CHECK(quantization_csv(rows).rfind("bits,lambda,bound,max_error,violations\n", 0) == 0);

  const Network fine = quantize(net, 52).net;
  for (double x : {0.0, 0.13, 0.5, 0.77, 1.0}) {
    const double in[] = {x};
    CHECK(std::abs(forward(fine, in) - forward(net, in)) <= 1e-12);
  }
}

TEST_CASE("quantization bound holds on random deep nets") {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 40; ++t) {
    const Network net = oracle::random_network(gen);
    for (int bits : {3, 7}) {
      const auto q = quantize(net, bits);
      const double bound = quantization_bound(net, q.lambdas);
      for (int s = 0; s < 20; ++s) {
        const auto x = oracle::random_input(gen, net.input_dim());
        CHECK(std::abs(forward(net, x) - forward(q.net, x)) <= bound + 1e-12);
      }
    }
  }
}

TEST_CASE("splitting keeps the function and halves weights") {
  std::mt19937_64 gen(21);
  for (int t = 0; t < 50; ++t) {
    // Constant neurons are not duplicated, so their weights stay; leave them
    // out of every other net to test the halving exactly.
    oracle::RandomNetSpec spec;
    spec.constant_neurons = t % 2 == 0;
    const Network net = oracle::random_network(gen, spec);
    const Network wide = widen_by_splitting(net);
    const auto wm = max_weights(net);
    const auto wm2 = max_weights(wide);
    CHECK(wm2[0] == wm[0]);
    for (std::size_t l = 1; l < wm.size(); ++l) {
      CHECK(wm2[l] <= wm[l]);
      if (!spec.constant_neurons) CHECK(wm2[l] == doctest::Approx(wm[l] / 2));
    }
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
      const std::size_t regular = net.layer(l).size() - (net.layer(l).constant_neuron ? 1 : 0);
      CHECK(wide.layer(l).size() == net.layer(l).size() + regular);
    }
    for (int s = 0; s < 10; ++s) {
      const auto x = oracle::random_input(gen, net.input_dim());
      CHECK(forward(wide, x) == doctest::Approx(forward(net, x)).epsilon(1e-12));
    }
  }
}

TEST_CASE("overprovisioning") {
  OverprovisionConfig cfg;
  cfg.base = quick({4}, 400);
  cfg.base.log_every = 100;
  SUBCASE("zero distribution only needs accuracy") {
    const auto r = overprovision_pair(TargetFunction::constant(0.5), 0.2, 0.05,
                                      FaultDistribution::neurons({0}), 1.0, cfg);
    CHECK(r.certified);
    CHECK(r.report.fep == 0.0);
  }
  SUBCASE("the cap is reported, not thrown") {
    cfg.max_neurons = 8;
    std::optional<OverprovisionResult> r;
    CHECK_NOTHROW(r.emplace(overprovision_pair(TargetFunction::ridge_sine(), 0.15, 0.1,
                                               FaultDistribution::neurons({3}), 1.0, cfg)));
    REQUIRE(r);
    CHECK_FALSE(r->certified);
    CHECK(r->net.total_neurons() <= 8);
  }
  SUBCASE("arguments") {
    CHECK_THROWS_AS(overprovision_pair(TargetFunction::ridge_sine(), 0.1, 0.2,
                                       FaultDistribution::neurons({1}), 1.0, cfg),
                    Error);
    CHECK_THROWS_AS(overprovision_pair(TargetFunction::ridge_sine(), 0.2, 0.1,
                                       FaultDistribution::synapses({1, 1}), 1.0, cfg),
                    Error);
  }
}

}  // TEST_SUITE
