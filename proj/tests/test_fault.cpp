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
#include <random>
#include <set>

#include "neurofail/error.hpp"
#include "neurofail/fault.hpp"
#include "oracles.hpp"

using namespace neurofail;

namespace {

Network single_layer(std::vector<double> out, double w_in = 0.5, std::size_t d = 1) {
  NetworkParts p;
  p.input_dim = d;
  p.activation = {ActivationKind::sigmoid, 1.0};
  Layer l;
  l.weights = Matrix(out.size(), d, w_in);
  p.layers = {l};
  p.output_weights = std::move(out);
  return Network(std::move(p));
}

Network layered(std::vector<std::size_t> widths, std::size_t d = 2, double w = 0.3) {
  NetworkParts p;
  p.input_dim = d;
  p.activation = {ActivationKind::sigmoid, 1.0};
  std::size_t fan_in = d;
  for (std::size_t n : widths) {
    Layer l;
    l.weights = Matrix(n, fan_in, w);
    p.layers.push_back(l);
    fan_in = n;
  }
  p.output_weights.assign(fan_in, w);
  return Network(std::move(p));
}

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

SelectionOptions crash_mode() {
  SelectionOptions o;
  o.mode = FaultMode::crashed();
  return o;
}

}  // namespace

TEST_SUITE("fault") {

TEST_CASE("empty scenario equals forward") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 50; ++t) {
    const Network net = oracle::random_network(gen);
    const auto x = oracle::random_input(gen, net.input_dim());
    CHECK(forward_faulty(net, x, FaultScenario{}) == forward(net, x));
  }
}

TEST_CASE("crashing the only neuron gives 0") {
  const Network net = single_layer({1.7});
  FaultScenario s;
  s.neurons.push_back({1, 0, FaultMode::crashed()});
  const double x[] = {0.4};
  CHECK(forward_faulty(net, x, s) == 0.0);
}

TEST_CASE("Byzantine constant neuron in a 2-2-1 net matches a hand evaluation") {
  NetworkParts p;
  p.input_dim = 2;
  p.activation = {ActivationKind::sigmoid, 1.0};
  Layer l1, l2;
  l1.weights = Matrix(2, 2);
  l1.weights(0, 0) = 0.5;
  l1.weights(0, 1) = -0.25;
  l1.weights(1, 0) = 1.0;
  l1.weights(1, 1) = 0.75;
  l2.weights = Matrix(2, 2);
  l2.weights(0, 0) = -1.0;
  l2.weights(0, 1) = 0.5;
  l2.weights(1, 0) = 0.25;
  l2.weights(1, 1) = 2.0;
  p.layers = {l1, l2};
  p.output_weights = {0.6, -0.3};
  const Network net(std::move(p));

  for (ClampMode clamp : {ClampMode::deviation, ClampMode::value}) {
    FaultScenario s;
    s.capacity = Capacity::bounded(1.0);
    s.clamp = clamp;
    s.neurons.push_back({1, 0, FaultMode::byzantine(ByzantinePolicy::constant(1.0))});
    const double x0 = 0.2, x1 = 0.8;
    const double a0 = 1.0;  // the Byzantine value
    const double a1 = sig(4.0 * (1.0 * x0 + 0.75 * x1));
    const double b0 = sig(4.0 * (-1.0 * a0 + 0.5 * a1));
    const double b1 = sig(4.0 * (0.25 * a0 + 2.0 * a1));
    const double x[] = {x0, x1};
    CHECK(forward_faulty(net, x, s) == doctest::Approx(0.6 * b0 - 0.3 * b1).epsilon(1e-14));
  }
}

TEST_CASE("faulty evaluation agrees with the override oracle") {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 200; ++t) {
    const Network net = oracle::random_network(gen);
    const auto x = oracle::random_input(gen, net.input_dim());
    const std::size_t L = net.num_layers();
    std::uniform_int_distribution<std::size_t> pick_layer(1, L);
    const std::size_t l = pick_layer(gen);
    const std::size_t n = net.layer(l - 1).size();
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, n - 1)(gen);
    const double v = std::uniform_real_distribution<double>(-3.0, 3.0)(gen);

    FaultScenario s;
    s.neurons.push_back({l, j, FaultMode::byzantine(ByzantinePolicy::constant(v))});
    oracle::Overrides over;
    const std::size_t receivers = l < L ? net.layer(l).size() : 1;
    for (std::size_t r = 0; r < receivers; ++r) over[{l + 1, r, j}] = v;
    CHECK(std::abs(forward_faulty(net, x, s) - oracle::evaluate(net, x, over)) <= 1e-12);
  }
}

TEST_CASE("crash equals zeroing the outgoing weights") {
  std::mt19937_64 gen(21);
  for (int t = 0; t < 200; ++t) {
    const Network net = oracle::random_network(gen);
    const auto x = oracle::random_input(gen, net.input_dim());
    const std::size_t L = net.num_layers();
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, L)(gen);
    const std::size_t j =
        std::uniform_int_distribution<std::size_t>(0, net.layer(l - 1).size() - 1)(gen);
    FaultScenario s;
    s.neurons.push_back({l, j, FaultMode::crashed()});

    NetworkParts p = net.parts();
    if (l < L) {
      for (std::size_t r = 0; r < p.layers[l].weights.rows(); ++r) p.layers[l].weights(r, j) = 0.0;
    } else {
      p.output_weights[j] = 0.0;
    }
    CHECK(std::abs(forward_faulty(net, x, s) - forward(Network(p), x)) <= 1e-12);
  }
}

TEST_CASE("crashed synapse equals a zero weight") {
  std::mt19937_64 gen(22);
  for (int t = 0; t < 200; ++t) {
    const Network net = oracle::random_network(gen);
    const auto x = oracle::random_input(gen, net.input_dim());
    const std::size_t L = net.num_layers();
    const std::size_t l = std::uniform_int_distribution<std::size_t>(1, L + 1)(gen);
    NetworkParts p = net.parts();
    FaultScenario s;
    if (l <= L) {
      Matrix& w = p.layers[l - 1].weights;
      const std::size_t r = std::uniform_int_distribution<std::size_t>(0, w.rows() - 1)(gen);
      const std::size_t c = std::uniform_int_distribution<std::size_t>(0, w.cols() - 1)(gen);
      w(r, c) = 0.0;
      s.synapses.push_back({l, r, c, FaultMode::crashed()});
    } else {
      const std::size_t c =
          std::uniform_int_distribution<std::size_t>(0, p.output_weights.size() - 1)(gen);
      p.output_weights[c] = 0.0;
      s.synapses.push_back({l, 0, c, FaultMode::crashed()});
    }
    CHECK(std::abs(forward_faulty(net, x, s) - forward(Network(p), x)) <= 1e-12);
  }
}

TEST_CASE("capacity clamp holds for every policy") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int t = 0; t < 400; ++t) {
    const Network net = oracle::random_network(gen);
    const auto x = oracle::random_input(gen, net.input_dim());
    const double c = std::uniform_real_distribution<double>(0.1, 2.0)(gen);
    const ByzantinePolicy policies[] = {ByzantinePolicy::worst_case_sign(),
                                        ByzantinePolicy::constant(u(gen)),
                                        ByzantinePolicy::random_in_capacity(gen()),
                                        ByzantinePolicy::offset(u(gen))};
    for (ClampMode clamp : {ClampMode::deviation, ClampMode::value}) {
      for (const auto& pol : policies) {
        FaultScenario s;
        s.capacity = Capacity::bounded(c);
        s.clamp = clamp;
        for (std::size_t l = 1; l <= net.num_layers(); ++l) {
          s.neurons.push_back({l, 0, FaultMode::byzantine(pol)});
        }
        s.synapses.push_back({1, 0, 0, FaultMode::byzantine(pol)});
        const FaultyEvaluation ev = evaluate_faulty(net, x, s);
        if (clamp == ClampMode::value) {
          CHECK(ev.max_byzantine_value <= c + 1e-12);
        } else {
          CHECK(ev.max_byzantine_deviation <= c + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("worst_case_sign follows the sign of each downstream weight") {
  const Network net = single_layer({0.4, -0.6});
  FaultScenario s;
  s.capacity = Capacity::bounded(0.25);
  s.neurons.push_back({1, 0, FaultMode::byzantine(ByzantinePolicy::worst_case_sign())});
  s.neurons.push_back({1, 1, FaultMode::byzantine(ByzantinePolicy::worst_case_sign())});
  const double x[] = {0.5};
  const double y = sig(4.0 * 0.25);
  const double expected = 0.4 * (y + 0.25) - 0.6 * (y - 0.25);
  CHECK(forward_faulty(net, x, s) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(std::abs(forward_faulty(net, x, s) - forward(net, x)) ==
        doctest::Approx(0.25 * (0.4 + 0.6)));
}

TEST_CASE("synapse fault overrides the sender's neuron fault on that link") {
  const Network net = single_layer({1.0, 1.0});
  FaultScenario s;
  s.capacity = Capacity::bounded(5.0);
  s.clamp = ClampMode::value;
  s.neurons.push_back({1, 0, FaultMode::crashed()});
  s.synapses.push_back({2, 0, 0, FaultMode::byzantine(ByzantinePolicy::constant(3.0))});
  const double x[] = {0.0};
  CHECK(forward_faulty(net, x, s) == doctest::Approx(3.0 + 0.5));
}

TEST_CASE("scenario errors") {
  const Network net = layered({3, 2});
  const double x[] = {0.1, 0.2};
  auto kind_of = [&](const FaultScenario& s) {
    try {
      forward_faulty(net, x, s);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::io;  // sentinel: no error
  };
  FaultScenario bad_layer;
  bad_layer.neurons.push_back({3, 0, FaultMode::crashed()});
  CHECK(kind_of(bad_layer) == ErrorKind::scenario);
  FaultScenario bad_index;
  bad_index.neurons.push_back({2, 2, FaultMode::crashed()});
  CHECK(kind_of(bad_index) == ErrorKind::scenario);
  FaultScenario dup;
  dup.neurons.push_back({1, 1, FaultMode::crashed()});
  dup.neurons.push_back({1, 1, FaultMode::crashed()});
  CHECK(kind_of(dup) == ErrorKind::scenario);
  FaultScenario bad_syn;
  bad_syn.synapses.push_back({3, 1, 0, FaultMode::crashed()});  // output has receiver 0 only
  CHECK(kind_of(bad_syn) == ErrorKind::scenario);

  FaultScenario unbounded;
  unbounded.neurons.push_back({1, 0, FaultMode::byzantine(ByzantinePolicy::worst_case_sign())});
  CHECK(kind_of(unbounded) == ErrorKind::policy);
  FaultScenario unbounded_random;
  unbounded_random.neurons.push_back(
      {1, 0, FaultMode::byzantine(ByzantinePolicy::random_in_capacity(1))});
  CHECK(kind_of(unbounded_random) == ErrorKind::policy);
  FaultScenario unbounded_constant;
  unbounded_constant.neurons.push_back(
      {1, 0, FaultMode::byzantine(ByzantinePolicy::constant(1e9))});
  CHECK(kind_of(unbounded_constant) == ErrorKind::io);
}

TEST_CASE("distribution validation") {
  const Network net = layered({3, 2});
  CHECK_NOTHROW(validate(net, FaultDistribution::neurons({3, 2})));
  CHECK_THROWS_AS(validate(net, FaultDistribution::neurons({4, 0})), Error);
  CHECK_THROWS_AS(validate(net, FaultDistribution::neurons({1})), Error);
  CHECK_NOTHROW(validate(net, FaultDistribution::synapses({6, 6, 2})));
  CHECK_THROWS_AS(validate(net, FaultDistribution::synapses({7, 0, 0})), Error);
  CHECK_THROWS_AS(validate(net, FaultDistribution::synapses({0, 0})), Error);
}

TEST_CASE("adversarial selection") {
  SUBCASE("zero distribution gives an empty scenario") {
    const Network net = layered({3, 2});
    CHECK(adversarial_scenario(net, FaultDistribution::neurons({0, 0}), Capacity::bounded(1))
              .empty());
  }
  SUBCASE("largest outgoing weight wins") {
    const Network net = single_layer({0.1, 0.9, 0.4});
    const auto s = adversarial_scenario(net, FaultDistribution::neurons({1}), Capacity::bounded(1));
    REQUIRE(s.neurons.size() == 1);
    CHECK(s.neurons[0].index == 1);
    CHECK(s.neurons[0].mode == FaultMode::byzantine(ByzantinePolicy::worst_case_sign()));
  }
  SUBCASE("negative weights count by magnitude") {
    const Network net = single_layer({0.1, -0.9, 0.4});
    const auto s = adversarial_scenario(net, FaultDistribution::neurons({2}), Capacity::bounded(1),
                                        crash_mode());
    REQUIRE(s.neurons.size() == 2);
    CHECK(s.neurons[0].index == 1);
    CHECK(s.neurons[1].index == 2);
    CHECK(s.neurons[0].mode.crash);
  }
  SUBCASE("ties go to the lowest index") {
    const Network net = single_layer({0.5, 0.5});
    const auto s = adversarial_scenario(net, FaultDistribution::neurons({1}), Capacity::bounded(1));
    REQUIRE(s.neurons.size() == 1);
    CHECK(s.neurons[0].index == 0);
  }
  SUBCASE("synapses by weight magnitude") {
    const Network net = single_layer({0.2, -0.7, 0.7});
    const auto s =
        adversarial_scenario(net, FaultDistribution::synapses({0, 1}), Capacity::bounded(1));
    REQUIRE(s.synapses.size() == 1);
    CHECK(s.synapses[0].layer == 2);
    CHECK(s.synapses[0].sender == 1);
  }
}

TEST_CASE("constant neurons are skipped unless requested") {
  NetworkParts p = single_layer({5.0, 0.1, 0.2}).parts();
  p.layers[0].constant_neuron = 0;
  const Network net(std::move(p));
  const auto s = adversarial_scenario(net, FaultDistribution::neurons({1}), Capacity::bounded(1));
  CHECK(s.neurons.at(0).index == 2);
  SelectionOptions o;
  o.include_constant = true;
  const auto t = adversarial_scenario(net, FaultDistribution::neurons({1}), Capacity::bounded(1), o);
  CHECK(t.neurons.at(0).index == 0);
  CHECK(eligible_counts(net, DistributionKind::neuron, false) == std::vector<std::size_t>{2});
  CHECK(eligible_counts(net, DistributionKind::neuron, true) == std::vector<std::size_t>{3});
}

TEST_CASE("random selection") {
  const Network net = layered({4, 3});
  const auto dist = FaultDistribution::neurons({2, 1});
  SUBCASE("same seed, same scenario") {
    CHECK(random_scenario(net, dist, Capacity::bounded(1), 42) ==
          random_scenario(net, dist, Capacity::bounded(1), 42));
  }
  SUBCASE("f = N selects every neuron") {
    const auto s = random_scenario(net, FaultDistribution::neurons({4, 3}), Capacity::bounded(1), 7);
    CHECK(s.neurons.size() == 7);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& f : s.neurons) seen.insert({f.layer, f.index});
    CHECK(seen.size() == 7);
  }
  SUBCASE("selections are distinct") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto s = random_scenario(net, dist, Capacity::bounded(1), seed);
      REQUIRE(s.neurons.size() == 3);
      CHECK(s.neurons[0].index != s.neurons[1].index);
    }
  }
  SUBCASE("uniform over a 4-neuron layer") {
    const Network one = layered({4});
    std::vector<int> hits(4, 0);
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      const auto s = random_scenario(one, FaultDistribution::neurons({1}), Capacity::bounded(1), seed);
      ++hits[s.neurons.at(0).index];
    }
    for (int h : hits) {
      CHECK(h >= 2350);
      CHECK(h <= 2650);
    }
  }
  SUBCASE("too many faults") {
    CHECK_THROWS_AS(random_scenario(net, FaultDistribution::neurons({5, 0}), Capacity::bounded(1), 1),
                    Error);
  }
}

TEST_CASE("enumeration counts") {
  CHECK(ScenarioEnumerator(layered({3}), FaultDistribution::neurons({2}), Capacity::bounded(1))
            .count() == 3);
  CHECK(ScenarioEnumerator(layered({2, 2}), FaultDistribution::neurons({1, 1}),
                           Capacity::bounded(1))
            .count() == 4);
  CHECK(ScenarioEnumerator(layered({4, 3}), FaultDistribution::neurons({2, 1}),
                           Capacity::bounded(1))
            .count() == 18);
  CHECK(scenario_count(layered({4, 3}), FaultDistribution::neurons({2, 1})) == 18);
}

TEST_CASE("enumeration yields every subset exactly once") {
  const Network net = layered({4, 3});
  ScenarioEnumerator it(net, FaultDistribution::neurons({2, 1}), Capacity::bounded(1),
                        crash_mode());
  std::set<std::vector<std::pair<std::size_t, std::size_t>>> seen;
  std::size_t n = 0;
  while (auto s = it.next()) {
    std::vector<std::pair<std::size_t, std::size_t>> key;
    for (const auto& f : s->neurons) {
      key.push_back({f.layer, f.index});
      CHECK(f.mode.crash);
    }
    std::sort(key.begin(), key.end());
    seen.insert(key);
    ++n;
  }
  CHECK(n == 18);
  CHECK(seen.size() == 18);
  it.reset();
  std::size_t again = 0;
  while (it.next()) ++again;
  CHECK(again == 18);
}

TEST_CASE("synapse enumeration") {
  const Network net = layered({2}, 2);
  ScenarioEnumerator it(net, FaultDistribution::synapses({1, 1}), Capacity::bounded(1));
  CHECK(it.count() == 8);
  std::size_t n = 0;
  while (it.next()) ++n;
  CHECK(n == 8);
}

TEST_CASE("enumeration cap") {
  const Network net = layered({20, 20});
  try {
    ScenarioEnumerator it(net, FaultDistribution::neurons({10, 10}), Capacity::bounded(1));
    FAIL("expected a cap error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::cap);
    CHECK(std::string(e.what()).find("34134779536") != std::string::npos);
  }
}

TEST_CASE("scenario documents round-trip") {
  FaultScenario s;
  s.capacity = Capacity::bounded(0.75);
  s.clamp = ClampMode::value;
  s.neurons.push_back({1, 2, FaultMode::crashed()});
  s.neurons.push_back({2, 0, FaultMode::byzantine(ByzantinePolicy::offset(-0.5))});
  s.synapses.push_back({3, 0, 1, FaultMode::byzantine(ByzantinePolicy::random_in_capacity(99))});
  CHECK(scenario_from_json(to_json(s)) == s);

  FaultScenario u;
  u.neurons.push_back({1, 0, FaultMode::byzantine(ByzantinePolicy::constant(3.5))});
  const Json doc = to_json(u);
  CHECK(doc["capacity"] == "unbounded");
  CHECK(scenario_from_json(doc) == u);

  const Json bare = Json::parse(R"({"capacity": 1, "neurons": [{"layer": 1, "index": 0, "mode": "crash"}]})");
  const FaultScenario b = scenario_from_json(bare);
  CHECK(b.neurons.size() == 1);
  CHECK(b.capacity.value() == 1.0);
  CHECK(b.clamp == ClampMode::deviation);

  CHECK_THROWS_AS(scenario_from_json(Json::parse(R"({"neurons": [{"layer": 1}]})")), Error);
}

TEST_CASE("count literals") {
  CHECK(parse_counts("1,0,2") == std::vector<std::size_t>{1, 0, 2});
  CHECK(parse_counts("3") == std::vector<std::size_t>{3});
  CHECK_THROWS_AS(parse_counts("1,,2"), Error);
  CHECK_THROWS_AS(parse_counts("1,-2"), Error);
  CHECK_THROWS_AS(parse_counts(""), Error);
}

}  // TEST_SUITE
