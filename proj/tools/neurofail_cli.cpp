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

// Command-line front end. Every subcommand builds a JSON request, hands it to
// nf_call and writes the response pieces to files.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "neurofail/neurofail.h"

using Json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct Outputs {
  std::string out;              // result JSON; stdout when empty
  std::string csv;              // CSV payload, if the op emits one
  std::string counterexample;  // written on failure; stderr when empty
};

struct Command {
  std::string op;
  Json request = Json::object();
  Outputs files;
  std::string net_out;  // train only
};

bool write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return true;
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  if (!f) {
    std::cerr << "error: cannot write " << path << "\n";
    return false;
  }
  return true;
}

void write_counterexample(const Outputs& o, const Json& doc) {
  if (o.counterexample.empty()) {
    std::cerr << "counterexample:\n" << doc.dump(2) << "\n";
  } else {
    write_text(o.counterexample, doc.dump(2));
    std::cerr << "counterexample written to " << o.counterexample << "\n";
  }
}

int run(const Command& cmd) {
  char* raw = nullptr;
  const nf_status st = nf_call(cmd.op.c_str(), cmd.request.dump().c_str(), &raw);
  Json res = raw ? Json::parse(raw) : Json::object();
  nf_string_free(raw);

  if (st != NF_OK) {
    std::cerr << "error (" << nf_status_name(st) << "): " << nf_last_error() << "\n";
    if (res.contains("counterexample")) write_counterexample(cmd.files, res["counterexample"]);
    switch (st) {
      case NF_ERR_VIOLATION:
      case NF_ERR_POLICY:
      case NF_ERR_TRAINING:
      case NF_ERR_CAP:
      case NF_ERR_INTERNAL:
        return kExitFailed;
      default:
        return kExitUsage;
    }
  }

  Json result = res.value("result", Json::object());
  if (!cmd.net_out.empty() && result.contains("net")) {
    if (!write_text(cmd.net_out, result["net"].dump(2))) return kExitUsage;
    result.erase("net");
  }
  if (res.contains("csv") && !cmd.files.csv.empty()) {
    if (!write_text(cmd.files.csv, res["csv"].get<std::string>())) return kExitUsage;
  }
  if (!write_text(cmd.files.out, result.dump(2))) return kExitUsage;

  if (res.contains("verdict") && !res["verdict"].get<bool>()) {
    write_counterexample(cmd.files, res.value("counterexample", result));
    return kExitFailed;
  }
  return kExitOk;
}

void add_outputs(CLI::App* sub, Outputs& o, bool csv) {
  sub->add_option("-o,--out", o.out, "result JSON path (default: stdout)");
  if (csv) sub->add_option("--csv", o.csv, "CSV output path");
  sub->add_option("--counterexample", o.counterexample,
                  "where to write the counterexample on failure (default: stderr)");
}

// Copies an option into the request only when it was given on the command line.
template <typename T>
void put(Json& req, const char* key, const std::optional<T>& v) {
  if (v) req[key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neurofail: fault-tolerance bounds and experiments for feed-forward networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(nf_version()));

  std::uint64_t seed = 0;
  Command cmd;

  // Shared option storage; each subcommand binds the ones it needs.
  std::string net_path, kind = "neurons", clamp = "deviation", target = "ridge_sine";
  std::vector<std::size_t> dist, cut, layers_list;
  std::optional<double> eps, eps_prime, capacity, k, lr, weight_decay, target_eps_prime, alpha,
      w_m, slack, weight, init_scale;
  std::optional<std::size_t> trials, grid, epochs, samples, inputs, n_fail, neurons, faults,
      fault_layer, width, depth, input_dim, max_neurons, batch_size, log_every;
  std::optional<std::string> scenario_path, activation, optimizer, latency, mode, policies;
  std::vector<double> input, k_values;
  std::vector<int> bits;
  bool output_only = false;
  bool overprovision = false;

  auto seed_opt = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "RNG seed")->envname("NEUROFAIL_SEED");
  };
  auto net_opt = [&](CLI::App* sub) {
    sub->add_option("--net", net_path, "network JSON")->required()->check(CLI::ExistingFile);
  };
  auto dist_opts = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--dist", dist, "faults per layer, e.g. 1,0,2")->delimiter(',');
    if (required) o->required();
    sub->add_option("--kind", kind, "neurons | synapses")
        ->check(CLI::IsMember({"neurons", "synapses"}));
  };

  auto* train = app.add_subcommand("train", "train a network on a target function");
  train->add_option("--target", target, "ridge_sine | smooth_xor | product | constant:<c>");
  train->add_option("--layers", layers_list, "hidden widths, e.g. 16,8")->delimiter(',');
  train->add_option("--activation", activation)->check(CLI::IsMember({"sigmoid", "tanh"}));
  train->add_option("--k", k, "Lipschitz constant K");
  train->add_option("--optimizer", optimizer)->check(CLI::IsMember({"adam", "gd"}));
  train->add_option("--lr", lr);
  train->add_option("--epochs", epochs);
  train->add_option("--batch-size", batch_size);
  train->add_option("--samples", samples);
  train->add_option("--weight-decay", weight_decay);
  train->add_option("--target-eps-prime", target_eps_prime);
  train->add_option("--grid", grid, "grid points per dimension for eps'");
  train->add_option("--log-every", log_every);
  train->add_option("--init-scale", init_scale);
  train->add_flag("--output-only", output_only, "train the output weights only");
  train->add_flag("--overprovision", overprovision, "grow the network until it is certified");
  train->add_option("--eps", eps);
  train->add_option("--eps-prime", eps_prime);
  train->add_option("--dist", dist, "neuron faults per layer (overprovision)")->delimiter(',');
  train->add_option("--capacity", capacity);
  train->add_option("--max-neurons", max_neurons);
  train->add_option("--net-out", cmd.net_out, "where to write the network")->required();
  seed_opt(train);
  add_outputs(train, cmd.files, true);

  auto* analyze = app.add_subcommand("analyze", "Fep bound and maximal tolerable distributions");
  auto* certify = app.add_subcommand("certify", "check Fep < eps - eps'");
  for (auto* sub : {analyze, certify}) {
    net_opt(sub);
    dist_opts(sub, true);
    auto* ce = sub->add_option("--eps", eps);
    auto* cp = sub->add_option("--eps-prime", eps_prime);
    if (sub == certify) {
      ce->required();
      cp->required();
    }
    sub->add_option("--capacity", capacity, "Byzantine capacity C")->required();
    sub->add_option("--clamp", clamp)->check(CLI::IsMember({"deviation", "value"}));
    add_outputs(sub, cmd.files, false);
  }

  auto* inject = app.add_subcommand("inject", "evaluate one fault scenario");
  net_opt(inject);
  inject->add_option("--scenario", scenario_path, "scenario JSON")
      ->required()
      ->check(CLI::ExistingFile);
  inject->add_option("--input", input, "input point, e.g. 0.2,0.7")->delimiter(',');
  add_outputs(inject, cmd.files, false);

  auto* soundness = app.add_subcommand("soundness", "Monte Carlo check of the Fep bound");
  net_opt(soundness);
  dist_opts(soundness, true);
  soundness->add_option("--capacity", capacity)->required();
  soundness->add_option("--clamp", clamp)->check(CLI::IsMember({"deviation", "value"}));
  soundness->add_option("--policies", policies)
      ->check(CLI::IsMember({"random", "adversarial", "mixed"}));
  soundness->add_option("--trials", trials);
  seed_opt(soundness);
  add_outputs(soundness, cmd.files, true);

  auto* sweep = app.add_subcommand("sweep-k", "Fep and observed error against K");
  sweep->add_option("--k", k_values, "K values, e.g. 0.25,0.5,1,2")->delimiter(',')->required();
  sweep->add_option("--layers", depth, "number of hidden layers");
  sweep->add_option("--width", width, "neurons per layer, constant neuron included");
  sweep->add_option("--input-dim", input_dim);
  sweep->add_option("--weight", weight);
  sweep->add_option("--fault-layer", fault_layer, "1-based layer holding the faults");
  sweep->add_option("--faults", faults, "faulty neurons in that layer");
  sweep->add_option("--capacity", capacity);
  sweep->add_option("--trials", trials);
  seed_opt(sweep);
  add_outputs(sweep, cmd.files, true);

  auto* quant = app.add_subcommand("quantize", "quantized vs exact output error");
  net_opt(quant);
  quant->add_option("--bits", bits, "fractional bits, e.g. 4,6,8,10")->delimiter(',');
  quant->add_option("--inputs", inputs, "minimum number of grid inputs");
  add_outputs(quant, cmd.files, true);

  auto* boost = app.add_subcommand("boost", "early-cutoff simulation campaign");
  net_opt(boost);
  boost->add_option("--target", target, "target function name or 'self'");
  boost->add_option("--eps", eps)->required();
  boost->add_option("--eps-prime", eps_prime)->required();
  boost->add_option("--cut", cut, "dropped senders per layer, e.g. 2,1")
      ->delimiter(',')
      ->required();
  boost->add_option("--latency", latency,
                    "uniform:lo,hi | exponential:mean | heavy_tail:mean,p,factor");
  boost->add_option("--trials", trials);
  seed_opt(boost);
  add_outputs(boost, cmd.files, true);

  auto* brute = app.add_subcommand("brute-check", "exhaustive scenario x grid check");
  net_opt(brute);
  brute->add_option("--target", target, "target function name or 'self'");
  brute->add_option("--dist", dist, "neuron faults per layer")->delimiter(',')->required();
  brute->add_option("--eps", eps)->required();
  brute->add_option("--eps-prime", eps_prime, "also report the analytic certificate");
  brute->add_option("--capacity", capacity);
  brute->add_option("--grid", grid, "grid points per dimension");
  brute->add_option("--mode", mode)->check(CLI::IsMember({"crash", "byzantine"}));
  add_outputs(brute, cmd.files, false);

  auto* lemma = app.add_subcommand("lemma1-demo", "one unbounded Byzantine neuron");
  net_opt(lemma);
  lemma->add_option("--eps", eps)->required();
  lemma->add_option("--input", input)->delimiter(',');
  lemma->add_option("--capacity", capacity, "also replay the scenario clamped to C");
  add_outputs(lemma, cmd.files, false);

  auto* tight = app.add_subcommand("tightness", "single-layer crash construction");
  tight->add_option("--w-m", w_m)->required();
  tight->add_option("--neurons", neurons)->required();
  tight->add_option("--n-fail", n_fail);
  tight->add_option("--slack", slack, "derive n_fail = floor(slack / w_m)");
  tight->add_option("--alpha", alpha);
  tight->add_option("--k", k);
  add_outputs(tight, cmd.files, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  Json& req = cmd.request;
  if (!net_path.empty()) req["net_path"] = net_path;
  req["seed"] = seed;
  req["kind"] = kind;
  req["clamp"] = clamp;
  req["target"] = target;
  if (!dist.empty()) req["dist"] = dist;
  if (!input.empty()) req["input"] = input;
  put(req, "eps", eps);
  put(req, "eps_prime", eps_prime);
  put(req, "capacity", capacity);
  put(req, "trials", trials);
  put(req, "grid", grid);
  put(req, "k", k);
  put(req, "policies", policies);

  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  if (sub == train) {
    cmd.op = "train";
    if (!layers_list.empty()) req["layers"] = layers_list;
    put(req, "activation", activation);
    put(req, "optimizer", optimizer);
    put(req, "lr", lr);
    put(req, "epochs", epochs);
    put(req, "batch_size", batch_size);
    put(req, "samples", samples);
    put(req, "weight_decay", weight_decay);
    put(req, "target_eps_prime", target_eps_prime);
    put(req, "log_every", log_every);
    put(req, "init_scale", init_scale);
    req["output_only"] = output_only;
    if (overprovision) {
      if (!eps || !eps_prime || dist.empty()) {
        std::cerr << "error: --overprovision needs --eps, --eps-prime and --dist\n";
        return kExitUsage;
      }
      Json op = {{"eps", *eps}, {"eps_prime", *eps_prime}, {"dist", dist}};
      put(op, "capacity", capacity);
      put(op, "max_neurons", max_neurons);
      req["overprovision"] = op;
    }
  } else if (sub == analyze) {
    cmd.op = "analyze";
  } else if (sub == certify) {
    cmd.op = "certify";
  } else if (sub == inject) {
    cmd.op = "inject";
    std::ifstream f(*scenario_path);
    try {
      req["scenario"] = Json::parse(f);
    } catch (const Json::exception& e) {
      std::cerr << "error: " << *scenario_path << ": " << e.what() << "\n";
      return kExitUsage;
    }
  } else if (sub == soundness) {
    cmd.op = "soundness";
  } else if (sub == sweep) {
    cmd.op = "sweep_k";
    req["k"] = k_values;
    put(req, "layers", depth);
    put(req, "width", width);
    put(req, "input_dim", input_dim);
    put(req, "weight", weight);
    put(req, "fault_layer", fault_layer);
    put(req, "faults", faults);
  } else if (sub == quant) {
    cmd.op = "quantize";
    if (!bits.empty()) req["bits"] = bits;
    put(req, "inputs", inputs);
  } else if (sub == boost) {
    cmd.op = "boost";
    req["cut"] = cut;
    put(req, "latency", latency);
  } else if (sub == brute) {
    cmd.op = "brute_check";
    put(req, "mode", mode);
  } else if (sub == lemma) {
    cmd.op = "lemma1_demo";
  } else if (sub == tight) {
    cmd.op = "tightness";
    put(req, "w_m", w_m);
    put(req, "neurons", neurons);
    put(req, "n_fail", n_fail);
    put(req, "slack", slack);
    put(req, "alpha", alpha);
    if (!n_fail && !slack) {
      std::cerr << "error: tightness needs --n-fail or --slack\n";
      return kExitUsage;
    }
  } else {
    std::cerr << "error: unknown subcommand " << name << "\n";
    return kExitUsage;
  }
  return run(cmd);
}
