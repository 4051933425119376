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

#include "neurofail/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "neurofail/error.hpp"

namespace neurofail {

ActivationSpec::ActivationSpec(ActivationKind kind, double k) : kind_(kind), k_(k) {
  if (!std::isfinite(k) || k <= 0.0) {
    fail(ErrorKind::argument, "activation lipschitz constant must be positive and finite");
  }
}

double ActivationSpec::operator()(double x) const {
  if (!std::isfinite(x)) fail(ErrorKind::domain, "activation argument is not finite");
  return eval(x);
}

double ActivationSpec::eval(double x) const noexcept {
  if (kind_ == ActivationKind::tanh) return std::tanh(k_ * x);
  const double z = 4.0 * k_ * x;
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double ActivationSpec::derivative(double x) const noexcept {
  if (kind_ == ActivationKind::tanh) {
    const double t = std::tanh(k_ * x);
    return k_ * (1.0 - t * t);
  }
  const double s = eval(x);
  return 4.0 * k_ * s * (1.0 - s);
}

const char* to_string(ActivationKind kind) noexcept {
  return kind == ActivationKind::tanh ? "tanh" : "sigmoid";
}

Network::Network(NetworkParts parts) : p_(std::move(parts)) {
  if (p_.input_dim == 0) fail(ErrorKind::shape, "input_dim must be positive");
  if (p_.layers.empty()) fail(ErrorKind::shape, "network needs at least one layer");
  std::size_t prev = p_.input_dim + (p_.input_bias ? 1 : 0);
  for (std::size_t i = 0; i < p_.layers.size(); ++i) {
    const Layer& layer = p_.layers[i];
    const std::string where = "layers[" + std::to_string(i) + "]";
    if (layer.size() == 0) fail(ErrorKind::shape, where + ": layer has no neurons");
    if (layer.weights.cols() != prev) {
      fail(ErrorKind::shape, where + ": expected " + std::to_string(prev) +
                                 " columns, got " + std::to_string(layer.weights.cols()));
    }
    if (layer.constant_neuron && *layer.constant_neuron >= layer.size()) {
      fail(ErrorKind::shape, where + ": constant_neuron index out of range");
    }
    for (double w : layer.weights.values()) {
      if (!std::isfinite(w)) fail(ErrorKind::domain, where + ": non-finite weight");
    }
    prev = layer.size();
  }
  if (p_.output_weights.size() != prev) {
    fail(ErrorKind::shape, "output_weights: expected " + std::to_string(prev) +
                               " entries, got " + std::to_string(p_.output_weights.size()));
  }
  for (double w : p_.output_weights) {
    if (!std::isfinite(w)) fail(ErrorKind::domain, "output_weights: non-finite weight");
  }
  if (p_.quantization_bits && *p_.quantization_bits < 1) {
    fail(ErrorKind::argument, "quantization bits must be >= 1");
  }
  if (!p_.metadata.is_object()) p_.metadata = Json::object();
}

std::size_t Network::fan_in(std::size_t i) const {
  if (i == 0) return p_.input_dim + (p_.input_bias ? 1 : 0);
  return p_.layers.at(i - 1).size();
}

std::size_t Network::total_neurons() const {
  std::size_t n = 0;
  for (const auto& l : p_.layers) n += l.size();
  return n;
}

bool Network::operator==(const Network& o) const {
  return p_.input_dim == o.p_.input_dim && p_.input_bias == o.p_.input_bias &&
         p_.layers == o.p_.layers && p_.output_weights == o.p_.output_weights &&
         p_.activation == o.p_.activation &&
         p_.quantization_bits == o.p_.quantization_bits && p_.metadata == o.p_.metadata;
}

void check_input(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_dim()) {
    fail(ErrorKind::shape, "input has " + std::to_string(x.size()) +
                               " components, network expects " +
                               std::to_string(net.input_dim()));
  }
  for (double v : x) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      fail(ErrorKind::domain, "input components must lie in [0,1]");
    }
  }
}

double quantize_output(const Network& net, double y) noexcept {
  if (!net.quantization_bits()) return y;
  const double scale = std::ldexp(1.0, *net.quantization_bits());
  return std::round(y * scale) / scale;
}

std::vector<std::vector<double>> forward_layers(const Network& net,
                                                std::span<const double> x) {
  check_input(net, x);
  std::vector<double> prev(x.begin(), x.end());
  if (net.input_bias()) prev.push_back(1.0);

  std::vector<std::vector<double>> outputs;
  outputs.reserve(net.num_layers());
  const ActivationSpec& act = net.activation();
  for (const Layer& layer : net.layers()) {
    std::vector<double> y(layer.size());
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (layer.is_constant(j)) {
        y[j] = 1.0;
        continue;
      }
      double s = 0.0;
      const auto row = layer.weights.row(j);
      for (std::size_t i = 0; i < row.size(); ++i) s += row[i] * prev[i];
      y[j] = quantize_output(net, act.eval(s));
    }
    outputs.push_back(y);
    prev = std::move(y);
  }
  return outputs;
}

double forward(const Network& net, std::span<const double> x) {
  const auto ys = forward_layers(net, x);
  const auto& last = ys.back();
  double out = 0.0;
  for (std::size_t i = 0; i < last.size(); ++i) out += net.output_weights()[i] * last[i];
  return out;
}

std::vector<double> max_weights(const Network& net) {
  std::vector<double> wm;
  wm.reserve(net.num_layers() + 1);
  for (const Layer& layer : net.layers()) {
    double m = 0.0;
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (layer.is_constant(j)) continue;
      for (double w : layer.weights.row(j)) m = std::max(m, std::abs(w));
    }
    wm.push_back(m);
  }
  double m = 0.0;
  for (double w : net.output_weights()) m = std::max(m, std::abs(w));
  wm.push_back(m);
  return wm;
}

// ---------------------------------------------------------------------------
// Serialization

Json to_json(const Network& net) {
  Json doc;
  doc["input_dim"] = net.input_dim();
  if (net.input_bias()) doc["input_bias"] = true;
  doc["activation"] = {{"kind", to_string(net.activation().kind())},
                       {"k", net.activation().k()}};
  Json layers = Json::array();
  for (const Layer& layer : net.layers()) {
    Json rows = Json::array();
    for (std::size_t j = 0; j < layer.size(); ++j) {
      const auto row = layer.weights.row(j);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    Json entry;
    entry["weights"] = std::move(rows);
    entry["constant_neuron"] =
        layer.constant_neuron ? Json(*layer.constant_neuron) : Json(nullptr);
    layers.push_back(std::move(entry));
  }
  doc["layers"] = std::move(layers);
  doc["output_weights"] = net.output_weights();
  if (net.quantization_bits()) {
    doc["quantization"] = {{"fractional_bits", *net.quantization_bits()}};
  }
  doc["metadata"] = net.metadata();
  return doc;
}

namespace {

const Json& require(const Json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    fail(ErrorKind::parse, path + key + ": required field missing");
  }
  return obj.at(key);
}

double number_at(const Json& v, const std::string& path) {
  if (!v.is_number()) fail(ErrorKind::parse, path + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(ErrorKind::parse, path + ": non-finite number");
  return d;
}

std::size_t index_at(const Json& v, const std::string& path) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    fail(ErrorKind::parse, path + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

}  // namespace

Network network_from_json(const Json& doc) {
  if (!doc.is_object()) fail(ErrorKind::parse, "document: expected an object");
  NetworkParts p;
  p.input_dim = index_at(require(doc, "input_dim", ""), "input_dim");
  if (doc.contains("input_bias")) {
    if (!doc["input_bias"].is_boolean()) fail(ErrorKind::parse, "input_bias: expected a boolean");
    p.input_bias = doc["input_bias"].get<bool>();
  }

  const Json& act = require(doc, "activation", "");
  const Json& kind = require(act, "kind", "activation.");
  if (!kind.is_string()) fail(ErrorKind::parse, "activation.kind: expected a string");
  ActivationKind ak;
  if (kind == "sigmoid") {
    ak = ActivationKind::sigmoid;
  } else if (kind == "tanh") {
    ak = ActivationKind::tanh;
  } else {
    fail(ErrorKind::parse, "activation.kind: unknown kind " + kind.get<std::string>());
  }
  const double k = number_at(require(act, "k", "activation."), "activation.k");
  if (k <= 0.0) fail(ErrorKind::parse, "activation.k: must be positive");
  p.activation = ActivationSpec(ak, k);

  const Json& layers = require(doc, "layers", "");
  if (!layers.is_array() || layers.empty()) {
    fail(ErrorKind::parse, "layers: expected a non-empty array");
  }
  std::size_t prev = p.input_dim + (p.input_bias ? 1 : 0);
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const std::string path = "layers[" + std::to_string(li) + "]";
    const Json& rows = require(layers[li], "weights", path + ".");
    if (!rows.is_array() || rows.empty()) {
      fail(ErrorKind::parse, path + ".weights: expected a non-empty array of rows");
    }
    Layer layer;
    layer.weights = Matrix(rows.size(), prev);
    for (std::size_t j = 0; j < rows.size(); ++j) {
      const std::string rpath = path + ".weights[" + std::to_string(j) + "]";
      if (!rows[j].is_array()) fail(ErrorKind::parse, rpath + ": expected an array");
      if (rows[j].size() != prev) {
        fail(ErrorKind::parse, rpath + ": row length " + std::to_string(rows[j].size()) +
                                   " does not match " + std::to_string(prev) + " senders");
      }
      for (std::size_t i = 0; i < prev; ++i) {
        layer.weights(j, i) = number_at(rows[j][i], rpath + "[" + std::to_string(i) + "]");
      }
    }
    if (layers[li].contains("constant_neuron") && !layers[li]["constant_neuron"].is_null()) {
      const std::size_t c = index_at(layers[li]["constant_neuron"], path + ".constant_neuron");
      if (c >= rows.size()) fail(ErrorKind::parse, path + ".constant_neuron: out of range");
      layer.constant_neuron = c;
    }
    prev = rows.size();
    p.layers.push_back(std::move(layer));
  }

  const Json& out = require(doc, "output_weights", "");
  if (!out.is_array() || out.size() != prev) {
    fail(ErrorKind::parse, "output_weights: expected " + std::to_string(prev) + " numbers");
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    p.output_weights.push_back(number_at(out[i], "output_weights[" + std::to_string(i) + "]"));
  }
  if (doc.contains("quantization")) {
    const Json& bits = require(doc["quantization"], "fractional_bits", "quantization.");
    if (!bits.is_number_integer() || bits.get<int>() < 1) {
      fail(ErrorKind::parse, "quantization.fractional_bits: expected a positive integer");
    }
    p.quantization_bits = bits.get<int>();
  }
  if (doc.contains("metadata")) {
    if (!doc["metadata"].is_object()) fail(ErrorKind::parse, "metadata: expected an object");
    p.metadata = doc["metadata"];
  }
  return Network(std::move(p));
}

std::string save(const Network& net) { return to_json(net).dump(2); }

Network load(std::string_view document) {
  Json doc = Json::parse(document, nullptr, false);
  if (doc.is_discarded()) fail(ErrorKind::parse, "document: not valid JSON");
  return network_from_json(doc);
}

Network load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load(ss.str());
}

void save_file(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path);
  out << save(net) << '\n';
}

}  // namespace neurofail
