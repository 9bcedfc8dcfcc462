#include "pbml/policy_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pbml/error.hpp"

namespace pbml {

void Affine::accumulate(std::span<const double> x, std::span<double> y, double scale) const {
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = weights.data() + o * in;
    double acc = bias[o];
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    y[o] += scale * acc;
  }
}

ModularPolicyNet ModularPolicyNet::zeros(PolicyNetShape shape) {
  if (shape.obs_dim == 0 || shape.hidden == 0 || shape.action_dim == 0)
    throw std::invalid_argument("policy net dimensions must be positive");
  ModularPolicyNet net;
  net.shape = shape;
  net.input = Affine(shape.obs_dim, shape.hidden);
  for (auto& layer : net.modules)
    for (auto& m : layer) m = Affine(shape.hidden, shape.hidden);
  net.output = Affine(shape.hidden, shape.action_dim);
  return net;
}

namespace {

void fill_scaled_normal(Affine& a, Stream& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(a.in));
  for (auto& w : a.weights) w = scale * rng.normal();
}

void perturb(std::vector<double>& v, double sigma, Stream& rng) {
  for (auto& x : v) x += sigma * rng.normal();
}

}  // namespace

ModularPolicyNet ModularPolicyNet::init(Stream& rng, PolicyNetShape shape) {
  auto net = zeros(shape);
  fill_scaled_normal(net.input, rng);
  for (auto& layer : net.modules)
    for (auto& m : layer) fill_scaled_normal(m, rng);
  fill_scaled_normal(net.output, rng);
  return net;
}

std::array<double, kModulesPerLayer> ModularPolicyNet::gate_weights(std::size_t layer) const {
  const auto& g = gates.at(layer);
  const double top = *std::max_element(g.begin(), g.end());
  std::array<double, kModulesPerLayer> w{};
  double sum = 0.0;
  for (std::size_t k = 0; k < kModulesPerLayer; ++k) {
    w[k] = std::exp(g[k] - top);
    sum += w[k];
  }
  for (auto& x : w) x /= sum;
  return w;
}

CompiledPolicy::Layer::Layer(const Affine& a) : in(a.in), out(a.out), columns(a.in * a.out), bias(a.bias) {
  for (std::size_t o = 0; o < out; ++o)
    for (std::size_t i = 0; i < in; ++i) columns[i * out + o] = a.weights[o * in + i];
}

void CompiledPolicy::Layer::apply(std::span<const double> x, std::span<double> y) const {
  std::copy(bias.begin(), bias.end(), y.begin());
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    const double* col = columns.data() + i * out;
    for (std::size_t o = 0; o < out; ++o) y[o] += col[o] * xi;
  }
}

CompiledPolicy::CompiledPolicy(const ModularPolicyNet& net)
    : input_(net.input), output_(net.output), h_(2 * net.shape.hidden, 0.0) {
  static_assert(kGatedLayers == 2);
  for (std::size_t layer = 0; layer < kGatedLayers; ++layer) {
    const auto w = net.gate_weights(layer);
    Affine mixed(net.shape.hidden, net.shape.hidden);
    for (std::size_t k = 0; k < kModulesPerLayer; ++k) {
      const auto& m = net.modules[layer][k];
      for (std::size_t i = 0; i < mixed.weights.size(); ++i) mixed.weights[i] += w[k] * m.weights[i];
      for (std::size_t i = 0; i < mixed.bias.size(); ++i) mixed.bias[i] += w[k] * m.bias[i];
    }
    mixed_[layer] = Layer(mixed);
  }
}

void CompiledPolicy::forward(std::span<const double> obs, std::span<double> action) {
  if (obs.size() != input_.in)
    throw std::invalid_argument("forward: observation has " + std::to_string(obs.size()) +
                                " entries, expected " + std::to_string(input_.in));
  if (action.size() != output_.out)
    throw std::invalid_argument("forward: action buffer has " + std::to_string(action.size()) +
                                " entries, expected " + std::to_string(output_.out));
  const std::size_t hidden = input_.out;
  std::span<double> a(h_.data(), hidden), b(h_.data() + hidden, hidden);
  input_.apply(obs, a);
  for (auto& v : a) v = std::tanh(v);
  for (const auto& layer : mixed_) {
    layer.apply(a, b);
    for (auto& v : b) v = std::tanh(v);
    std::swap(a, b);
  }
  output_.apply(a, action);
  for (auto& v : action) v = std::tanh(v);
}

std::vector<double> ModularPolicyNet::forward(std::span<const double> obs) const {
  std::vector<double> action(shape.action_dim, 0.0);
  CompiledPolicy(*this).forward(obs, action);
  return action;
}

ModularPolicyNet ModularPolicyNet::mutate(Stream& rng, const MutationScales& scales) const {
  ModularPolicyNet child = *this;
  const double base = scales.base_sigma;
  perturb(child.input.weights, base, rng);
  perturb(child.input.bias, base, rng);
  for (std::size_t layer = 0; layer < kGatedLayers; ++layer) {
    for (std::size_t k = 0; k < kModulesPerLayer; ++k) {
      const std::size_t m = layer * kModulesPerLayer + k;
      perturb(child.modules[layer][k].weights, base * std::pow(1.05, radii[2 * m]), rng);
      perturb(child.modules[layer][k].bias, base * std::pow(1.05, radii[2 * m + 1]), rng);
    }
    for (auto& g : child.gates[layer]) g += base * rng.normal();
  }
  perturb(child.output.weights, base, rng);
  perturb(child.output.bias, base, rng);
  for (auto& r : child.radii) r += scales.meta_sigma * rng.normal();
  return child;
}

std::size_t ModularPolicyNet::parameter_count(PolicyNetShape s) {
  const std::size_t h = s.hidden;
  return (s.obs_dim * h + h) + kGatedLayers * (kModulesPerLayer * (h * h + h) + kModulesPerLayer) +
         (h * s.action_dim + s.action_dim) + kRadiusGenes;
}

std::vector<double> ModularPolicyNet::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count(shape));
  auto put = [&](const std::vector<double>& v) { flat.insert(flat.end(), v.begin(), v.end()); };
  put(input.weights);
  put(input.bias);
  for (std::size_t layer = 0; layer < kGatedLayers; ++layer) {
    for (const auto& m : modules[layer]) {
      put(m.weights);
      put(m.bias);
    }
    flat.insert(flat.end(), gates[layer].begin(), gates[layer].end());
  }
  put(output.weights);
  put(output.bias);
  flat.insert(flat.end(), radii.begin(), radii.end());
  return flat;
}

ModularPolicyNet ModularPolicyNet::unflatten(std::span<const double> flat, PolicyNetShape shape) {
  if (flat.size() != parameter_count(shape))
    throw ConfigError("policy net: expected " + std::to_string(parameter_count(shape)) +
                      " parameters, got " + std::to_string(flat.size()));
  auto net = zeros(shape);
  std::size_t pos = 0;
  auto take = [&](std::span<double> dst) {
    std::copy(flat.begin() + static_cast<long>(pos), flat.begin() + static_cast<long>(pos + dst.size()), dst.begin());
    pos += dst.size();
  };
  take(net.input.weights);
  take(net.input.bias);
  for (std::size_t layer = 0; layer < kGatedLayers; ++layer) {
    for (auto& m : net.modules[layer]) {
      take(m.weights);
      take(m.bias);
    }
    take(net.gates[layer]);
  }
  take(net.output.weights);
  take(net.output.bias);
  take(net.radii);
  return net;
}

}  // namespace pbml
