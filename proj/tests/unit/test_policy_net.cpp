#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pbml/error.hpp"
#include "pbml/policy_net.hpp"

using namespace pbml;

namespace {

const PolicyNetShape kSmall{3, 4, 2};

std::vector<double> random_obs(Stream& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(-3.0, 3.0);
  return v;
}

ModularPolicyNet random_net(std::uint64_t seed, PolicyNetShape shape = kSmall) {
  Stream rng(seed);
  auto net = ModularPolicyNet::init(rng, shape);
  for (auto& layer : net.modules)
    for (auto& m : layer)
      for (auto& b : m.bias) b = rng.uniform(-0.5, 0.5);
  for (auto& layer : net.gates)
    for (auto& g : layer) g = rng.uniform(-1.0, 1.0);
  return net;
}

/// Sample stdev of one parameter's mutation noise over n children.
double noise_stdev(const ModularPolicyNet& net, std::size_t flat_index, int n) {
  const double parent = net.flatten()[flat_index];
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Stream rng(77, 0, static_cast<std::uint64_t>(i));
    const double d = net.mutate(rng, MutationScales{}).flatten()[flat_index] - parent;
    sq += d * d;
  }
  return std::sqrt(sq / n);
}

/// Flat index of module 0's first weight and first bias in layer 2.
std::size_t first_module_weight(PolicyNetShape s) { return s.hidden * s.obs_dim + s.hidden; }
std::size_t first_module_bias(PolicyNetShape s) { return first_module_weight(s) + s.hidden * s.hidden; }

}  // namespace

TEST_CASE("init gives uniform gates, zero radii and reproducible weights") {
  Stream a(1), b(1);
  const auto n1 = ModularPolicyNet::init(a, PolicyNetShape{});
  const auto n2 = ModularPolicyNet::init(b, PolicyNetShape{});
  CHECK(n1 == n2);
  for (std::size_t layer = 0; layer < kGatedLayers; ++layer)
    for (double w : n1.gate_weights(layer)) CHECK(w == doctest::Approx(1.0 / 3.0));
  for (double r : n1.radii) CHECK(r == 0.0);
  CHECK(n1.flatten().size() == ModularPolicyNet::parameter_count(PolicyNetShape{}));
}

TEST_CASE("init weights have variance 1 / fan_in") {
  Stream rng(4);
  const auto net = ModularPolicyNet::init(rng, PolicyNetShape{10, 32, 2});
  double sq = 0.0;
  std::size_t n = 0;
  for (const auto& layer : net.modules)
    for (const auto& m : layer)
      for (double w : m.weights) {
        sq += w * w;
        ++n;
      }
  CHECK(sq / static_cast<double>(n) == doctest::Approx(1.0 / 32.0).epsilon(0.05));
}

TEST_CASE("actions stay in [-1, 1]") {
  const auto net = random_net(2, PolicyNetShape{});
  Stream rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto a = net.forward(random_obs(rng, 10));
    REQUIRE(a.size() == 2);
    for (double v : a) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("an all-zero network outputs zero") {
  const auto net = ModularPolicyNet::zeros(PolicyNetShape{});
  const auto a = net.forward(std::vector<double>(10, 0.7));
  CHECK(a == std::vector<double>{0.0, 0.0});
}

TEST_CASE("forward rejects a wrong-sized observation") {
  const auto net = ModularPolicyNet::zeros(PolicyNetShape{});
  CHECK_THROWS_AS(net.forward(std::vector<double>(9, 0.0)), std::invalid_argument);
}

TEST_CASE("a saturated gate passes one module through") {
  auto net = random_net(5);
  net.gates[0] = {800.0, 0.0, 0.0};
  auto solo = net;
  solo.modules[0][1] = solo.modules[0][0];
  solo.modules[0][2] = solo.modules[0][0];
  Stream rng(6);
  for (int i = 0; i < 20; ++i) {
    const auto obs = random_obs(rng, 3);
    const auto a = net.forward(obs), b = solo.forward(obs);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
  }
}

TEST_CASE("equal gates average the three module outputs") {
  auto net = random_net(7);
  net.gates[1] = {0.0, 0.0, 0.0};
  auto mean = net;
  auto& m = mean.modules[1];
  for (std::size_t i = 0; i < m[0].weights.size(); ++i)
    m[0].weights[i] = (net.modules[1][0].weights[i] + net.modules[1][1].weights[i] + net.modules[1][2].weights[i]) / 3.0;
  for (std::size_t i = 0; i < m[0].bias.size(); ++i)
    m[0].bias[i] = (net.modules[1][0].bias[i] + net.modules[1][1].bias[i] + net.modules[1][2].bias[i]) / 3.0;
  m[1] = m[0];
  m[2] = m[0];
  Stream rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto obs = random_obs(rng, 3);
    const auto a = net.forward(obs), b = mean.forward(obs);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
  }
}

TEST_CASE("shifting all gate logits of a layer leaves the output unchanged") {
  const auto net = random_net(9);
  auto shifted = net;
  for (auto& g : shifted.gates[0]) g += 37.5;
  for (auto& g : shifted.gates[1]) g -= 12.0;
  Stream rng(10);
  for (int i = 0; i < 20; ++i) {
    const auto obs = random_obs(rng, 3);
    const auto a = net.forward(obs), b = shifted.forward(obs);
    CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
    CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-12));
  }
}

TEST_CASE("module weight noise is base_sigma * 1.05^radius") {
  auto net = random_net(11);
  net.radii[0] = 14.2;
  net.radii[1] = -5.0;
  const double sigma = MutationScales{}.base_sigma;
  const double w_scale = std::exp(14.2 * std::log(1.05));
  CHECK(w_scale == doctest::Approx(1.9996).epsilon(1e-3));
  CHECK(noise_stdev(net, first_module_weight(kSmall), 100000) == doctest::Approx(sigma * w_scale).epsilon(0.02));
  CHECK(noise_stdev(net, first_module_bias(kSmall), 100000) ==
        doctest::Approx(sigma * std::pow(1.05, -5.0)).epsilon(0.02));
}

TEST_CASE("zero radii perturb every module at base_sigma") {
  const auto net = random_net(12);
  const auto idx = first_module_weight(kSmall) + 2 * (kSmall.hidden * kSmall.hidden + kSmall.hidden);
  CHECK(noise_stdev(net, idx, 20000) == doctest::Approx(MutationScales{}.base_sigma).epsilon(0.03));
}

TEST_CASE("very negative radii freeze a module") {
  auto net = random_net(13);
  net.radii[0] = -1000.0;
  net.radii[1] = -1000.0;
  for (int i = 0; i < 50; ++i) {
    Stream rng(14, 0, static_cast<std::uint64_t>(i));
    const auto child = net.mutate(rng, MutationScales{});
    CHECK(child.modules[0][0] == net.modules[0][0]);
    CHECK(child.modules[0][1] != net.modules[0][1]);
  }
}

TEST_CASE("mutation leaves the parent untouched and moves radii") {
  const auto net = random_net(15);
  const auto copy = net;
  Stream rng(16);
  const auto child = net.mutate(rng, MutationScales{});
  CHECK(net == copy);
  CHECK(child.radii != net.radii);
  CHECK(child.input.weights != net.input.weights);
  CHECK(child.gates != net.gates);
}

TEST_CASE("flatten and unflatten are inverse") {
  const auto net = random_net(17, PolicyNetShape{});
  const auto flat = net.flatten();
  CHECK(ModularPolicyNet::unflatten(flat, PolicyNetShape{}) == net);
  CHECK_THROWS_AS(ModularPolicyNet::unflatten(std::vector<double>(flat.size() - 1), PolicyNetShape{}), ConfigError);
}
