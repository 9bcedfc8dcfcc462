#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "pbml/rng.hpp"

namespace pbml {

/// Dense affine map, weights row-major (out x in).
struct Affine {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  Affine() = default;
  Affine(std::size_t in_dim, std::size_t out_dim)
      : in(in_dim), out(out_dim), weights(in_dim * out_dim, 0.0), bias(out_dim, 0.0) {}

  /// y += W x + b
  void accumulate(std::span<const double> x, std::span<double> y, double scale = 1.0) const;
  friend bool operator==(const Affine&, const Affine&) = default;
};

struct PolicyNetShape {
  std::size_t obs_dim = 10;
  std::size_t hidden = 32;
  std::size_t action_dim = 2;
  friend bool operator==(const PolicyNetShape&, const PolicyNetShape&) = default;
};

struct MutationScales {
  double base_sigma = 0.02;  // layer 1, layer 4, gates; base for middle modules
  double meta_sigma = 0.5;   // radius genes
};

inline constexpr std::size_t kModulesPerLayer = 3;
inline constexpr std::size_t kGatedLayers = 2;
inline constexpr std::size_t kMiddleModules = kModulesPerLayer * kGatedLayers;
inline constexpr std::size_t kRadiusGenes = 2 * kMiddleModules;

struct ModularPolicyNet;

/// A ModularPolicyNet with each gated layer folded into one affine map
/// (sum_k w_k W_k, sum_k w_k b_k) and every weight matrix stored column-major.
/// Built once per rollout; evaluating it allocates nothing.
class CompiledPolicy {
 public:
  explicit CompiledPolicy(const ModularPolicyNet& net);

  /// Writes tanh-bounded actions into `action`. Throws std::invalid_argument
  /// on mismatched sizes.
  void forward(std::span<const double> obs, std::span<double> action);

 private:
  struct Layer {
    std::size_t in = 0, out = 0;
    std::vector<double> columns;  // in x out, column i holds W[:, i]
    std::vector<double> bias;
    explicit Layer(const Affine& a);
    Layer() = default;
    /// y = W x + b, summed over inputs in index order.
    void apply(std::span<const double> x, std::span<double> y) const;
  };
  Layer input_;
  std::array<Layer, 2> mixed_;
  Layer output_;
  std::vector<double> h_;
};

/// Four-layer policy. Layers 2 and 3 are three parallel H->H modules whose
/// outputs are mixed by softmax(gate logits). radii[2m] and radii[2m+1] are
/// the log-scale (base 1.05) mutation radii of middle module m's weights and
/// biases; modules are numbered layer-major (layer 2 is m = 0..2).
struct ModularPolicyNet {
  PolicyNetShape shape;
  Affine input;
  std::array<std::array<Affine, kModulesPerLayer>, kGatedLayers> modules;
  std::array<std::array<double, kModulesPerLayer>, kGatedLayers> gates{};
  Affine output;
  std::array<double, kRadiusGenes> radii{};

  friend bool operator==(const ModularPolicyNet&, const ModularPolicyNet&) = default;

  /// Zero weights, zero gates, zero radii.
  static ModularPolicyNet zeros(PolicyNetShape shape);
  /// Weights ~ N(0, 1/fan_in), biases and gates and radii zero.
  static ModularPolicyNet init(Stream& rng, PolicyNetShape shape);

  std::array<double, kModulesPerLayer> gate_weights(std::size_t layer) const;

  /// tanh hidden units, tanh-bounded actions in [-1, 1]. Throws
  /// std::invalid_argument on an observation of the wrong size.
  std::vector<double> forward(std::span<const double> obs) const;

  /// Child network; the parent is untouched.
  ModularPolicyNet mutate(Stream& rng, const MutationScales& scales) const;

  /// Flat layout: layer 1 (W, b), layer 2 modules (W, b each), layer 2 gates,
  /// layer 3 modules, layer 3 gates, layer 4 (W, b), radii.
  std::vector<double> flatten() const;
  static ModularPolicyNet unflatten(std::span<const double> flat, PolicyNetShape shape);
  static std::size_t parameter_count(PolicyNetShape shape);
};

}  // namespace pbml
