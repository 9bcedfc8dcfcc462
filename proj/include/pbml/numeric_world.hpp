#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbml/population.hpp"
#include "pbml/rng.hpp"

namespace pbml {

/// Genome whose fitness is X alone; R sets the mutation scale of X as 1.05^R.
struct NumericGenome {
  double x = 0.0;
  double r = 0.0;
  friend bool operator==(const NumericGenome&, const NumericGenome&) = default;
};

/// Fitness is decoupled from learning ability: R never affects the present
/// fitness, only how far children of the genome land.
class NumericWorld {
 public:
  using Params = NumericGenome;

  std::string_view kind() const { return "numeric"; }

  double fitness(const NumericGenome& g) const { return g.x; }

  /// child.X = X + n1 * 1.05^R, child.R = R + n2.
  NumericGenome mutate(const NumericGenome& g, Stream& rng) const {
    const double n1 = rng.normal();
    const double n2 = rng.normal();
    return mutate_with(g, n1, n2);
  }

  static NumericGenome mutate_with(const NumericGenome& g, double n1, double n2) {
    return {g.x + n1 * std::pow(1.05, g.r), g.r + n2};
  }

  void begin_generation(std::uint64_t, Stream&) {}
  std::uint64_t epoch() const { return 0; }

  static PopulationState<NumericGenome> initial_population() { return singleton_population(NumericGenome{}); }

  std::vector<std::string> metric_columns() const { return {"weighted_mean_X", "weighted_mean_R", "max_X"}; }

  std::vector<double> metric_values(const PopulationState<NumericGenome>& state, std::span<const double>) const {
    double mx = 0.0, mr = 0.0, max_x = -INFINITY;
    for (const auto& g : state.genomes) {
      mx += g.population * g.params.x;
      mr += g.population * g.params.r;
      max_x = std::max(max_x, g.params.x);
    }
    return {mx, mr, max_x};
  }

  static std::vector<double> encode(const NumericGenome& g) { return {g.x, g.r}; }
  static NumericGenome decode(std::span<const double> v);
};

}  // namespace pbml
