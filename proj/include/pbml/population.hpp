#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace pbml {

/// One lineage member: world parameters plus its share of the population.
template <class Params>
struct GenomeRecord {
  Params params{};
  double population = 1.0;
  std::uint64_t id = 0;
  std::optional<std::uint64_t> parent_id;
  std::uint64_t birth_generation = 0;

  // Fitness cache. Valid while the world's epoch equals fitness_epoch.
  double fitness = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t fitness_epoch = kNoEpoch;

  static constexpr std::uint64_t kNoEpoch = ~std::uint64_t{0};
};

/// Living genomes at a generation boundary.
///
/// `population` fields sum to 1. `birth_scale` is the total mass the last
/// renormalization divided by (1 + newborns/C); multiplying a stored share by
/// it gives the share relative to the pre-birth population, which is the
/// scale the next extinction cutoff is measured on. A newborn always sits at
/// exactly 1/C on that scale.
template <class Params>
struct PopulationState {
  std::vector<GenomeRecord<Params>> genomes;
  std::uint64_t generation = 0;
  std::uint64_t next_id = 0;
  double birth_scale = 1.0;

  /// Share relative to the pre-birth population.
  double cull_ratio(std::size_t i) const { return genomes[i].population * birth_scale; }

  double total_population() const {
    double s = 0.0;
    for (const auto& g : genomes) s += g.population;
    return s;
  }

  std::vector<double> ratios() const {
    std::vector<double> r;
    r.reserve(genomes.size());
    for (const auto& g : genomes) r.push_back(g.population);
    return r;
  }
};

/// A population holding one genome at ratio 1.
template <class Params>
PopulationState<Params> singleton_population(Params params) {
  PopulationState<Params> s;
  GenomeRecord<Params> g;
  g.params = std::move(params);
  g.population = 1.0;
  g.id = 0;
  s.genomes.push_back(std::move(g));
  s.next_id = 1;
  return s;
}

}  // namespace pbml
