#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbml/error.hpp"
#include "pbml/metrics.hpp"
#include "pbml/parallel.hpp"
#include "pbml/population.hpp"
#include "pbml/rng.hpp"

namespace pbml {

enum class Strategy { population_based, single_genome, random_drift };

/// How equal fitnesses are ranked inside the engine. `average` gives tied
/// genomes the mean of the ranks they span; `lottery` orders them by a
/// per-genome key drawn from the (seed, generation, id) stream.
enum class TieBreak { average, lottery };

std::string_view to_string(Strategy s);
std::string_view to_string(TieBreak t);
Strategy parse_strategy(std::string_view name);
TieBreak parse_tie_break(std::string_view name);

struct EngineConfig {
  double decay_ratio = 0.25;
  std::size_t offspring_count = 1000;
  std::optional<double> extinction_cutoff;  // 1 / offspring_count when unset
  Strategy strategy = Strategy::population_based;
  std::size_t generations = 500;
  std::uint64_t master_seed = 0;
  TieBreak tie_break = TieBreak::lottery;
  std::size_t evaluation_threads = 1;

  double cutoff() const {
    return extinction_cutoff ? *extinction_cutoff : 1.0 / static_cast<double>(offspring_count);
  }
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Selection primitives

/// Fractional rank in (0, 1]: best maps to 1, ties share their mean rank.
/// Throws RunError on NaN or +inf. -inf is accepted and ranks lowest; worlds
/// use it to mark a genome that should die.
std::vector<double> rank_fitness(std::span<const double> fitness);

/// Like rank_fitness, but ties are ordered by `keys` (ascending key ranks
/// lower) so every genome receives a distinct rank.
std::vector<double> rank_fitness_keyed(std::span<const double> fitness,
                                       std::span<const std::uint64_t> keys);

struct DecayResult {
  std::vector<std::size_t> survivors;  // indices into the input, in order
  std::vector<double> ratios;          // renormalized, aligned with survivors
  double min_cull_share = 0.0;         // smallest share * birth_scale among survivors
  bool guard_applied = false;          // nothing cleared the cutoff; top-ranked kept alone
};

/// Multiplies each ratio by (1 - D) * rank, renormalizes, removes genomes
/// whose share times `birth_scale` is below `cutoff`, and renormalizes the
/// survivors. If nothing clears the cutoff, the top-ranked genome (first
/// among equals) is kept alone.
DecayResult decay_ratios(std::span<const double> ratios, std::span<const double> ranks,
                         double decay_ratio, double cutoff, double birth_scale = 1.0);

/// floor(ratio * C) per genome. The total never exceeds C.
std::vector<std::size_t> allocate_offspring(std::span<const double> ratios, std::size_t offspring_count);

template <class Params>
PopulationState<Params> apply_decay(PopulationState<Params> state, std::span<const double> ranks,
                                    double decay_ratio, double cutoff) {
  const auto res = decay_ratios(state.ratios(), ranks, decay_ratio, cutoff, state.birth_scale);
  std::vector<GenomeRecord<Params>> kept;
  kept.reserve(res.survivors.size());
  for (std::size_t k = 0; k < res.survivors.size(); ++k) {
    kept.push_back(std::move(state.genomes[res.survivors[k]]));
    kept.back().population = res.ratios[k];
  }
  state.genomes = std::move(kept);
  state.birth_scale = 1.0;
  return state;
}

template <class Params>
std::vector<std::size_t> allocate_offspring(const PopulationState<Params>& state,
                                            std::size_t offspring_count) {
  return allocate_offspring(state.ratios(), offspring_count);
}

// ---------------------------------------------------------------------------
// Worlds

/// What the engine needs from a world. Fitness and mutation must be safe to
/// call concurrently on a const world; begin_generation runs alone between
/// generations and bumps epoch() whenever cached fitness becomes stale.
template <class W>
concept World = requires(W w, const W cw, const typename W::Params& p, Stream& rng,
                         std::uint64_t generation, const PopulationState<typename W::Params>& state,
                         std::span<const double> fitness) {
  typename W::Params;
  { cw.kind() } -> std::convertible_to<std::string_view>;
  { cw.fitness(p) } -> std::convertible_to<double>;
  { cw.mutate(p, rng) } -> std::same_as<typename W::Params>;
  { w.begin_generation(generation, rng) };
  { cw.epoch() } -> std::convertible_to<std::uint64_t>;
  { cw.metric_columns() } -> std::convertible_to<std::vector<std::string>>;
  { cw.metric_values(state, fitness) } -> std::convertible_to<std::vector<double>>;
};

template <class Params>
struct StepResult {
  PopulationState<Params> state;
  MetricsRow row;
  std::size_t offspring_total = 0;
  /// Smallest survivor share on the scale the cutoff was applied to; 1 under
  /// single_genome.
  double min_cull_share = 1.0;
  std::optional<std::uint64_t> guarded_id;  // set when the collapse guard fired
};

namespace detail {

template <World W>
void evaluate(PopulationState<typename W::Params>& state, const W& world, std::size_t threads) {
  const std::uint64_t epoch = world.epoch();
  auto& genomes = state.genomes;
  parallel_for(genomes.size(), threads, [&](std::size_t i) {
    auto& g = genomes[i];
    if (g.fitness_epoch == epoch) return;
    g.fitness = world.fitness(g.params);
    g.fitness_epoch = epoch;
  });
  for (const auto& g : genomes) {
    if (std::isnan(g.fitness) || g.fitness == std::numeric_limits<double>::infinity())
      throw RunError("fitness evaluation of genome " + std::to_string(g.id) + " at generation " +
                     std::to_string(state.generation) + " returned a non-finite value");
  }
}

inline std::size_t argmax_first(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace detail

/// One generation: world hook, evaluation, selection under the configured
/// strategy, reproduction, renormalization.
///
/// Selection order is decay -> renormalize -> cull -> renormalize ->
/// reproduce -> renormalize. Newborns enter at 1/C before the final
/// renormalization and are first evaluated in the next generation. All
/// randomness comes from streams keyed by (master_seed, generation, id), so
/// the result does not depend on evaluation_threads.
template <World W>
StepResult<typename W::Params> step_generation(PopulationState<typename W::Params> state, W& world,
                                               const EngineConfig& config) {
  using Params = typename W::Params;
  if (state.genomes.empty()) throw RunError("step_generation: population is empty");
  const std::uint64_t gen = state.generation;
  const std::uint64_t seed = config.master_seed;

  {
    Stream hook(seed, gen, stream_tag::kWorldHook);
    world.begin_generation(gen, hook);
  }
  detail::evaluate(state, world, config.evaluation_threads);

  std::vector<double> fitness(state.genomes.size());
  std::vector<double> ratios(state.genomes.size());
  for (std::size_t i = 0; i < state.genomes.size(); ++i) {
    fitness[i] = state.genomes[i].fitness;
    ratios[i] = state.genomes[i].population;
  }

  StepResult<Params> out;
  MetricsRow& row = out.row;
  row.generation = gen;
  row.strategy = std::string(to_string(config.strategy));
  row.seed = seed;
  row.num_genomes = state.genomes.size();
  row.weighted_mean_fitness = weighted_mean(fitness, ratios);
  row.max_fitness = *std::max_element(fitness.begin(), fitness.end());
  row.lineage_entropy = lineage_entropy(ratios);
  row.extra = world.metric_values(state, fitness);

  // Selection.
  switch (config.strategy) {
    case Strategy::single_genome: {
      const std::size_t best = detail::argmax_first(fitness);
      auto keep = std::move(state.genomes[best]);
      keep.population = 1.0;
      state.genomes.clear();
      state.genomes.push_back(std::move(keep));
      state.birth_scale = 1.0;
      break;
    }
    case Strategy::population_based:
    case Strategy::random_drift: {
      std::vector<double> ranks;
      if (config.strategy == Strategy::random_drift) {
        ranks.assign(fitness.size(), 1.0);
      } else if (config.tie_break == TieBreak::lottery) {
        std::vector<std::uint64_t> keys(fitness.size());
        for (std::size_t i = 0; i < keys.size(); ++i)
          keys[i] = derive_key({seed, gen, state.genomes[i].id, stream_tag::kTieBreak});
        ranks = rank_fitness_keyed(fitness, keys);
      } else {
        ranks = rank_fitness(fitness);
      }
      const auto res = decay_ratios(ratios, ranks, config.decay_ratio, config.cutoff(), state.birth_scale);
      if (res.guard_applied) out.guarded_id = state.genomes[res.survivors.front()].id;
      out.min_cull_share = res.min_cull_share;
      std::vector<GenomeRecord<Params>> kept;
      kept.reserve(res.survivors.size());
      for (std::size_t k = 0; k < res.survivors.size(); ++k) {
        kept.push_back(std::move(state.genomes[res.survivors[k]]));
        kept.back().population = res.ratios[k];
      }
      state.genomes = std::move(kept);
      state.birth_scale = 1.0;
      break;
    }
  }

  // Reproduction.
  const auto counts = allocate_offspring(state, config.offspring_count);
  std::size_t total = 0;
  for (auto c : counts) total += c;
  out.offspring_total = total;

  const std::size_t n_parents = state.genomes.size();
  std::vector<std::size_t> parent_of;
  parent_of.reserve(total);
  for (std::size_t i = 0; i < n_parents; ++i) parent_of.insert(parent_of.end(), counts[i], i);

  std::vector<GenomeRecord<Params>> children(total);
  const std::uint64_t first_id = state.next_id;
  const double newborn_ratio = 1.0 / static_cast<double>(config.offspring_count);
  parallel_for(total, config.evaluation_threads, [&](std::size_t c) {
    const auto& parent = state.genomes[parent_of[c]];
    auto& child = children[c];
    child.id = first_id + c;
    child.parent_id = parent.id;
    child.birth_generation = gen;
    child.population = newborn_ratio;
    Stream rng(seed, gen, child.id);
    child.params = world.mutate(parent.params, rng);
  });
  state.next_id = first_id + total;

  double mass = 0.0;
  for (const auto& g : state.genomes) mass += g.population;
  mass += newborn_ratio * static_cast<double>(total);
  state.genomes.reserve(n_parents + total);
  for (auto& c : children) state.genomes.push_back(std::move(c));
  for (auto& g : state.genomes) g.population /= mass;
  state.birth_scale = mass;
  state.generation = gen + 1;

  out.state = std::move(state);
  return out;
}

template <class Params>
struct RunResult {
  std::vector<MetricsRow> history;
  PopulationState<Params> final_state;
};

/// Runs config.generations sequential generations from `initial`.
template <World W>
RunResult<typename W::Params> run(const EngineConfig& config, W& world,
                                  PopulationState<typename W::Params> initial) {
  config.validate();
  RunResult<typename W::Params> out;
  out.history.reserve(config.generations);
  for (std::size_t i = 0; i < config.generations; ++i) {
    auto step = step_generation(std::move(initial), world, config);
    out.history.push_back(std::move(step.row));
    initial = std::move(step.state);
  }
  out.final_state = std::move(initial);
  return out;
}

}  // namespace pbml
