#include "pbml/engine.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace pbml {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::population_based: return "population_based";
    case Strategy::single_genome: return "single_genome";
    case Strategy::random_drift: return "random_drift";
  }
  return "unknown";
}

std::string_view to_string(TieBreak t) { return t == TieBreak::average ? "average" : "lottery"; }

Strategy parse_strategy(std::string_view name) {
  if (name == "population_based") return Strategy::population_based;
  if (name == "single_genome") return Strategy::single_genome;
  if (name == "random_drift") return Strategy::random_drift;
  throw ConfigError("strategy: unknown value '" + std::string(name) +
                    "' (expected population_based, single_genome or random_drift)");
}

TieBreak parse_tie_break(std::string_view name) {
  if (name == "average") return TieBreak::average;
  if (name == "lottery") return TieBreak::lottery;
  throw ConfigError("tie_break: unknown value '" + std::string(name) + "' (expected average or lottery)");
}

void EngineConfig::validate() const {
  if (!(decay_ratio >= 0.0 && decay_ratio < 1.0))
    throw ConfigError("decay_ratio: must be in [0, 1), got " + format_double(decay_ratio));
  if (offspring_count < 1) throw ConfigError("offspring_count: must be at least 1");
  const double c = cutoff();
  if (!(c > 0.0 && c < 1.0))
    throw ConfigError("extinction_cutoff: must be in (0, 1), got " + format_double(c));
  if (evaluation_threads < 1) throw ConfigError("evaluation_threads: must be at least 1");
}

namespace {

void check_fitness(std::span<const double> fitness) {
  if (fitness.empty()) throw RunError("rank_fitness: empty fitness list");
  for (std::size_t i = 0; i < fitness.size(); ++i) {
    if (std::isnan(fitness[i]) || fitness[i] == std::numeric_limits<double>::infinity())
      throw RunError("rank_fitness: non-finite fitness at index " + std::to_string(i) +
                     "; the world's fitness function is broken");
  }
}

}  // namespace

std::vector<double> rank_fitness(std::span<const double> fitness) {
  check_fitness(fitness);
  return average_ranks(fitness);
}

std::vector<double> rank_fitness_keyed(std::span<const double> fitness,
                                       std::span<const std::uint64_t> keys) {
  check_fitness(fitness);
  if (keys.size() != fitness.size()) throw std::invalid_argument("rank_fitness_keyed: keys misaligned");
  const std::size_t n = fitness.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fitness[a] != fitness[b]) return fitness[a] < fitness[b];
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    return a < b;
  });
  std::vector<double> ranks(n);
  for (std::size_t pos = 0; pos < n; ++pos)
    ranks[order[pos]] = static_cast<double>(pos + 1) / static_cast<double>(n);
  return ranks;
}

DecayResult decay_ratios(std::span<const double> ratios, std::span<const double> ranks,
                         double decay_ratio, double cutoff, double birth_scale) {
  if (ratios.size() != ranks.size()) throw std::invalid_argument("decay_ratios: ranks misaligned");
  if (ratios.empty()) throw std::invalid_argument("decay_ratios: empty population");
  const std::size_t n = ratios.size();
  const std::size_t top = static_cast<std::size_t>(std::max_element(ranks.begin(), ranks.end()) - ranks.begin());

  std::vector<double> decayed(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    decayed[i] = ratios[i] * (1.0 - decay_ratio) * ranks[i];
    total += decayed[i];
  }

  DecayResult out;
  if (!(total > 0.0)) {
    out.survivors = {top};
    out.ratios = {1.0};
    out.min_cull_share = 0.0;
    out.guard_applied = true;
    return out;
  }
  // Relative slack so a genome sitting exactly on the cutoff survives
  // rounding in the renormalization.
  const double threshold = cutoff * (1.0 - 1e-9);
  double kept_mass = 0.0;
  out.min_cull_share = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double scaled = decayed[i] / total * birth_scale;
    if (scaled >= threshold) {
      out.survivors.push_back(i);
      kept_mass += decayed[i];
      out.min_cull_share = std::min(out.min_cull_share, scaled);
    }
  }
  if (!(kept_mass > 0.0)) {
    out.survivors = {top};
    out.ratios = {1.0};
    out.min_cull_share = decayed[top] / total * birth_scale;
    out.guard_applied = true;
    return out;
  }
  out.ratios.reserve(out.survivors.size());
  for (auto i : out.survivors) out.ratios.push_back(decayed[i] / kept_mass);
  return out;
}

std::vector<std::size_t> allocate_offspring(std::span<const double> ratios, std::size_t offspring_count) {
  const double c = static_cast<double>(offspring_count);
  std::vector<std::size_t> counts(ratios.size());
  std::size_t total = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double x = ratios[i] * c;
    // Absorb representation error so 0.6 * 1000 floors to 600.
    const double k = std::floor(x + 1e-9 * std::max(1.0, x));
    counts[i] = k > 0.0 ? static_cast<std::size_t>(k) : 0;
    total += counts[i];
  }
  // Ratios that overshoot 1 by rounding could push the total past C.
  for (std::size_t i = counts.size(); total > offspring_count && i-- > 0;) {
    const std::size_t cut = std::min(counts[i], total - offspring_count);
    counts[i] -= cut;
    total -= cut;
  }
  return counts;
}

}  // namespace pbml
