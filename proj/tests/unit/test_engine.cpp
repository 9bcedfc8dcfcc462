#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "pbml/engine.hpp"
#include "pbml/numeric_world.hpp"

using namespace pbml;

namespace {

/// Fitness is a small hash of the genome and the current epoch, so ties are
/// common and every generation reshuffles the order.
struct NoisyWorld {
  using Params = std::uint64_t;
  std::uint64_t epoch_ = 0;
  std::string_view kind() const { return "noisy"; }
  double fitness(const Params& p) const { return static_cast<double>(mix64(p ^ epoch_) % 7); }
  Params mutate(const Params&, Stream& rng) const { return rng.next_u64(); }
  void begin_generation(std::uint64_t, Stream&) { ++epoch_; }
  std::uint64_t epoch() const { return epoch_; }
  std::vector<std::string> metric_columns() const { return {}; }
  std::vector<double> metric_values(const PopulationState<Params>&, std::span<const double>) const { return {}; }
};

/// Oracle: (position + 1) / n in an ascending sort, ties averaged by brute
/// force over all equal positions.
std::vector<double> brute_force_ranks(const std::vector<double>& f) {
  std::vector<double> sorted = f;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  for (double v : f) {
    double pos_sum = 0.0;
    int count = 0;
    for (std::size_t p = 0; p < sorted.size(); ++p)
      if (sorted[p] == v) {
        pos_sum += static_cast<double>(p + 1);
        ++count;
      }
    out.push_back(pos_sum / count / static_cast<double>(f.size()));
  }
  return out;
}

}  // namespace

TEST_CASE("rank_fitness matches a brute-force sort") {
  const std::vector<double> f{5.0, 2.0, 9.0};
  const auto r = rank_fitness(f);
  const auto oracle = brute_force_ranks(f);
  REQUIRE(r.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(r[i] == doctest::Approx(oracle[i]));
  CHECK(r[0] == doctest::Approx(0.667).epsilon(0.001));
  CHECK(r[1] == doctest::Approx(0.333).epsilon(0.001));
  CHECK(r[2] == doctest::Approx(1.0));

  Stream rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> g(1 + rng.uniform_below(30));
    for (auto& v : g) v = static_cast<double>(rng.uniform_below(6));
    const auto got = rank_fitness(g);
    const auto want = brute_force_ranks(g);
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(got[i] == doctest::Approx(want[i]));
  }
}

TEST_CASE("tied fitness shares the mean rank") {
  const std::vector<double> f{3.0, 3.0};
  const auto r = rank_fitness(f);
  CHECK(r[0] == doctest::Approx(0.75));
  CHECK(r[1] == doctest::Approx(0.75));
}

TEST_CASE("rank_fitness rejects NaN and +inf but ranks -inf lowest") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(rank_fitness(std::vector<double>{1.0, nan}), RunError);
  CHECK_THROWS_AS(rank_fitness(std::vector<double>{inf, 1.0}), RunError);
  const auto r = rank_fitness(std::vector<double>{1.0, -inf, 0.5});
  CHECK(r[1] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("keyed ranks break ties by key and keep fitness order") {
  const std::vector<double> f{2.0, 1.0, 2.0, 2.0};
  const std::vector<std::uint64_t> keys{30, 99, 10, 20};
  const auto r = rank_fitness_keyed(f, keys);
  CHECK(r[1] == doctest::Approx(0.25));
  CHECK(r[2] == doctest::Approx(0.5));
  CHECK(r[3] == doctest::Approx(0.75));
  CHECK(r[0] == doctest::Approx(1.0));
  // Sum of ranks is the same as with averaged ties.
  const auto avg = rank_fitness(f);
  CHECK(std::accumulate(r.begin(), r.end(), 0.0) == doctest::Approx(std::accumulate(avg.begin(), avg.end(), 0.0)));
}

TEST_CASE("decay follows the hand-evaluated selection step") {
  const std::vector<double> pops{0.5, 0.5}, ranks{1.0, 0.5};
  // Decayed: 0.5 * 0.75 * 1.0 = 0.375 and 0.5 * 0.75 * 0.5 = 0.1875.
  const double a = 0.375, b = 0.1875;
  const auto res = decay_ratios(pops, ranks, 0.25, 0.001);
  REQUIRE(res.survivors.size() == 2);
  CHECK(res.ratios[0] == doctest::Approx(a / (a + b)));
  CHECK(res.ratios[1] == doctest::Approx(b / (a + b)));
  CHECK(res.ratios[0] == doctest::Approx(0.667).epsilon(0.001));
  CHECK_FALSE(res.guard_applied);
}

TEST_CASE("equal ranks leave relative ratios unchanged") {
  const std::vector<double> pops{0.5, 0.5}, ranks{1.0, 1.0};
  const auto res = decay_ratios(pops, ranks, 0.25, 0.001);
  CHECK(res.ratios[0] == doctest::Approx(0.5));
  CHECK(res.ratios[1] == doctest::Approx(0.5));
}

TEST_CASE("decay removes genomes below the cutoff and renormalizes") {
  const std::vector<double> pops{0.9, 0.0995, 0.0005}, ranks{1.0, 2.0 / 3.0, 1.0 / 3.0};
  const auto res = decay_ratios(pops, ranks, 0.25, 0.001);
  CHECK(res.survivors == std::vector<std::size_t>{0, 1});
  CHECK(res.min_cull_share == doctest::Approx(0.0995 * (2.0 / 3.0) / (0.9 + 0.0995 * 2.0 / 3.0 + 0.0005 / 3.0)));
  CHECK(res.ratios[0] + res.ratios[1] == doctest::Approx(1.0));
  for (double r : res.ratios) CHECK(r >= 0.001);
}

TEST_CASE("a full collapse keeps the top-ranked genome alone") {
  const std::vector<double> pops{0.5, 0.5}, ranks{1.0, 0.5};
  const auto res = decay_ratios(pops, ranks, 0.25, 0.9);
  REQUIRE(res.survivors.size() == 1);
  CHECK(res.survivors[0] == 0);
  CHECK(res.ratios[0] == doctest::Approx(1.0));
  CHECK(res.guard_applied);
}

TEST_CASE("a genome below the cutoff is removed and the rest renormalized") {
  const auto res = decay_ratios(std::vector<double>{0.9995, 0.0005}, std::vector<double>{1.0, 0.5}, 0.25, 0.001);
  CHECK(res.survivors == std::vector<std::size_t>{0});
  CHECK(res.ratios[0] == doctest::Approx(1.0));
  CHECK_FALSE(res.guard_applied);
}

TEST_CASE("newborns sit exactly on the cutoff on the pre-birth scale") {
  // Parent at 0.5 after two newborns of 1/C = 0.25 each: total mass 1.5.
  const double scale = 1.5;
  const std::vector<double> pops{1.0 / scale, 0.25 / scale, 0.25 / scale}, ranks{1.0, 1.0, 1.0};
  const auto res = decay_ratios(pops, ranks, 0.25, 0.25, scale);
  CHECK(res.survivors.size() == 3);
}

TEST_CASE("offspring allocation floors ratio times C") {
  const auto counts = allocate_offspring(std::vector<double>{0.5005, 0.4995}, 1000);
  CHECK(counts == std::vector<std::size_t>{500, 499});
  CHECK(allocate_offspring(std::vector<double>{0.6, 0.4}, 1000) == std::vector<std::size_t>{600, 400});
  CHECK(allocate_offspring(std::vector<double>{1.0}, 10) == std::vector<std::size_t>{10});
  Stream rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> r(1 + rng.uniform_below(50));
    for (auto& v : r) v = rng.uniform();
    const double s = std::accumulate(r.begin(), r.end(), 0.0);
    for (auto& v : r) v /= s;
    const auto c = allocate_offspring(r, 1000);
    REQUIRE(std::accumulate(c.begin(), c.end(), std::size_t{0}) <= 1000);
  }
}

TEST_CASE("engine config validation names the field") {
  EngineConfig cfg;
  cfg.decay_ratio = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("decay_ratio"), ConfigError);
  cfg = EngineConfig{};
  cfg.offspring_count = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = EngineConfig{};
  CHECK(cfg.cutoff() == doctest::Approx(0.001));
}

TEST_CASE("every generation keeps ratios normalized, above the cutoff and within C") {
  for (auto strategy : {Strategy::population_based, Strategy::random_drift, Strategy::single_genome}) {
    for (auto tie : {TieBreak::lottery, TieBreak::average}) {
      EngineConfig cfg;
      cfg.offspring_count = 100;
      cfg.strategy = strategy;
      cfg.tie_break = tie;
      cfg.master_seed = 17;
      NoisyWorld world;
      auto state = singleton_population<std::uint64_t>(1);
      for (int g = 0; g < 60; ++g) {
        auto step = step_generation(std::move(state), world, cfg);
        state = std::move(step.state);
        REQUIRE(step.offspring_total <= cfg.offspring_count);
        REQUIRE(state.total_population() == doctest::Approx(1.0).epsilon(1e-9));
        REQUIRE_FALSE(step.guarded_id.has_value());
        REQUIRE(step.min_cull_share >= cfg.cutoff() * (1.0 - 1e-9));
        for (std::size_t i = 0; i < state.genomes.size(); ++i)
          if (state.genomes[i].birth_generation == static_cast<std::uint64_t>(g) && state.genomes[i].parent_id)
            REQUIRE(state.cull_ratio(i) == doctest::Approx(1.0 / 100.0));
      }
    }
  }
}

TEST_CASE("single_genome keeps only the fittest genome") {
  EngineConfig cfg;
  cfg.offspring_count = 10;
  cfg.strategy = Strategy::single_genome;
  NumericWorld world;
  PopulationState<NumericGenome> state;
  for (int i = 0; i < 3; ++i) {
    GenomeRecord<NumericGenome> g;
    g.params = {static_cast<double>(i == 1 ? 5 : i), 0.0};
    g.population = 1.0 / 3.0;
    g.id = static_cast<std::uint64_t>(i);
    state.genomes.push_back(g);
  }
  state.next_id = 3;
  auto step = step_generation(state, world, cfg);
  REQUIRE(step.state.genomes.size() == 11);
  CHECK(step.state.genomes[0].id == 1);
  for (std::size_t i = 1; i < step.state.genomes.size(); ++i) CHECK(step.state.genomes[i].parent_id == 1);
  CHECK(step.state.total_population() == doctest::Approx(1.0));
}

TEST_CASE("random drift ignores fitness") {
  EngineConfig cfg;
  cfg.offspring_count = 10;
  cfg.strategy = Strategy::random_drift;
  NumericWorld world;
  PopulationState<NumericGenome> state;
  for (int i = 0; i < 2; ++i) {
    GenomeRecord<NumericGenome> g;
    g.params = {i == 0 ? -100.0 : 100.0, 0.0};
    g.population = 0.5;
    g.id = static_cast<std::uint64_t>(i);
    state.genomes.push_back(g);
  }
  state.next_id = 2;
  auto step = step_generation(state, world, cfg);
  CHECK(step.state.genomes[0].population == doctest::Approx(step.state.genomes[1].population));
}

TEST_CASE("a singleton with C = 3 gains three children") {
  EngineConfig cfg;
  cfg.offspring_count = 3;
  NumericWorld world;
  const auto step = step_generation(NumericWorld::initial_population(), world, cfg);
  CHECK(step.state.genomes.size() == 4);
  CHECK(step.state.total_population() == doctest::Approx(1.0));
  CHECK(step.state.generation == 1);
}

TEST_CASE("zero generations return the initial state") {
  EngineConfig cfg;
  cfg.generations = 0;
  NumericWorld world;
  const auto res = run(cfg, world, NumericWorld::initial_population());
  CHECK(res.history.empty());
  CHECK(res.final_state.genomes.size() == 1);
  CHECK(res.final_state.generation == 0);
}

TEST_CASE("a run emits one row per generation with increasing generation") {
  EngineConfig cfg;
  cfg.generations = 500;
  cfg.master_seed = 3;
  NumericWorld world;
  const auto res = run(cfg, world, NumericWorld::initial_population());
  REQUIRE(res.history.size() == 500);
  for (std::size_t i = 0; i < res.history.size(); ++i) CHECK(res.history[i].generation == i);
  CHECK(res.final_state.generation == 500);
}

TEST_CASE("results do not depend on the number of evaluation threads") {
  EngineConfig cfg;
  cfg.generations = 40;
  cfg.master_seed = 11;
  NumericWorld world;
  cfg.evaluation_threads = 1;
  const auto a = run(cfg, world, NumericWorld::initial_population());
  cfg.evaluation_threads = 4;
  const auto b = run(cfg, world, NumericWorld::initial_population());
  REQUIRE(a.final_state.genomes.size() == b.final_state.genomes.size());
  for (std::size_t i = 0; i < a.final_state.genomes.size(); ++i) {
    CHECK(a.final_state.genomes[i].params == b.final_state.genomes[i].params);
    CHECK(a.final_state.genomes[i].population == b.final_state.genomes[i].population);
  }
}

TEST_CASE("a NaN fitness aborts the generation with the genome id") {
  struct NanWorld : NoisyWorld {
    double fitness(const Params& p) const { return p == 0 ? std::nan("") : 1.0; }
  };
  NanWorld world;
  EngineConfig cfg;
  cfg.offspring_count = 4;
  auto state = singleton_population<std::uint64_t>(0);
  CHECK_THROWS_WITH_AS(step_generation(std::move(state), world, cfg), doctest::Contains("genome 0"), RunError);
}

TEST_CASE("an empty population is rejected") {
  NoisyWorld world;
  EngineConfig cfg;
  CHECK_THROWS_AS(step_generation(PopulationState<std::uint64_t>{}, world, cfg), RunError);
}
