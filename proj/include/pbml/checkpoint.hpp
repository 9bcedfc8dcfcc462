#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbml/engine.hpp"
#include "pbml/numeric_world.hpp"
#include "pbml/reacher_world.hpp"
#include "pbml/square_world.hpp"

namespace pbml {

/// World-agnostic snapshot of a population at a generation boundary.
///
/// JSON layout: {world_kind, strategy, seed, generation, next_id,
/// birth_scale, world, genomes: [{id, parent_id, birth_generation,
/// population, params}]}. `params` is the world's flat encoding; `world`
/// holds whatever the world needs to be reproduced exactly (square values,
/// current goal).
struct Checkpoint {
  struct Genome {
    std::uint64_t id = 0;
    std::optional<std::uint64_t> parent_id;
    std::uint64_t birth_generation = 0;
    double population = 0.0;
    std::vector<double> params;
  };

  std::string world_kind;
  std::string strategy;
  std::uint64_t seed = 0;
  std::uint64_t generation = 0;
  std::uint64_t next_id = 0;
  double birth_scale = 1.0;
  nlohmann::json world = nlohmann::json::object();
  std::vector<Genome> genomes;

  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
  std::string dump() const;
  static Checkpoint parse(const std::string& text);
  static Checkpoint load(const std::filesystem::path& path);
  /// Writes to a sibling temporary file and renames it into place.
  void save(const std::filesystem::path& path) const;
};

/// Writes `content` next to `path` and renames it over `path`, so readers
/// never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

nlohmann::json world_state(const NumericWorld& w);
nlohmann::json world_state(const SquareWorld& w);
nlohmann::json world_state(const ReacherWorld& w);

/// Restores landscape values / goal saved by world_state.
void restore_world_state(NumericWorld& w, const nlohmann::json& j);
void restore_world_state(SquareWorld& w, const nlohmann::json& j);
void restore_world_state(ReacherWorld& w, const nlohmann::json& j);

template <World W>
Checkpoint make_checkpoint(const PopulationState<typename W::Params>& state, const W& world,
                           Strategy strategy, std::uint64_t seed) {
  Checkpoint c;
  c.world_kind = std::string(world.kind());
  c.strategy = std::string(to_string(strategy));
  c.seed = seed;
  c.generation = state.generation;
  c.next_id = state.next_id;
  c.birth_scale = state.birth_scale;
  c.world = world_state(world);
  c.genomes.reserve(state.genomes.size());
  for (const auto& g : state.genomes)
    c.genomes.push_back({g.id, g.parent_id, g.birth_generation, g.population, world.encode(g.params)});
  return c;
}

/// Decodes the genomes with `world`'s parameter layout. Fitness caches start
/// empty.
template <World W>
PopulationState<typename W::Params> restore_population(const Checkpoint& c, const W& world) {
  PopulationState<typename W::Params> s;
  s.generation = c.generation;
  s.next_id = c.next_id;
  s.birth_scale = c.birth_scale;
  s.genomes.reserve(c.genomes.size());
  for (const auto& g : c.genomes) {
    GenomeRecord<typename W::Params> r;
    r.params = world.decode(g.params);
    r.population = g.population;
    r.id = g.id;
    r.parent_id = g.parent_id;
    r.birth_generation = g.birth_generation;
    s.genomes.push_back(std::move(r));
  }
  return s;
}

}  // namespace pbml
