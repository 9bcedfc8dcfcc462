#include "pbml/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "pbml/error.hpp"

namespace pbml {

using nlohmann::json;

json Checkpoint::to_json() const {
  json genomes_json = json::array();
  for (const auto& g : genomes) {
    genomes_json.push_back({{"id", g.id},
                            {"parent_id", g.parent_id ? json(*g.parent_id) : json(nullptr)},
                            {"birth_generation", g.birth_generation},
                            {"population", g.population},
                            {"params", g.params}});
  }
  return {{"world_kind", world_kind}, {"strategy", strategy},     {"seed", seed},
          {"generation", generation}, {"next_id", next_id},       {"birth_scale", birth_scale},
          {"world", world},           {"genomes", std::move(genomes_json)}};
}

Checkpoint Checkpoint::from_json(const json& j) {
  try {
    Checkpoint c;
    c.world_kind = j.at("world_kind").get<std::string>();
    c.strategy = j.at("strategy").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.generation = j.at("generation").get<std::uint64_t>();
    c.next_id = j.at("next_id").get<std::uint64_t>();
    c.birth_scale = j.at("birth_scale").get<double>();
    c.world = j.at("world");
    for (const auto& g : j.at("genomes")) {
      Genome out;
      out.id = g.at("id").get<std::uint64_t>();
      if (!g.at("parent_id").is_null()) out.parent_id = g.at("parent_id").get<std::uint64_t>();
      out.birth_generation = g.at("birth_generation").get<std::uint64_t>();
      out.population = g.at("population").get<double>();
      out.params = g.at("params").get<std::vector<double>>();
      c.genomes.push_back(std::move(out));
    }
    if (c.genomes.empty()) throw ConfigError("checkpoint: no genomes");
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

std::string Checkpoint::dump() const { return to_json().dump() + "\n"; }

Checkpoint Checkpoint::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  return from_json(j);
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("checkpoint: cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Checkpoint::save(const std::filesystem::path& path) const { write_file_atomic(path, dump()); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw RunError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw RunError("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw RunError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

json world_state(const NumericWorld&) { return json::object(); }

json world_state(const SquareWorld& w) {
  const auto& land = w.landscape();
  return {{"spacing", land.spacing()}, {"half_width", land.half_width()}, {"values", land.values()}};
}

json world_state(const ReacherWorld& w) { return {{"goal", {w.goal().x, w.goal().y}}}; }

void restore_world_state(NumericWorld&, const json&) {}

void restore_world_state(SquareWorld& w, const json& j) {
  try {
    const auto& land = w.landscape();
    if (j.at("spacing").get<double>() != land.spacing() || j.at("half_width").get<double>() != land.half_width())
      throw ConfigError("checkpoint: landscape geometry differs from the configured world");
    w.landscape().set_values(j.at("values").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint world state: ") + e.what());
  }
}

void restore_world_state(ReacherWorld& w, const json& j) {
  try {
    const auto g = j.at("goal").get<std::vector<double>>();
    if (g.size() != 2) throw ConfigError("checkpoint: goal must have two coordinates");
    w.set_goal({g[0], g[1]});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint world state: ") + e.what());
  }
}

}  // namespace pbml
