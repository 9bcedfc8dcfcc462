#include "pbml/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "pbml/error.hpp"

namespace pbml {

using nlohmann::json;

std::string_view to_string(WorldKind k) {
  switch (k) {
    case WorldKind::numeric: return "numeric";
    case WorldKind::squares: return "squares";
    case WorldKind::hard_squares: return "hard_squares";
    case WorldKind::reacher: return "reacher";
  }
  return "unknown";
}

WorldKind parse_world_kind(std::string_view name) {
  if (name == "numeric") return WorldKind::numeric;
  if (name == "squares") return WorldKind::squares;
  if (name == "hard_squares") return WorldKind::hard_squares;
  if (name == "reacher") return WorldKind::reacher;
  throw ConfigError("world.kind: unknown world '" + std::string(name) +
                    "' (expected numeric, squares, hard_squares or reacher)");
}

namespace {

/// Typed field access with dotted-path diagnostics.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(name("") + "must be an object");
  }

  void allow(std::initializer_list<const char*> keys) {
    std::set<std::string> known(keys.begin(), keys.end());
    for (const auto& [k, v] : obj_.items())
      if (!known.count(k)) throw ConfigError(name(k) + ": unknown key");
  }

  bool has(const char* key) const { return obj_.contains(key); }
  const json& raw(const char* key) const { return obj_.at(key); }

  template <class T>
  void read(const char* key, T& out) const {
    if (!obj_.contains(key)) return;
    const auto& v = obj_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(name(key) + ": expected a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw ConfigError(name(key) + ": expected a non-negative integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(name(key) + ": expected a number");
    } else {
      if (!v.is_string()) throw ConfigError(name(key) + ": expected a string");
    }
    out = v.get<T>();
  }

  std::string name(const std::string& key) const {
    if (path_.empty()) return key;
    return key.empty() ? path_ + " " : path_ + "." + key;
  }

 private:
  const json& obj_;
  std::string path_;
};

template <class Fn>
void with_field(const std::string& field, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.rfind(field, 0) == 0) throw;
    throw ConfigError(field + "." + msg);
  }
}

}  // namespace

RunConfig parse_config_json(const json& j) {
  RunConfig cfg;
  Fields top(j, "");
  top.allow({"label", "world", "engine", "seeds", "output_dir", "held_out", "transfer"});
  if (!top.has("world")) throw ConfigError("world: required");

  Fields world(top.raw("world"), "world");
  if (!world.has("kind")) throw ConfigError("world.kind: required");
  std::string kind;
  world.read("kind", kind);
  cfg.world = parse_world_kind(kind);

  switch (cfg.world) {
    case WorldKind::numeric:
      world.allow({"kind"});
      cfg.engine.offspring_count = 1000;
      cfg.engine.generations = 500;
      break;
    case WorldKind::squares:
    case WorldKind::hard_squares: {
      world.allow({"kind", "spacing", "half_width", "shuffle_period", "logit_sigma", "r_outer", "high_probability"});
      auto& s = cfg.squares;
      if (cfg.world == WorldKind::hard_squares) {
        s.mode = LandscapeMode::hard;
        s.shuffle_period = 0;
      }
      world.read("spacing", s.spacing);
      world.read("half_width", s.half_width);
      world.read("shuffle_period", s.shuffle_period);
      world.read("logit_sigma", s.logit_sigma);
      world.read("r_outer", s.r_outer);
      world.read("high_probability", s.high_probability);
      with_field("world", [&] { s.validate(); });
      cfg.engine.offspring_count = 1000;
      cfg.engine.generations = cfg.world == WorldKind::hard_squares ? 200 : 1000;
      break;
    }
    case WorldKind::reacher: {
      world.allow({"kind", "link1", "link2", "damping", "inertia", "dt", "frames", "goal_period", "torque_bound",
                   "hidden", "base_sigma", "meta_sigma", "fixed_goal"});
      auto& r = cfg.reacher;
      world.read("link1", r.link1);
      world.read("link2", r.link2);
      world.read("damping", r.damping);
      world.read("inertia", r.inertia);
      world.read("dt", r.dt);
      world.read("frames", r.frames);
      world.read("goal_period", r.goal_period);
      world.read("torque_bound", r.torque_bound);
      world.read("hidden", r.net.hidden);
      world.read("base_sigma", r.scales.base_sigma);
      world.read("meta_sigma", r.scales.meta_sigma);
      if (world.has("fixed_goal")) {
        const auto& g = world.raw("fixed_goal");
        if (!g.is_array() || g.size() != 2 || !g[0].is_number() || !g[1].is_number())
          throw ConfigError("world.fixed_goal: expected [x, y]");
        r.fixed_goal = Vec2{g[0].get<double>(), g[1].get<double>()};
      }
      with_field("world", [&] { r.validate(); });
      cfg.engine.offspring_count = 200;
      cfg.engine.generations = 1000;
      break;
    }
  }

  if (top.has("engine")) {
    Fields eng(top.raw("engine"), "engine");
    eng.allow({"decay_ratio", "offspring_count", "extinction_cutoff", "strategy", "generations", "tie_break",
               "evaluation_threads"});
    auto& e = cfg.engine;
    eng.read("decay_ratio", e.decay_ratio);
    eng.read("offspring_count", e.offspring_count);
    if (eng.has("extinction_cutoff")) {
      double c = 0.0;
      eng.read("extinction_cutoff", c);
      e.extinction_cutoff = c;
    }
    std::string name;
    if (eng.has("strategy")) {
      eng.read("strategy", name);
      with_field("engine", [&] { e.strategy = parse_strategy(name); });
    }
    if (eng.has("tie_break")) {
      eng.read("tie_break", name);
      with_field("engine", [&] { e.tie_break = parse_tie_break(name); });
    }
    eng.read("generations", e.generations);
    eng.read("evaluation_threads", e.evaluation_threads);
  }
  with_field("engine", [&] { cfg.engine.validate(); });
  if (!cfg.engine.extinction_cutoff) cfg.engine.extinction_cutoff = cfg.engine.cutoff();

  if (top.has("seeds")) {
    const auto& s = top.raw("seeds");
    if (!s.is_array() || s.empty()) throw ConfigError("seeds: expected a non-empty array of integers");
    cfg.seeds.clear();
    std::set<std::uint64_t> seen;
    for (const auto& v : s) {
      if (!v.is_number_unsigned()) throw ConfigError("seeds: expected non-negative integers");
      const auto seed = v.get<std::uint64_t>();
      if (!seen.insert(seed).second) throw ConfigError("seeds: duplicate seed " + std::to_string(seed));
      cfg.seeds.push_back(seed);
    }
  }
  top.read("output_dir", cfg.output_dir);
  if (cfg.output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  top.read("held_out", cfg.held_out);
  top.read("label", cfg.label);
  if (cfg.label.empty()) cfg.label = std::string(to_string(cfg.engine.strategy));

  if (top.has("transfer")) {
    Fields tr(top.raw("transfer"), "transfer");
    tr.allow({"keep_ratios", "reset_positions"});
    tr.read("keep_ratios", cfg.transfer.keep_ratios);
    tr.read("reset_positions", cfg.transfer.reset_positions);
  }
  return cfg;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  return parse_config_json(j);
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json RunConfig::to_json() const {
  json world_json = {{"kind", to_string(world)}};
  if (world == WorldKind::squares || world == WorldKind::hard_squares) {
    world_json.update({{"spacing", squares.spacing},
                       {"half_width", squares.half_width},
                       {"shuffle_period", squares.shuffle_period},
                       {"logit_sigma", squares.logit_sigma},
                       {"r_outer", squares.r_outer},
                       {"high_probability", squares.high_probability}});
  } else if (world == WorldKind::reacher) {
    world_json.update({{"link1", reacher.link1},
                       {"link2", reacher.link2},
                       {"damping", reacher.damping},
                       {"inertia", reacher.inertia},
                       {"dt", reacher.dt},
                       {"frames", reacher.frames},
                       {"goal_period", reacher.goal_period},
                       {"torque_bound", reacher.torque_bound},
                       {"hidden", reacher.net.hidden},
                       {"base_sigma", reacher.scales.base_sigma},
                       {"meta_sigma", reacher.scales.meta_sigma}});
    if (reacher.fixed_goal) world_json["fixed_goal"] = {reacher.fixed_goal->x, reacher.fixed_goal->y};
  }
  return {{"label", label},
          {"world", world_json},
          {"engine",
           {{"decay_ratio", engine.decay_ratio},
            {"offspring_count", engine.offspring_count},
            {"extinction_cutoff", engine.cutoff()},
            {"strategy", to_string(engine.strategy)},
            {"generations", engine.generations},
            {"tie_break", to_string(engine.tie_break)},
            {"evaluation_threads", engine.evaluation_threads}}},
          {"seeds", seeds},
          {"output_dir", output_dir},
          {"held_out", held_out},
          {"transfer", {{"keep_ratios", transfer.keep_ratios}, {"reset_positions", transfer.reset_positions}}}};
}

std::filesystem::path resolve_output_dir(const std::string& output_dir) {
  std::filesystem::path p(output_dir);
  if (p.is_absolute()) return p;
  if (const char* root = std::getenv("PBML_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / p;
  return p;
}

}  // namespace pbml
