#include "pbml/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <sstream>

#include "pbml/engine.hpp"
#include "pbml/error.hpp"

namespace pbml {

namespace fs = std::filesystem;

std::uint64_t transfer_seed(std::uint64_t seed) { return derive_key({seed, stream_tag::kTransfer}); }

namespace {

/// Calls fn(world, initial_population) with the world the config describes.
template <class Fn>
decltype(auto) with_world(const RunConfig& cfg, std::uint64_t world_seed, Fn&& fn) {
  switch (cfg.world) {
    case WorldKind::numeric: {
      NumericWorld w;
      return fn(w, NumericWorld::initial_population());
    }
    case WorldKind::squares:
    case WorldKind::hard_squares: {
      SquareWorld w(cfg.squares, world_seed);
      auto init = w.initial_population();
      return fn(w, std::move(init));
    }
    case WorldKind::reacher: {
      ReacherWorld w(cfg.reacher, world_seed);
      auto init = w.initial_population(world_seed);
      return fn(w, std::move(init));
    }
  }
  throw ConfigError("unknown world kind");
}

template <World W>
MetricsTable to_table(const W& world, std::vector<MetricsRow> rows) {
  MetricsTable t(world.metric_columns());
  for (auto& r : rows) t.add(std::move(r));
  return t;
}

bool kinds_compatible(const std::string& from, WorldKind to) {
  const bool from_sq = from == "squares" || from == "hard_squares";
  const bool to_sq = to == WorldKind::squares || to == WorldKind::hard_squares;
  if (from_sq || to_sq) return from_sq && to_sq;
  return from == to_string(to);
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RunError("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

SeedRun run_seed(const RunConfig& cfg, std::uint64_t seed) {
  const std::uint64_t effective = cfg.held_out ? transfer_seed(seed) : seed;
  EngineConfig engine = cfg.engine;
  engine.master_seed = effective;
  return with_world(cfg, effective, [&](auto& world, auto initial) {
    auto result = run(engine, world, std::move(initial));
    SeedRun out;
    out.seed = seed;
    out.metrics = to_table(world, std::move(result.history));
    out.final_state = make_checkpoint(result.final_state, world, engine.strategy, seed);
    return out;
  });
}

ExperimentFiles run_experiment(const RunConfig& cfg, std::uint64_t seed_offset) {
  ExperimentFiles files;
  files.dir = resolve_output_dir(cfg.output_dir);
  prepare_dir(files.dir);
  RunConfig resolved = cfg;
  for (auto& s : resolved.seeds) s += seed_offset;
  write_file_atomic(files.dir / "resolved_config.json", resolved.to_json().dump(2) + "\n");
  for (const auto seed : resolved.seeds) {
    const auto run = run_seed(resolved, seed);
    const auto metrics = files.dir / ("metrics_seed" + std::to_string(seed) + ".csv");
    const auto ckpt = files.dir / ("checkpoint_seed" + std::to_string(seed) + ".json");
    write_file_atomic(metrics, run.metrics.to_csv());
    run.final_state.save(ckpt);
    files.metrics.push_back(metrics);
    files.checkpoints.push_back(ckpt);
  }
  return files;
}

TransferRun transfer_population(const Checkpoint& source, const RunConfig& target, std::size_t generations) {
  if (!kinds_compatible(source.world_kind, target.world))
    throw ConfigError("transfer: checkpoint world '" + source.world_kind + "' cannot be transferred to '" +
                      std::string(to_string(target.world)) + "'");
  EngineConfig engine = target.engine;
  engine.strategy = parse_strategy(source.strategy);
  engine.generations = generations;
  const std::uint64_t seed = transfer_seed(source.seed);
  engine.master_seed = seed;

  return with_world(target, seed, [&](auto& world, auto) {
    auto state = restore_population(source, world);
    const double total = state.total_population();
    if (!(total > 0.0)) throw ConfigError("transfer: checkpoint population has no mass");
    for (auto& g : state.genomes)
      g.population = target.transfer.keep_ratios ? g.population / total
                                                 : 1.0 / static_cast<double>(state.genomes.size());
    if (!target.transfer.keep_ratios) state.birth_scale = 1.0;
    state.generation = 0;

    using Params = typename std::decay_t<decltype(world)>::Params;
    if constexpr (std::is_same_v<Params, SquareGenome>) {
      if (target.transfer.reset_positions) {
        const auto& c = world.landscape().squares()[world.landscape().center_square()];
        for (auto& g : state.genomes) {
          g.params.x = c.cx;
          g.params.y = c.cy;
        }
      }
    }

    TransferRun out;
    out.initial_fitness.reserve(state.genomes.size());
    for (const auto& g : state.genomes) out.initial_fitness.push_back(world.fitness(g.params));
    auto result = run(engine, world, std::move(state));
    out.metrics = to_table(world, std::move(result.history));
    out.final_state = make_checkpoint(result.final_state, world, engine.strategy, source.seed);
    return out;
  });
}

ExperimentFiles transfer(const fs::path& checkpoint, const RunConfig& target, std::size_t generations) {
  const auto source = Checkpoint::load(checkpoint);
  ExperimentFiles files;
  files.dir = resolve_output_dir(target.output_dir);
  prepare_dir(files.dir);
  auto resolved = target.to_json();
  resolved["engine"]["strategy"] = source.strategy;
  resolved["engine"]["generations"] = generations;
  resolved["source_checkpoint"] = checkpoint.string();
  write_file_atomic(files.dir / "resolved_config.json", resolved.dump(2) + "\n");

  const auto run = transfer_population(source, target, generations);
  const auto metrics = files.dir / ("transfer_seed" + std::to_string(source.seed) + ".csv");
  const auto ckpt = files.dir / ("transfer_checkpoint_seed" + std::to_string(source.seed) + ".json");
  write_file_atomic(metrics, run.metrics.to_csv());
  run.final_state.save(ckpt);
  files.metrics.push_back(metrics);
  files.checkpoints.push_back(ckpt);
  return files;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string method_name(const fs::path& dir) {
  const auto cfg_path = dir / "resolved_config.json";
  if (std::ifstream in(cfg_path); in) {
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.contains("label") && j["label"].is_string() && !j["label"].get<std::string>().empty())
        return j["label"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
    }
  }
  return dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
}

}  // namespace

SummaryRow summarize_tables(const std::string& method, const std::vector<MetricsTable>& tables) {
  if (tables.empty()) throw ConfigError("report: no metrics for " + method);
  SummaryRow row;
  row.method = method;
  row.runs = tables.size();
  std::vector<double> tops, avgs, rhos, gains, rings;
  for (const auto& t : tables) {
    if (t.rows().empty()) throw ConfigError("report: empty metrics table for " + method);
    const auto& last = t.rows().back();
    tops.push_back(last.max_fitness);
    avgs.push_back(last.weighted_mean_fitness);
    const auto gen = t.column("generation");
    if (t.has_column("weighted_mean_R") && gen.size() >= 3) rhos.push_back(spearman(gen, t.column("weighted_mean_R")));
    if (gen.size() >= 5) gains.push_back(polyfit_gain(gen, t.column("weighted_mean_fitness")));
    if (t.has_column("p0") && t.has_column("p9") && t.has_column("p10"))
      rings.push_back(t.column("p0").back() + t.column("p9").back() + t.column("p10").back());
  }
  std::tie(row.top_fitness, row.top_fitness_std) = mean_std(tops);
  std::tie(row.average_fitness, row.average_fitness_std) = mean_std(avgs);
  row.spearman_mean_R = mean_of(rhos);
  row.polyfit_gain = mean_of(gains);
  row.ring_mass = mean_of(rings);
  return row;
}

std::vector<SummaryRow> summarize(const std::vector<fs::path>& dirs) {
  if (dirs.empty()) throw ConfigError("report: no run directories given");
  static const std::regex transfer_re(R"(transfer_seed\d+\.csv)");
  static const std::regex metrics_re(R"(metrics_seed\d+\.csv)");
  std::vector<SummaryRow> rows;
  for (const auto& dir : dirs) {
    if (!fs::is_directory(dir)) throw ConfigError("report: not a directory: " + dir.string());
    std::vector<fs::path> transfers, metrics;
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (std::regex_match(name, transfer_re)) transfers.push_back(e.path());
      else if (std::regex_match(name, metrics_re)) metrics.push_back(e.path());
    }
    auto& chosen = transfers.empty() ? metrics : transfers;
    if (chosen.empty()) throw ConfigError("report: no metrics CSVs in " + dir.string());
    std::sort(chosen.begin(), chosen.end());
    std::vector<MetricsTable> tables;
    for (const auto& p : chosen) tables.push_back(MetricsTable::read_csv(p.string()));
    rows.push_back(summarize_tables(method_name(dir), tables));
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "method,runs,top_fitness,top_fitness_std,average_fitness,average_fitness_std,spearman_mean_R,"
        "polyfit_gain,ring_mass\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    os << r.method << ',' << r.runs << ',' << format_double(r.top_fitness) << ',' << format_double(r.top_fitness_std)
       << ',' << format_double(r.average_fitness) << ',' << format_double(r.average_fitness_std) << ','
       << opt(r.spearman_mean_R) << ',' << opt(r.polyfit_gain) << ',' << opt(r.ring_mass) << '\n';
  }
  return os.str();
}

void report(const std::vector<fs::path>& dirs, const fs::path& out) {
  const auto rows = summarize(dirs);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_file_atomic(out, summary_csv(rows));
}

}  // namespace pbml
