#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pbml/checkpoint.hpp"
#include "pbml/config.hpp"
#include "pbml/metrics.hpp"

namespace pbml {

/// Seed used for everything after a transfer (target world, held-out goal,
/// engine streams), so the evaluation goal differs from every training goal.
std::uint64_t transfer_seed(std::uint64_t seed);

struct SeedRun {
  std::uint64_t seed = 0;
  MetricsTable metrics;
  Checkpoint final_state;
};

/// Builds the configured world for `seed` and evolves it from the world's
/// initial population. Nothing is written to disk.
SeedRun run_seed(const RunConfig& cfg, std::uint64_t seed);

struct ExperimentFiles {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> metrics;
  std::vector<std::filesystem::path> checkpoints;
};

/// Runs every seed (shifted by seed_offset) and writes metrics_seed<S>.csv,
/// checkpoint_seed<S>.json and resolved_config.json.
ExperimentFiles run_experiment(const RunConfig& cfg, std::uint64_t seed_offset = 0);

struct TransferRun {
  MetricsTable metrics;
  Checkpoint final_state;
  /// Fitness of the loaded population in the target world before any
  /// evolution, in checkpoint order.
  std::vector<double> initial_fitness;
};

/// Loads `source` into the target world described by `target` and evolves it
/// for `generations` under the checkpoint's strategy. Compatible kinds:
/// squares/hard_squares -> squares/hard_squares, reacher -> reacher,
/// numeric -> numeric.
TransferRun transfer_population(const Checkpoint& source, const RunConfig& target, std::size_t generations);

/// File-level transfer: writes transfer_seed<S>.csv,
/// transfer_checkpoint_seed<S>.json and resolved_config.json into the
/// target's output directory.
ExperimentFiles transfer(const std::filesystem::path& checkpoint, const RunConfig& target, std::size_t generations);

struct SummaryRow {
  std::string method;
  std::size_t runs = 0;
  double top_fitness = 0.0;
  double top_fitness_std = 0.0;
  double average_fitness = 0.0;
  double average_fitness_std = 0.0;
  std::optional<double> spearman_mean_R;  // numeric world
  std::optional<double> polyfit_gain;     // of weighted mean fitness
  std::optional<double> ring_mass;        // squares: final p0 + p9 + p10
};

/// One row per run directory, aggregated over the seeds found in it.
/// Transfer CSVs are used when a directory holds any, metrics CSVs
/// otherwise. The method name is the label in resolved_config.json, or the
/// directory name.
std::vector<SummaryRow> summarize(const std::vector<std::filesystem::path>& dirs);
SummaryRow summarize_tables(const std::string& method, const std::vector<MetricsTable>& tables);
std::string summary_csv(const std::vector<SummaryRow>& rows);
void report(const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out);

}  // namespace pbml
