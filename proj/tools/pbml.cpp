#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <functional>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pbml/config.hpp"
#include "pbml/error.hpp"
#include "pbml/harness.hpp"

namespace {

int guarded(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const pbml::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const pbml::RunError& e) {
    std::cerr << "run error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population-based meta learning experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_offset = 0;
  auto* run_cmd = app.add_subcommand("run", "Evolve a population for every configured seed");
  run_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run_cmd->add_option("--seed-offset", seed_offset, "Added to every configured seed");

  std::string checkpoint_path, transfer_config, transfer_out;
  std::size_t generations = 0;
  auto* transfer_cmd = app.add_subcommand("transfer", "Continue a checkpointed population in a new world");
  transfer_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint written by run")->required();
  transfer_cmd->add_option("--config", transfer_config, "Target world config (JSON)")->required();
  transfer_cmd->add_option("--generations", generations, "Generations to evolve after transfer")->required();
  transfer_cmd->add_option("--out", transfer_out, "Output directory (overrides the config's output_dir)");

  std::vector<std::string> dirs;
  std::string out_path;
  auto* report_cmd = app.add_subcommand("report", "Summarize run directories into one CSV");
  report_cmd->add_option("dirs", dirs, "Run directories")->required();
  report_cmd->add_option("--out", out_path, "Summary CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*run_cmd) {
    return guarded([&] {
      const auto cfg = pbml::parse_config(config_path);
      const auto files = pbml::run_experiment(cfg, seed_offset);
      std::cout << "wrote " << files.metrics.size() << " run(s) to " << files.dir.string() << '\n';
    });
  }
  if (*transfer_cmd) {
    return guarded([&] {
      auto cfg = pbml::parse_config(transfer_config);
      if (!transfer_out.empty()) cfg.output_dir = transfer_out;
      const auto files = pbml::transfer(checkpoint_path, cfg, generations);
      std::cout << "wrote " << files.metrics.front().string() << '\n';
    });
  }
  return guarded([&] {
    std::vector<std::filesystem::path> paths(dirs.begin(), dirs.end());
    pbml::report(paths, out_path);
    std::cout << "wrote " << out_path << '\n';
  });
}
