#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pbml/engine.hpp"
#include "pbml/reacher_world.hpp"
#include "pbml/square_world.hpp"

namespace pbml {

enum class WorldKind { numeric, squares, hard_squares, reacher };

std::string_view to_string(WorldKind k);
WorldKind parse_world_kind(std::string_view name);

struct TransferOptions {
  bool keep_ratios = true;      // false: restart every genome at an equal share
  bool reset_positions = true;  // square worlds: move every genome to the center square
};

/// A fully validated experiment description.
struct RunConfig {
  std::string label;
  WorldKind world = WorldKind::numeric;
  SquareConfig squares;
  ReacherConfig reacher;
  EngineConfig engine;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  /// Run on the transfer stream of each seed (held-out goal / landscape),
  /// as a transfer would; used for from-scratch baselines.
  bool held_out = false;
  TransferOptions transfer;

  /// Resolved configuration with every default filled in.
  nlohmann::json to_json() const;
};

/// Parses and validates a JSON config. Unknown keys, bad types and range
/// violations raise ConfigError naming the field.
RunConfig parse_config_json(const nlohmann::json& j);
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Output directory after applying PBML_OUTPUT_ROOT to relative paths.
std::filesystem::path resolve_output_dir(const std::string& output_dir);

}  // namespace pbml
