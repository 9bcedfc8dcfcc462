#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbml/population.hpp"
#include "pbml/rng.hpp"

namespace pbml {

inline constexpr std::size_t kRadiusBins = 16;

/// Position plus 16 logits; softmax(logits)[k] is the chance a child lands
/// k units away.
struct SquareGenome {
  double x = 0.0;
  double y = 0.0;
  std::array<double, kRadiusBins> logits{};
  friend bool operator==(const SquareGenome&, const SquareGenome&) = default;
};

std::array<double, kRadiusBins> softmax(const std::array<double, kRadiusBins>& logits);

struct Square {
  double cx = 0.0;
  double cy = 0.0;
  double half_width = 0.0;
  double value = 0.0;
};

enum class LandscapeMode { standard, hard };

/// Squares on a triangular lattice inside a square grid. Rows are spaced
/// spacing*sqrt(3)/2 apart and odd rows are shifted by spacing/2, so each
/// interior square has six neighbours at center distance `spacing`. The
/// lattice is anchored so one square sits on the grid center.
class SquareLandscape {
 public:
  static constexpr double kBounds = 256.0;

  /// Geometry only; every value is 0. Throws ConfigError if squares would
  /// overlap or fewer than 7 fit.
  SquareLandscape(double spacing, double half_width);

  /// Value of the square containing (x, y); 0 between squares and outside
  /// the grid.
  double value_at(double x, double y) const;
  /// Index of the square containing (x, y), or -1.
  long square_at(double x, double y) const;

  const std::vector<Square>& squares() const { return squares_; }
  std::vector<Square>& squares() { return squares_; }
  double spacing() const { return spacing_; }
  double half_width() const { return half_width_; }
  /// Square nearest the grid center.
  std::size_t center_square() const { return center_index_; }
  /// Squares whose six lattice neighbours all exist.
  std::vector<std::size_t> interior_squares() const;

  std::vector<double> values() const;
  void set_values(std::span<const double> values);

 private:
  struct Row {
    long j = 0;
    double y = 0.0;
    double x_offset = 0.0;
    long i_min = 0;
    long i_max = -1;
    std::size_t start = 0;
  };
  const Row* row_for(long j) const;

  double spacing_;
  double half_width_;
  double pitch_;
  std::vector<Row> rows_;
  long j_min_ = 0;
  std::vector<Square> squares_;
  std::size_t center_index_ = 0;
};

/// Lattice with square values drawn uniformly from [0.3, 1.0].
SquareLandscape build_lattice(double spacing, double half_width, Stream& rng);

/// Lattice where squares farther than r_outer from the center are 1.0 with
/// probability high_probability and 0.3 otherwise; the rest are 0.3.
SquareLandscape build_hard_landscape(double spacing, double half_width, double r_outer,
                                     double high_probability, Stream& rng);

/// Uniform random permutation of the square values; positions untouched.
void shuffle_values(SquareLandscape& land, Stream& rng);

struct SquareConfig {
  LandscapeMode mode = LandscapeMode::standard;
  double spacing = 9.5;
  double half_width = 1.5;
  std::size_t shuffle_period = 10;  // 0: static landscape
  double logit_sigma = 0.3;
  double r_outer = 80.0;
  double high_probability = 0.1;

  void validate() const;
};

class SquareWorld {
 public:
  using Params = SquareGenome;

  SquareWorld(SquareConfig config, std::uint64_t seed);

  std::string_view kind() const { return config_.mode == LandscapeMode::hard ? "hard_squares" : "squares"; }

  double fitness(const SquareGenome& g) const { return land_.value_at(g.x, g.y); }

  /// Radius index k ~ softmax(logits), direction uniform on [0, 2pi); the
  /// child moves k units that way and each logit gets N(0, logit_sigma)
  /// noise.
  SquareGenome mutate(const SquareGenome& g, Stream& rng) const;

  /// Shuffles square values whenever generation % shuffle_period == 0.
  void begin_generation(std::uint64_t generation, Stream& rng);
  std::uint64_t epoch() const { return epoch_; }

  /// One genome on the center square with uniform logits.
  PopulationState<SquareGenome> initial_population() const;

  std::vector<std::string> metric_columns() const;
  std::vector<double> metric_values(const PopulationState<SquareGenome>& state,
                                    std::span<const double> fitness) const;

  const SquareConfig& config() const { return config_; }
  const SquareLandscape& landscape() const { return land_; }
  SquareLandscape& landscape() { return land_; }

  static std::vector<double> encode(const SquareGenome& g);
  static SquareGenome decode(std::span<const double> v);

 private:
  SquareConfig config_;
  SquareLandscape land_;
  std::uint64_t epoch_ = 0;
};

}  // namespace pbml
