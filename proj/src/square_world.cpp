#include "pbml/square_world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pbml/error.hpp"
#include "pbml/metrics.hpp"

namespace pbml {

std::array<double, kRadiusBins> softmax(const std::array<double, kRadiusBins>& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::array<double, kRadiusBins> p{};
  double sum = 0.0;
  for (std::size_t k = 0; k < kRadiusBins; ++k) {
    p[k] = std::exp(logits[k] - top);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
  return p;
}

SquareLandscape::SquareLandscape(double spacing, double half_width)
    : spacing_(spacing), half_width_(half_width), pitch_(spacing * std::sqrt(3.0) / 2.0) {
  if (!(half_width > 0.0)) throw ConfigError("half_width: must be positive");
  if (!(spacing > 2.0 * half_width)) throw ConfigError("spacing: must exceed 2 * half_width");
  if (!(pitch_ > 2.0 * half_width))
    throw ConfigError("spacing: rows spaced spacing*sqrt(3)/2 apart would overlap squares of half_width " +
                      format_double(half_width));

  const double c = kBounds / 2.0;
  const double lo = half_width, hi = kBounds - half_width;
  const long j_lo = static_cast<long>(std::ceil((lo - c) / pitch_));
  const long j_hi = static_cast<long>(std::floor((hi - c) / pitch_));
  j_min_ = j_lo;
  for (long j = j_lo; j <= j_hi; ++j) {
    Row row;
    row.j = j;
    row.y = c + static_cast<double>(j) * pitch_;
    row.x_offset = (j % 2 != 0) ? spacing / 2.0 : 0.0;
    row.i_min = static_cast<long>(std::ceil((lo - c - row.x_offset) / spacing));
    row.i_max = static_cast<long>(std::floor((hi - c - row.x_offset) / spacing));
    row.start = squares_.size();
    for (long i = row.i_min; i <= row.i_max; ++i)
      squares_.push_back({c + row.x_offset + static_cast<double>(i) * spacing, row.y, half_width, 0.0});
    rows_.push_back(row);
  }
  if (squares_.size() < 7)
    throw ConfigError("lattice: only " + std::to_string(squares_.size()) + " squares fit, need at least 7");

  double best = INFINITY;
  for (std::size_t k = 0; k < squares_.size(); ++k) {
    const double d = std::hypot(squares_[k].cx - c, squares_[k].cy - c);
    if (d < best) {
      best = d;
      center_index_ = k;
    }
  }
}

const SquareLandscape::Row* SquareLandscape::row_for(long j) const {
  const long idx = j - j_min_;
  if (idx < 0 || idx >= static_cast<long>(rows_.size())) return nullptr;
  return &rows_[static_cast<std::size_t>(idx)];
}

long SquareLandscape::square_at(double x, double y) const {
  if (!(x >= 0.0 && x <= kBounds && y >= 0.0 && y <= kBounds)) return -1;
  const double c = kBounds / 2.0;
  const long j0 = std::lround((y - c) / pitch_);
  for (long j = j0 - 1; j <= j0 + 1; ++j) {
    const Row* row = row_for(j);
    if (!row || std::abs(y - row->y) > half_width_) continue;
    const long i = std::lround((x - c - row->x_offset) / spacing_);
    if (i < row->i_min || i > row->i_max) continue;
    const std::size_t k = row->start + static_cast<std::size_t>(i - row->i_min);
    if (std::abs(x - squares_[k].cx) <= half_width_) return static_cast<long>(k);
  }
  return -1;
}

double SquareLandscape::value_at(double x, double y) const {
  const long k = square_at(x, y);
  return k < 0 ? 0.0 : squares_[static_cast<std::size_t>(k)].value;
}

std::vector<std::size_t> SquareLandscape::interior_squares() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < squares_.size(); ++k) {
    const auto& s = squares_[k];
    bool all = true;
    for (int n = 0; n < 6 && all; ++n) {
      const double a = std::numbers::pi / 3.0 * n;
      const long hit = square_at(s.cx + spacing_ * std::cos(a), s.cy + spacing_ * std::sin(a));
      all = hit >= 0;
    }
    if (all) out.push_back(k);
  }
  return out;
}

std::vector<double> SquareLandscape::values() const {
  std::vector<double> v;
  v.reserve(squares_.size());
  for (const auto& s : squares_) v.push_back(s.value);
  return v;
}

void SquareLandscape::set_values(std::span<const double> values) {
  if (values.size() != squares_.size())
    throw ConfigError("landscape: expected " + std::to_string(squares_.size()) + " values, got " +
                      std::to_string(values.size()));
  for (std::size_t k = 0; k < squares_.size(); ++k) squares_[k].value = values[k];
}

SquareLandscape build_lattice(double spacing, double half_width, Stream& rng) {
  SquareLandscape land(spacing, half_width);
  for (auto& s : land.squares()) s.value = rng.uniform(0.3, 1.0);
  return land;
}

SquareLandscape build_hard_landscape(double spacing, double half_width, double r_outer,
                                     double high_probability, Stream& rng) {
  SquareLandscape land(spacing, half_width);
  const double c = SquareLandscape::kBounds / 2.0;
  for (auto& s : land.squares()) {
    const double draw = rng.uniform();  // drawn for every square so streams line up
    const bool outer = std::hypot(s.cx - c, s.cy - c) > r_outer;
    s.value = (outer && draw < high_probability) ? 1.0 : 0.3;
  }
  return land;
}

void shuffle_values(SquareLandscape& land, Stream& rng) {
  auto& sq = land.squares();
  for (std::size_t i = sq.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(sq[i - 1].value, sq[j].value);
  }
}

void SquareConfig::validate() const {
  if (!(logit_sigma >= 0.0)) throw ConfigError("logit_sigma: must be non-negative");
  if (!(r_outer >= 0.0)) throw ConfigError("r_outer: must be non-negative");
  if (!(high_probability >= 0.0 && high_probability <= 1.0))
    throw ConfigError("high_probability: must be in [0, 1]");
  SquareLandscape probe(spacing, half_width);
  (void)probe;
}

namespace {

SquareLandscape make_landscape(const SquareConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Stream rng(seed, 0, stream_tag::kWorldBuild);
  if (cfg.mode == LandscapeMode::hard)
    return build_hard_landscape(cfg.spacing, cfg.half_width, cfg.r_outer, cfg.high_probability, rng);
  return build_lattice(cfg.spacing, cfg.half_width, rng);
}

}  // namespace

SquareWorld::SquareWorld(SquareConfig config, std::uint64_t seed)
    : config_(config), land_(make_landscape(config, seed)) {}

SquareGenome SquareWorld::mutate(const SquareGenome& g, Stream& rng) const {
  const auto probs = softmax(g.logits);
  const auto k = static_cast<double>(rng.categorical(probs));
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  SquareGenome child = g;
  child.x = g.x + k * std::cos(theta);
  child.y = g.y + k * std::sin(theta);
  for (auto& l : child.logits) l += config_.logit_sigma * rng.normal();
  return child;
}

void SquareWorld::begin_generation(std::uint64_t generation, Stream& rng) {
  if (config_.shuffle_period == 0 || generation % config_.shuffle_period != 0) return;
  shuffle_values(land_, rng);
  ++epoch_;
}

PopulationState<SquareGenome> SquareWorld::initial_population() const {
  const auto& sq = land_.squares()[land_.center_square()];
  SquareGenome g;
  g.x = sq.cx;
  g.y = sq.cy;
  return singleton_population(g);
}

std::vector<std::string> SquareWorld::metric_columns() const {
  std::vector<std::string> cols;
  for (std::size_t k = 0; k < kRadiusBins; ++k) cols.push_back("p" + std::to_string(k));
  return cols;
}

std::vector<double> SquareWorld::metric_values(const PopulationState<SquareGenome>& state,
                                               std::span<const double>) const {
  std::vector<double> mass(kRadiusBins, 0.0);
  for (const auto& g : state.genomes) {
    const auto p = softmax(g.params.logits);
    for (std::size_t k = 0; k < kRadiusBins; ++k) mass[k] += g.population * p[k];
  }
  return mass;
}

std::vector<double> SquareWorld::encode(const SquareGenome& g) {
  std::vector<double> v{g.x, g.y};
  v.insert(v.end(), g.logits.begin(), g.logits.end());
  return v;
}

SquareGenome SquareWorld::decode(std::span<const double> v) {
  if (v.size() != 2 + kRadiusBins)
    throw ConfigError("square genome: expected 18 parameters, got " + std::to_string(v.size()));
  SquareGenome g;
  g.x = v[0];
  g.y = v[1];
  std::copy(v.begin() + 2, v.end(), g.logits.begin());
  return g;
}

}  // namespace pbml
