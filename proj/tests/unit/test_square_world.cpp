#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pbml/error.hpp"
#include "pbml/square_world.hpp"

using namespace pbml;

namespace {

constexpr double kCenter = SquareLandscape::kBounds / 2.0;

SquareLandscape default_lattice(std::uint64_t seed = 1) {
  Stream rng(seed);
  return build_lattice(9.5, 1.5, rng);
}

/// Chi-square statistic of observed counts against expected probabilities.
double chi_square(const std::vector<double>& counts, const std::array<double, kRadiusBins>& p, double n) {
  double chi = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double e = p[k] * n;
    chi += (counts[k] - e) * (counts[k] - e) / e;
  }
  return chi;
}

}  // namespace

TEST_CASE("interior squares have six neighbours at the lattice spacing") {
  const auto land = default_lattice();
  const auto& sq = land.squares();
  const auto interior = land.interior_squares();
  REQUIRE_FALSE(interior.empty());
  for (auto k : interior) {
    int at_spacing = 0;
    double nearest = INFINITY;
    for (std::size_t j = 0; j < sq.size(); ++j) {
      if (j == k) continue;
      const double d = std::hypot(sq[j].cx - sq[k].cx, sq[j].cy - sq[k].cy);
      nearest = std::min(nearest, d);
      if (std::abs(d - 9.5) <= 1e-9) ++at_spacing;
    }
    REQUIRE(at_spacing == 6);
    REQUIRE(nearest >= 9.5 - 1e-9);
  }
}

TEST_CASE("interior square count matches the area estimate") {
  const auto land = default_lattice();
  const auto n = land.interior_squares().size();
  CHECK(n >= 700);
  CHECK(n <= 900);
}

TEST_CASE("lattice values are drawn from [0.3, 1.0]") {
  const auto land = default_lattice(3);
  for (const auto& s : land.squares()) {
    CHECK(s.value >= 0.3);
    CHECK(s.value <= 1.0);
  }
}

TEST_CASE("fitness is the containing square's value and zero elsewhere") {
  auto land = default_lattice();
  const auto c = land.squares()[land.center_square()];
  CHECK(c.cx == kCenter);
  CHECK(c.cy == kCenter);
  auto values = land.values();
  values[land.center_square()] = 0.7;
  land.set_values(values);
  CHECK(land.value_at(c.cx, c.cy) == 0.7);
  CHECK(land.value_at(c.cx + 1.4, c.cy - 1.4) == 0.7);
  CHECK(land.value_at(c.cx + 9.5 / 2.0, c.cy) == 0.0);
  CHECK(land.value_at(-10.0, 5.0) == 0.0);
  CHECK(land.value_at(300.0, 128.0) == 0.0);
}

TEST_CASE("lattice geometry is validated") {
  CHECK_THROWS_AS(SquareLandscape(2.5, 1.5), ConfigError);
  CHECK_THROWS_AS(SquareLandscape(3.2, 1.5), ConfigError);  // rows would overlap
  CHECK_THROWS_AS(SquareLandscape(200.0, 1.5), ConfigError);  // fewer than 7 squares
  CHECK_NOTHROW(SquareLandscape(9.5, 1.5));
}

TEST_CASE("softmax of a single large logit") {
  std::array<double, kRadiusBins> logits{};
  logits[10] = 5.0;
  const auto p = softmax(logits);
  const double e5 = std::exp(5.0);
  CHECK(p[10] == doctest::Approx(e5 / (e5 + 15.0)));
  CHECK(p[10] == doctest::Approx(0.908).epsilon(0.001));
  const auto u = softmax({});
  for (double v : u) CHECK(v == doctest::Approx(1.0 / 16.0));
}

TEST_CASE("child radii follow softmax(logits)") {
  SquareWorld world(SquareConfig{}, 1);
  SquareGenome g;
  g.x = kCenter;
  g.y = kCenter;
  for (std::size_t k = 0; k < kRadiusBins; ++k) g.logits[k] = 0.1 * static_cast<double>(k % 5);
  const auto p = softmax(g.logits);
  const int n = 100000;
  std::vector<double> counts(kRadiusBins, 0.0);
  double displacement = 0.0;
  for (int i = 0; i < n; ++i) {
    Stream rng(5, 0, static_cast<std::uint64_t>(i));
    const auto child = world.mutate(g, rng);
    const double d = std::hypot(child.x - g.x, child.y - g.y);
    displacement += d;
    const auto k = static_cast<std::size_t>(std::lround(d));
    REQUIRE(std::abs(d - static_cast<double>(k)) < 1e-9);
    counts[k] += 1.0;
  }
  // 99.9th percentile of chi-square with 15 degrees of freedom.
  CHECK(chi_square(counts, p, n) < 37.7);
  double expected = 0.0;
  for (std::size_t k = 0; k < kRadiusBins; ++k) expected += static_cast<double>(k) * p[k];
  CHECK(displacement / n == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("radius zero keeps the parent's coordinates") {
  SquareWorld world(SquareConfig{}, 1);
  SquareGenome g;
  g.x = 100.25;
  g.y = 31.5;
  g.logits[0] = 800.0;
  for (int i = 0; i < 100; ++i) {
    Stream rng(6, 0, static_cast<std::uint64_t>(i));
    const auto child = world.mutate(g, rng);
    CHECK(child.x == g.x);
    CHECK(child.y == g.y);
  }
}

TEST_CASE("logit noise has the configured scale") {
  SquareConfig cfg;
  cfg.logit_sigma = 0.3;
  SquareWorld world(cfg, 1);
  const SquareGenome g;
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    Stream rng(8, 0, static_cast<std::uint64_t>(i));
    const double v = world.mutate(g, rng).logits[3];
    sq += v * v;
  }
  CHECK(std::sqrt(sq / n) == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("shuffling permutes values and keeps positions") {
  auto land = default_lattice(4);
  const auto before = land.squares();
  Stream rng(12);
  shuffle_values(land, rng);
  const auto& after = land.squares();
  REQUIRE(after.size() == before.size());
  bool moved = false;
  std::vector<double> a, b;
  for (std::size_t k = 0; k < after.size(); ++k) {
    CHECK(after[k].cx == before[k].cx);
    CHECK(after[k].cy == before[k].cy);
    moved = moved || after[k].value != before[k].value;
    a.push_back(before[k].value);
    b.push_back(after[k].value);
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
  CHECK(moved);
}

TEST_CASE("the world shuffles on multiples of the period only") {
  SquareWorld world(SquareConfig{}, 2);
  const auto initial = world.landscape().values();
  Stream rng(1);
  world.begin_generation(5, rng);
  CHECK(world.landscape().values() == initial);
  CHECK(world.epoch() == 0);
  world.begin_generation(10, rng);
  CHECK(world.landscape().values() != initial);
  CHECK(world.epoch() == 1);
}

TEST_CASE("a static landscape never changes") {
  SquareConfig cfg;
  cfg.shuffle_period = 0;
  SquareWorld world(cfg, 2);
  const auto initial = world.landscape().values();
  for (std::uint64_t g = 0; g < 500; ++g) {
    Stream rng(3, g, 0);
    world.begin_generation(g, rng);
  }
  CHECK(world.landscape().values() == initial);
  CHECK(world.epoch() == 0);
}

TEST_CASE("hard landscape keeps the center low and the outside sparse") {
  double high = 0.0, outer = 0.0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Stream rng(seed);
    const auto land = build_hard_landscape(9.5, 1.5, 80.0, 0.1, rng);
    for (const auto& s : land.squares()) {
      REQUIRE((s.value == 0.3 || s.value == 1.0));
      const double r = std::hypot(s.cx - kCenter, s.cy - kCenter);
      if (r <= 80.0) {
        REQUIRE(s.value == 0.3);
      } else {
        outer += 1.0;
        high += s.value == 1.0;
      }
    }
  }
  CHECK(std::abs(high / outer - 0.10) <= 0.03);
}

TEST_CASE("square genomes encode to 18 values") {
  SquareGenome g;
  g.x = 1.5;
  g.y = -2.0;
  g.logits[15] = 0.25;
  const auto v = SquareWorld::encode(g);
  CHECK(v.size() == 18);
  CHECK(SquareWorld::decode(v) == g);
  CHECK_THROWS_AS(SquareWorld::decode(std::vector<double>(3)), ConfigError);
}
