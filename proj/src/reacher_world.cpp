#include "pbml/reacher_world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pbml/error.hpp"

namespace pbml {

void ReacherConfig::validate() const {
  if (!(link1 > 0.0 && link2 > 0.0)) throw ConfigError("link lengths must be positive");
  if (!(damping > 0.0)) throw ConfigError("damping: must be positive");
  if (!(inertia > 0.0)) throw ConfigError("inertia: must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt: must be positive");
  if (frames == 0) throw ConfigError("frames: must be positive");
  if (!(torque_bound > 0.0)) throw ConfigError("torque_bound: must be positive");
  if (net.obs_dim != 10) throw ConfigError("hidden net input must match the 10-entry observation");
  if (net.action_dim != 2) throw ConfigError("policy must output 2 torques");
  if (net.hidden == 0) throw ConfigError("hidden: must be positive");
  if (!(scales.base_sigma >= 0.0 && scales.meta_sigma >= 0.0)) throw ConfigError("mutation sigmas must be non-negative");
  if (fixed_goal && std::hypot(fixed_goal->x, fixed_goal->y) > reach())
    throw ConfigError("fixed_goal: outside the arm's reach");
}

double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  w -= std::numbers::pi;
  return w == -std::numbers::pi ? std::numbers::pi : w;
}

ArmState step_dynamics(const ArmState& s, std::span<const double> torque, const ReacherConfig& cfg) {
  ArmState n = s;
  const double t1 = std::clamp(torque[0], -cfg.torque_bound, cfg.torque_bound);
  const double t2 = std::clamp(torque[1], -cfg.torque_bound, cfg.torque_bound);
  n.omega1 += cfg.dt * (t1 - cfg.damping * s.omega1) / cfg.inertia;
  n.omega2 += cfg.dt * (t2 - cfg.damping * s.omega2) / cfg.inertia;
  n.theta1 = wrap_angle(s.theta1 + n.omega1 * cfg.dt);
  n.theta2 = wrap_angle(s.theta2 + n.omega2 * cfg.dt);
  return n;
}

Vec2 fingertip(const ArmState& s, const ReacherConfig& cfg) {
  return {cfg.link1 * std::cos(s.theta1) + cfg.link2 * std::cos(s.theta1 + s.theta2),
          cfg.link1 * std::sin(s.theta1) + cfg.link2 * std::sin(s.theta1 + s.theta2)};
}

std::array<double, 10> observe(const ArmState& s, const ReacherConfig& cfg) {
  const Vec2 tip = fingertip(s, cfg);
  return {std::cos(s.theta1), std::sin(s.theta1), std::cos(s.theta2), std::sin(s.theta2),
          s.omega1,           s.omega2,           s.goal.x,           s.goal.y,
          tip.x - s.goal.x,   tip.y - s.goal.y};
}

double rollout(const ModularPolicyNet& net, Vec2 goal, const ReacherConfig& cfg) {
  ArmState s;
  s.goal = goal;
  CompiledPolicy policy(net);
  std::array<double, 2> action{};
  double total = 0.0;
  for (std::size_t t = 0; t < cfg.frames; ++t) {
    const auto obs = observe(s, cfg);
    policy.forward(obs, action);
    if (!std::isfinite(action[0]) || !std::isfinite(action[1])) return -std::numeric_limits<double>::infinity();
    s = step_dynamics(s, action, cfg);
    const Vec2 tip = fingertip(s, cfg);
    total += std::hypot(tip.x - goal.x, tip.y - goal.y);
  }
  return -total;
}

Vec2 sample_goal(Stream& rng, const ReacherConfig& cfg) {
  const double r_in = 0.2 * cfg.reach(), r_out = 0.9 * cfg.reach();
  const double r = std::sqrt(rng.uniform(r_in * r_in, r_out * r_out));
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return {r * std::cos(phi), r * std::sin(phi)};
}

ReacherWorld::ReacherWorld(ReacherConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();
  if (config_.fixed_goal) {
    goal_ = *config_.fixed_goal;
  } else {
    Stream rng(seed, 0, stream_tag::kWorldBuild);
    goal_ = sample_goal(rng, config_);
  }
  has_goal_ = true;
}

void ReacherWorld::begin_generation(std::uint64_t generation, Stream& rng) {
  if (config_.fixed_goal || config_.goal_period == 0) return;
  if (generation % config_.goal_period != 0) return;
  goal_ = sample_goal(rng, config_);
  ++epoch_;
}

void ReacherWorld::set_goal(Vec2 g) {
  goal_ = g;
  ++epoch_;
}

PopulationState<ModularPolicyNet> ReacherWorld::initial_population(std::uint64_t seed) const {
  Stream rng(seed, 0, stream_tag::kInit);
  return singleton_population(ModularPolicyNet::init(rng, config_.net));
}

std::vector<double> ReacherWorld::metric_values(const PopulationState<ModularPolicyNet>&,
                                                std::span<const double> fitness) const {
  return {*std::max_element(fitness.begin(), fitness.end()), goal_.x, goal_.y};
}

}  // namespace pbml
