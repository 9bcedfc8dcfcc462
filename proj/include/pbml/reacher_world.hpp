#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pbml/policy_net.hpp"
#include "pbml/population.hpp"
#include "pbml/rng.hpp"

namespace pbml {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct ArmState {
  double theta1 = 0.0;
  double theta2 = 0.0;  // relative to link 1
  double omega1 = 0.0;
  double omega2 = 0.0;
  Vec2 goal;
};

struct ReacherConfig {
  double link1 = 0.5;
  double link2 = 0.5;
  double damping = 0.1;
  double inertia = 1.0;
  double dt = 0.05;
  std::size_t frames = 50;
  std::size_t goal_period = 50;  // 0: goal never resampled
  double torque_bound = 1.0;
  PolicyNetShape net{10, 32, 2};
  MutationScales scales;
  std::optional<Vec2> fixed_goal;

  double reach() const { return link1 + link2; }
  void validate() const;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

/// Damped per-joint integrator:
/// omega += dt * (tau - b * omega) / I, theta += omega * dt.
/// Torques are clamped to the configured bound.
ArmState step_dynamics(const ArmState& s, std::span<const double> torque, const ReacherConfig& cfg);

Vec2 fingertip(const ArmState& s, const ReacherConfig& cfg);

/// [cos t1, sin t1, cos t2, sin t2, w1, w2, gx, gy, tip_x - gx, tip_y - gy]
std::array<double, 10> observe(const ArmState& s, const ReacherConfig& cfg);

/// Negated sum of tip-to-goal distances over the episode, starting from rest.
/// Returns -inf if the policy produces a non-finite action.
double rollout(const ModularPolicyNet& net, Vec2 goal, const ReacherConfig& cfg);

/// Uniform over the annulus 0.2 * reach <= |p| <= 0.9 * reach.
Vec2 sample_goal(Stream& rng, const ReacherConfig& cfg);

class ReacherWorld {
 public:
  using Params = ModularPolicyNet;

  ReacherWorld(ReacherConfig config, std::uint64_t seed);

  std::string_view kind() const { return "reacher"; }
  double fitness(const ModularPolicyNet& net) const { return rollout(net, goal_, config_); }
  ModularPolicyNet mutate(const ModularPolicyNet& net, Stream& rng) const { return net.mutate(rng, config_.scales); }

  /// Samples the first goal at generation 0 and a new one whenever
  /// generation % goal_period == 0. A fixed goal is never replaced.
  void begin_generation(std::uint64_t generation, Stream& rng);
  std::uint64_t epoch() const { return epoch_; }

  /// One freshly initialized network.
  PopulationState<ModularPolicyNet> initial_population(std::uint64_t seed) const;

  std::vector<std::string> metric_columns() const { return {"top_fitness", "goal_x", "goal_y"}; }
  std::vector<double> metric_values(const PopulationState<ModularPolicyNet>& state,
                                    std::span<const double> fitness) const;

  const ReacherConfig& config() const { return config_; }
  Vec2 goal() const { return goal_; }
  void set_goal(Vec2 g);

  std::vector<double> encode(const ModularPolicyNet& net) const { return net.flatten(); }
  ModularPolicyNet decode(std::span<const double> v) const { return ModularPolicyNet::unflatten(v, config_.net); }

 private:
  ReacherConfig config_;
  Vec2 goal_;
  bool has_goal_ = false;
  std::uint64_t epoch_ = 0;
};

}  // namespace pbml
