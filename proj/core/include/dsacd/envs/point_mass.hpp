#pragma once

#include <array>

#include "dsacd/envs/environment.hpp"

namespace dsacd::envs {

/// Planar double integrator that starts at the origin at rest with a circular
/// obstacle straight ahead and two goals mirrored about the x = 0 axis. The
/// straight line to either goal crosses the obstacle, so each goal is reached
/// by going around one side.
///
/// State: (x, y, vx, vy, fraction of the episode remaining).
/// Reward: -distance to the nearest goal - obstacle_penalty * penetration
///         - action_penalty * |a|^2.
class TwoGoalPointMass final : public Environment {
 public:
  struct Params {
    double dt = 0.2;
    double accel_scale = 2.0;
    double drag = 0.1;
    std::array<double, 2> obstacle_center = {0.0, 1.0};
    double obstacle_radius = 0.5;
    std::array<double, 2> goal = {0.8, 2.0};  // mirrored to (-x, y)
    double goal_radius = 0.15;
    double obstacle_penalty = 10.0;
    double action_penalty = 0.05;
    int max_steps = 25;
  };

  TwoGoalPointMass() : TwoGoalPointMass(Params{}) {}
  explicit TwoGoalPointMass(Params params);

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  std::string save_state() const override;
  void load_state(const std::string& state) override;
  std::unique_ptr<Environment> clone() const override {
    return std::make_unique<TwoGoalPointMass>(*this);
  }

  /// Reward for occupying `state` after applying `action`.
  double reward(const Vector& state, const Vector& action) const;
  double goal_distance(double x, double y) const;
  double obstacle_penetration(double x, double y) const;
  /// -1 for the left goal, +1 for the right goal, 0 when neither is reached.
  int reached_goal(const Vector& state) const;
  /// Mirror image about the start-obstacle axis.
  static Vector reflect_state(const Vector& state);
  static Vector reflect_action(const Vector& action);

  void set_state(const Vector& state, int steps_taken);
  const Vector& state() const { return state_; }
  const Params& params() const { return params_; }

 private:
  Params params_;
  EnvSpec spec_;
  Vector state_;
  int steps_ = 0;
};

}  // namespace dsacd::envs
