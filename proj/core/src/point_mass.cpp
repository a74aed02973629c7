#include "dsacd/envs/point_mass.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dsacd::envs {

TwoGoalPointMass::TwoGoalPointMass(Params params) : params_(params) {
  if (params.dt <= 0.0 || params.max_steps < 1 || params.obstacle_radius < 0.0 || params.goal_radius <= 0.0)
    throw std::invalid_argument("two_goal_pointmass: invalid parameters");
  spec_.name = "two_goal_pointmass";
  spec_.state_dim = 5;
  spec_.action_dim = 2;
  spec_.action_low = Vector::Constant(2, -1.0);
  spec_.action_high = Vector::Constant(2, 1.0);
  spec_.max_episode_steps = params.max_steps;
  spec_.reward_max = 0.0;
  spec_.reward_min = -(6.0 + params.obstacle_penalty * params.obstacle_radius + 2.0 * params.action_penalty);
  state_ = Vector::Zero(5);
  state_[4] = 1.0;
}

double TwoGoalPointMass::goal_distance(double x, double y) const {
  const double gx = params_.goal[0], gy = params_.goal[1];
  return std::min(std::hypot(x - gx, y - gy), std::hypot(x + gx, y - gy));
}

double TwoGoalPointMass::obstacle_penetration(double x, double y) const {
  const double d = std::hypot(x - params_.obstacle_center[0], y - params_.obstacle_center[1]);
  return std::max(0.0, params_.obstacle_radius - d);
}

double TwoGoalPointMass::reward(const Vector& state, const Vector& action) const {
  return -goal_distance(state[0], state[1]) -
         params_.obstacle_penalty * obstacle_penetration(state[0], state[1]) -
         params_.action_penalty * action.squaredNorm();
}

int TwoGoalPointMass::reached_goal(const Vector& s) const {
  const double gx = params_.goal[0], gy = params_.goal[1];
  if (std::hypot(s[0] - gx, s[1] - gy) <= params_.goal_radius) return 1;
  if (std::hypot(s[0] + gx, s[1] - gy) <= params_.goal_radius) return -1;
  return 0;
}

Vector TwoGoalPointMass::reflect_state(const Vector& s) {
  Vector r = s;
  r[0] = -s[0];
  r[2] = -s[2];
  return r;
}

Vector TwoGoalPointMass::reflect_action(const Vector& a) {
  Vector r = a;
  r[0] = -a[0];
  return r;
}

Vector TwoGoalPointMass::reset(std::uint64_t) {
  state_ = Vector::Zero(5);
  state_[4] = 1.0;
  steps_ = 0;
  return state_;
}

void TwoGoalPointMass::set_state(const Vector& state, int steps_taken) {
  if (state.size() != 5) throw std::invalid_argument("two_goal_pointmass state must be 5-D");
  state_ = state;
  steps_ = steps_taken;
  state_[4] = 1.0 - static_cast<double>(steps_) / params_.max_steps;
}

StepResult TwoGoalPointMass::step(const Vector& action) {
  if (action.size() != 2) throw std::invalid_argument("two_goal_pointmass expects a 2-D action");
  const Vector a = action.cwiseMax(-1.0).cwiseMin(1.0);
  const double dt = params_.dt;
  Vector next = state_;
  for (int i = 0; i < 2; ++i) {
    next[2 + i] = (1.0 - params_.drag) * state_[2 + i] + params_.accel_scale * a[i] * dt;
    next[i] = state_[i] + next[2 + i] * dt;
  }
  ++steps_;
  next[4] = 1.0 - static_cast<double>(steps_) / params_.max_steps;
  state_ = next;

  StepResult out;
  out.next_state = next;
  out.reward = reward(next, a);
  out.terminal = reached_goal(next) != 0 || steps_ >= params_.max_steps;
  return out;
}

}  // namespace dsacd::envs

namespace dsacd::envs {

std::string TwoGoalPointMass::save_state() const {
  std::ostringstream os;
  os.precision(17);
  os << steps_;
  for (Index i = 0; i < state_.size(); ++i) os << ' ' << std::hexfloat << state_[i];
  return os.str();
}

void TwoGoalPointMass::load_state(const std::string& state) {
  std::istringstream is(state);
  int steps = 0;
  is >> steps;
  Vector s(5);
  for (Index i = 0; i < 5; ++i) {
    std::string tok;
    is >> tok;
    s[i] = std::strtod(tok.c_str(), nullptr);
  }
  if (is.fail()) throw std::runtime_error("two_goal_pointmass: malformed saved state");
  state_ = s;
  steps_ = steps;
}

}  // namespace dsacd::envs
