#include "dsacd/envs/constant_chain.hpp"

#include <string>

namespace dsacd::envs {

ConstantChain::ConstantChain(double reward, int max_steps) : reward_(reward) {
  spec_.name = "constant_chain";
  spec_.state_dim = 1;
  spec_.action_dim = 1;
  spec_.action_low = Vector::Constant(1, -1.0);
  spec_.action_high = Vector::Constant(1, 1.0);
  spec_.max_episode_steps = max_steps;
  spec_.reward_min = reward;
  spec_.reward_max = reward;
}

Vector ConstantChain::reset(std::uint64_t) {
  steps_ = 0;
  return Vector::Zero(1);
}

StepResult ConstantChain::step(const Vector&) {
  ++steps_;
  StepResult out;
  out.next_state = Vector::Zero(1);
  out.reward = reward_;
  out.truncated = steps_ >= spec_.max_episode_steps;
  return out;
}

}  // namespace dsacd::envs

namespace dsacd::envs {

std::string ConstantChain::save_state() const { return std::to_string(steps_); }

void ConstantChain::load_state(const std::string& state) { steps_ = std::stoi(state); }

}  // namespace dsacd::envs
