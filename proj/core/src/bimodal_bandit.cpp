#include "dsacd/envs/bimodal_bandit.hpp"

#include <algorithm>
#include <iostream>
#include <stdexcept>

namespace dsacd::envs {

BimodalBandit::BimodalBandit(Params params) : params_(params) {
  spec_.name = "bimodal_bandit";
  spec_.state_dim = 1;
  spec_.action_dim = 1;
  spec_.action_low = Vector::Constant(1, -1.0);
  spec_.action_high = Vector::Constant(1, 1.0);
  spec_.max_episode_steps = 1;
  const double worst = (1.0 + params.mode) * (1.0 + params.mode);
  spec_.reward_min = 1.0 - worst - 5.0 * params.noise_std;
  spec_.reward_max = 1.0 + 5.0 * params.noise_std;
}

double BimodalBandit::expected_reward(double a) const {
  const double m = params_.mode;
  return 1.0 - std::min((a - m) * (a - m), (a + m) * (a + m));
}

double BimodalBandit::reward(double a, double noise) const {
  return expected_reward(a) + params_.noise_std * noise;
}

Vector BimodalBandit::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  return Vector::Zero(1);
}

StepResult BimodalBandit::step(const Vector& action) {
  if (action.size() != 1) throw std::invalid_argument("bimodal_bandit expects a 1-D action");
  double a = action[0];
  if (a < -1.0 || a > 1.0) {
    if (clipped_++ == 0) std::clog << "warning: bimodal_bandit clipped out-of-bounds action " << a << "\n";
    a = std::clamp(a, -1.0, 1.0);
  }
  StepResult out;
  out.next_state = Vector::Zero(1);
  out.reward = reward(a, rng_.normal());
  out.terminal = true;
  return out;
}

}  // namespace dsacd::envs

namespace dsacd::envs {

std::string BimodalBandit::save_state() const { return rng_.serialize(); }

void BimodalBandit::load_state(const std::string& state) { rng_.deserialize(state); }

}  // namespace dsacd::envs
