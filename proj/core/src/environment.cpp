#include "dsacd/envs/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsacd::envs {

double EnvSpec::reward_bound() const { return std::max(std::abs(reward_min), std::abs(reward_max)); }

void EnvSpec::validate() const {
  if (action_dim < 1) throw std::invalid_argument("environment action dimension must be >= 1");
  if (state_dim < 1) throw std::invalid_argument("environment state dimension must be >= 1");
  if (action_low.size() != action_dim || action_high.size() != action_dim)
    throw std::invalid_argument("environment action bounds do not match the action dimension");
  if (!action_low.allFinite() || !action_high.allFinite() ||
      (action_low.array() >= action_high.array()).any())
    throw std::invalid_argument("environment action bounds must be finite with low < high");
}

}  // namespace dsacd::envs
