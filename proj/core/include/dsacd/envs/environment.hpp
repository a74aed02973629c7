#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "dsacd/types.hpp"

namespace dsacd::envs {

struct EnvSpec {
  std::string name;
  Index state_dim = 1;
  Index action_dim = 1;
  Vector action_low;
  Vector action_high;
  int max_episode_steps = 1;
  double reward_min = 0.0;
  double reward_max = 0.0;

  /// Largest absolute per-step reward.
  double reward_bound() const;
  /// Throws std::invalid_argument unless dimensions and bounds are usable.
  void validate() const;
};

struct StepResult {
  Vector next_state;
  double reward = 0.0;
  bool terminal = false;   // true end of the episode, no bootstrap
  bool truncated = false;  // cut short by an external limit
};

/// reset(seed) -> state; step(action) -> StepResult. Single-owner objects.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Vector reset(std::uint64_t seed) = 0;
  virtual StepResult step(const Vector& action) = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  /// Opaque snapshot of the internal state (position, step count, noise
  /// stream), restored exactly by load_state().
  virtual std::string save_state() const = 0;
  virtual void load_state(const std::string& state) = 0;
};

}  // namespace dsacd::envs
