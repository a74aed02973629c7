#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "dsacd/envs/environment.hpp"
#include "dsacd/policy/diffusion_policy.hpp"
#include "dsacd/runtime/replay_buffer.hpp"

namespace dsacd::runtime {

struct SamplerSlot {
  std::unique_ptr<envs::Environment> env;
  Vector observation;
  double episode_return = 0.0;
  int episode_length = 0;
  long long episodes = 0;  // episodes started
  long long steps = 0;     // steps taken
};

/// One environment instance per sampler. Each sampler draws its randomness
/// from streams derived from (pool seed, sampler index, step index), so the
/// collected data does not depend on thread scheduling.
class SamplerPool {
 public:
  SamplerPool(const envs::Environment& prototype, int n_samplers, std::uint64_t seed);

  int size() const { return static_cast<int>(slots_.size()); }
  SamplerSlot& slot(int i) { return slots_[static_cast<std::size_t>(i)]; }
  const SamplerSlot& slot(int i) const { return slots_[static_cast<std::size_t>(i)]; }
  std::uint64_t seed() const { return seed_; }

  std::uint64_t step_seed(int sampler, long long step) const;
  std::uint64_t episode_seed(int sampler, long long episode) const;
  void reset_slot(int sampler);

 private:
  std::vector<SamplerSlot> slots_;
  std::uint64_t seed_;
};

struct EpisodeStats {
  std::vector<double> returns;
  std::vector<int> lengths;

  double mean_return() const;
  double std_return() const;
};

/// Chooses an action for `state` using randomness `seed`.
using ActionPicker = std::function<Vector(const Vector& state, std::uint64_t seed)>;

/// Every sampler takes `n_steps` steps with `act` and appends its transitions;
/// samplers run on separate threads when `parallel` and there is more than one.
/// Transitions are appended in sampler order. Env failures are rethrown with
/// the sampler index.
EpisodeStats collect(SamplerPool& pool, const ActionPicker& act, int n_steps, ReplayBuffer& buffer,
                     bool parallel = true);

/// Algorithm-style collection with explore_action on a frozen policy snapshot.
EpisodeStats collect(SamplerPool& pool, const policy::PolicyModel& policy, double alpha,
                     const policy::ExplorationConfig& exploration, int n_steps, ReplayBuffer& buffer,
                     bool parallel = true);

}  // namespace dsacd::runtime
