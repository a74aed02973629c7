#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsacd/entropy/alpha.hpp"
#include "dsacd/envs/environment.hpp"
#include "dsacd/io/config.hpp"
#include "dsacd/nn/adam.hpp"
#include "dsacd/policy/diffusion_policy.hpp"
#include "dsacd/runtime/replay_buffer.hpp"
#include "dsacd/runtime/sampler_pool.hpp"
#include "dsacd/value/return_model.hpp"

namespace dsacd::runtime {

/// Raised before a non-finite loss or gradient would be applied. The message
/// names the quantity and carries a short snapshot of the learner state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct UpdateMetrics {
  long long update = 0;  // k before this update
  double value_loss = 0.0;
  double target_mean = 0.0;  // mean Bellman target of the batch
  std::optional<double> policy_objective;
  std::optional<double> entropy;
  std::optional<entropy::AlphaStep> alpha_step;
};

struct IterationMetrics {
  long long iteration = 0;
  long long env_steps = 0;
  long long updates = 0;
  bool warmup = false;
  double value_loss = 0.0;        // mean over this iteration's updates, NaN if none
  double policy_objective = 0.0;  // mean Q of the last policy step, NaN if none
  double q_mean = 0.0;            // mean Bellman target over this iteration's updates, NaN if none
  double entropy = 0.0;           // last entropy estimate, NaN if none
  double alpha = 0.0;
  double episode_return_mean = 0.0;
  double episode_return_std = 0.0;
  int episodes = 0;
  double wall_time = 0.0;  // seconds spent in this iteration
  std::vector<entropy::AlphaStep> alpha_steps;
};

value::ReturnDistributionModel make_value_model(const io::RunConfig& config, const envs::EnvSpec& spec);
policy::PolicyModel make_policy_model(const io::RunConfig& config, const envs::EnvSpec& spec);

/// Owns the whole learner: both diffusion models with their target copies,
/// optimizers, temperature, replay buffer, sampler pool and counters.
class Trainer {
 public:
  explicit Trainer(io::RunConfig config);

  /// Collects steps_per_iteration steps on every sampler, then runs the
  /// gradient updates the collected steps pay for once warmup is over.
  IterationMetrics train_iteration();
  /// One update of the DVN, and every delayed_update_interval updates one of
  /// the policy, the temperature and the target copies.
  UpdateMetrics update_step();

  const io::RunConfig& config() const { return config_; }
  const envs::EnvSpec& env_spec() const { return spec_; }
  const value::ReturnDistributionModel& value_model() const { return value_; }
  value::ReturnDistributionModel& value_model() { return value_; }
  const policy::PolicyModel& policy_model() const { return policy_; }
  policy::PolicyModel& policy_model() { return policy_; }
  const entropy::AlphaController& alpha() const { return alpha_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  ReplayBuffer& buffer() { return buffer_; }
  const SamplerPool& pool() const { return pool_; }
  long long iteration() const { return iteration_; }
  long long updates() const { return updates_; }
  long long env_steps() const { return env_steps_; }
  double last_entropy() const { return last_entropy_; }

  /// Binary snapshot; restoring it and continuing reproduces an
  /// uninterrupted run exactly.
  std::string checkpoint_bytes(bool include_buffer = true) const;
  static Trainer from_checkpoint_bytes(const std::string& bytes);
  void save_checkpoint(const std::string& path, bool include_buffer = true) const;
  static Trainer load_checkpoint(const std::string& path);

 private:
  Trainer(io::RunConfig config, std::unique_ptr<envs::Environment> env);

  policy::BehaviourNoise behaviour_noise() const;
  std::string snapshot() const;

  io::RunConfig config_;
  envs::EnvSpec spec_;
  value::ReturnDistributionModel value_;
  policy::PolicyModel policy_;
  entropy::AlphaController alpha_;
  nn::Adam value_opt_;
  nn::Adam policy_opt_;
  ReplayBuffer buffer_;
  SamplerPool pool_;
  Rng learner_rng_;
  long long iteration_ = 0;
  long long updates_ = 0;
  long long env_steps_ = 0;
  double update_credit_ = 0.0;
  double last_entropy_;
  double last_policy_objective_;
};

}  // namespace dsacd::runtime
