#pragma once

#include <cstdint>
#include <memory>

#include "dsacd/diffusion/predictor.hpp"
#include "dsacd/diffusion/schedule.hpp"
#include "dsacd/random.hpp"
#include "dsacd/value/return_model.hpp"

namespace dsacd::policy {

using value::Params;

struct ExplorationConfig {
  double lambda = 0.1;
  bool enabled = true;

  /// Standard deviation of the additive exploration noise.
  double noise_scale(double alpha) const { return enabled ? lambda * alpha : 0.0; }
};

/// Diffusion sampler over actions conditioned on the state. The chain output
/// is squashed into the action box with center + half_range * tanh(raw).
class PolicyModel {
 public:
  PolicyModel(std::unique_ptr<diffusion::NoisePredictor> predictor, diffusion::NoiseSchedule schedule,
              Vector action_low, Vector action_high);
  PolicyModel(const PolicyModel& other);
  PolicyModel& operator=(const PolicyModel& other);
  PolicyModel(PolicyModel&&) noexcept = default;
  PolicyModel& operator=(PolicyModel&&) noexcept = default;

  Index state_dim() const { return online_->cond_dim(); }
  Index action_dim() const { return online_->sample_dim(); }
  const Vector& action_low() const { return low_; }
  const Vector& action_high() const { return high_; }
  const diffusion::NoiseSchedule& schedule() const { return schedule_; }

  const diffusion::NoisePredictor& predictor(Params which = Params::online) const;
  diffusion::NoisePredictor& predictor(Params which = Params::online);

  Matrix squash(const Matrix& raw) const;
  /// Elementwise derivative of squash at `raw`.
  Matrix squash_derivative(const Matrix& raw) const;
  Matrix clip(const Matrix& actions) const;

 private:
  std::unique_ptr<diffusion::NoisePredictor> online_;
  std::unique_ptr<diffusion::NoisePredictor> target_;
  diffusion::NoiseSchedule schedule_;
  Vector low_, high_;
};

/// One draw from the chain conditioned on `state`, bounded into the box.
/// `deterministic` zeroes the per-step noise (the start draw still uses `seed`).
Vector sample_action(const PolicyModel& policy, const Vector& state, std::uint64_t seed,
                     bool deterministic = false, Params which = Params::online);

/// sample_action plus lambda * alpha * N(0, I), clipped back into the box.
Vector explore_action(const PolicyModel& policy, const Vector& state, double alpha,
                      const ExplorationConfig& cfg, std::uint64_t seed);

/// `n` independent draws at one state (d x n); column i equals
/// sample_action(policy, state, derive_seed(seed, i)).
Matrix sample_actions(const PolicyModel& policy, const Vector& state, Index n, std::uint64_t seed,
                      Params which = Params::online);

/// `n_per_state` draws for every column of `states`, grouped by state; state j
/// uses sample_actions(..., derive_seed(seed, j)).
Matrix sample_actions_batch(const PolicyModel& policy, const Matrix& states, Index n_per_state,
                            std::uint64_t seed, bool deterministic = false,
                            Params which = Params::online);

struct PolicyLossResult {
  double objective = 0.0;  // mean Q over the batch, to be ascended
  Vector grad;             // d objective / d omega
  Matrix actions;          // actions the objective was evaluated at
};

/// Reparameterized objective: actions come from a differentiable pass through
/// the whole reverse chain, and are scored by `critic` with its parameters
/// held fixed. The gradient reaches omega through every reverse step.
PolicyLossResult policy_loss(const PolicyModel& policy, const value::ActionValueCritic& critic,
                             const Matrix& states, Rng& rng, bool with_grad = true);

}  // namespace dsacd::policy
