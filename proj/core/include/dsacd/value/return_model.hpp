#pragma once

#include <cmath>
#include <cstdint>
#include <memory>

#include "dsacd/diffusion/predictor.hpp"
#include "dsacd/diffusion/schedule.hpp"
#include "dsacd/types.hpp"

namespace dsacd::value {

/// Exponential running statistics used to standardize return targets before
/// diffusion training. Samples are mapped back with denormalize().
struct ReturnNormalizer {
  double mean = 0.0;
  double variance = 1.0;
  double momentum = 0.005;
  bool initialized = false;
  bool enabled = true;

  void observe(const Vector& targets);
  double scale() const { return enabled ? std::sqrt(variance) + 1e-8 : 1.0; }
  double shift() const { return enabled ? mean : 0.0; }
  double normalize(double x) const { return (x - shift()) / scale(); }
  double denormalize(double z) const { return shift() + scale() * z; }
};

enum class Params { online, target };

/// Conditional diffusion model over scalar returns given (state, action).
/// Holds the online predictor (theta) and its target copy (theta').
class ReturnDistributionModel {
 public:
  ReturnDistributionModel(std::unique_ptr<diffusion::NoisePredictor> predictor,
                          diffusion::NoiseSchedule schedule, Index state_dim, Index action_dim);
  ReturnDistributionModel(const ReturnDistributionModel& other);
  ReturnDistributionModel& operator=(const ReturnDistributionModel& other);
  ReturnDistributionModel(ReturnDistributionModel&&) noexcept = default;
  ReturnDistributionModel& operator=(ReturnDistributionModel&&) noexcept = default;

  Index state_dim() const { return state_dim_; }
  Index action_dim() const { return action_dim_; }
  const diffusion::NoiseSchedule& schedule() const { return schedule_; }

  const diffusion::NoisePredictor& predictor(Params which = Params::online) const;
  diffusion::NoisePredictor& predictor(Params which = Params::online);

  ReturnNormalizer& normalizer() { return normalizer_; }
  const ReturnNormalizer& normalizer() const { return normalizer_; }

  /// Stacks [states; actions]; validates dimensions.
  Matrix conditioning(const Matrix& states, const Matrix& actions) const;

  /// `n` return draws at one (state, action), in reward units.
  Vector sample_returns(const Vector& state, const Vector& action, Index n, std::uint64_t seed,
                        Params which = Params::online) const;

  /// One draw per column of (states, actions); column j uses derive_seed(seed, j).
  Vector sample_batch(const Matrix& states, const Matrix& actions, std::uint64_t seed,
                      Params which = Params::online) const;

  /// Mean of `n` draws per column.
  Vector q_estimate(const Matrix& states, const Matrix& actions, Index n, std::uint64_t seed,
                    Params which = Params::online) const;

 private:
  std::unique_ptr<diffusion::NoisePredictor> online_;
  std::unique_ptr<diffusion::NoisePredictor> target_;
  diffusion::NoiseSchedule schedule_;
  Index state_dim_;
  Index action_dim_;
  ReturnNormalizer normalizer_;
};

/// Interface the policy objective uses to score actions. Returns Q per column
/// and, when `grad_actions` is non-null, d(sum of Q)/d(actions).
class ActionValueCritic {
 public:
  virtual ~ActionValueCritic() = default;
  virtual Vector evaluate(const Matrix& states, const Matrix& actions, std::uint64_t seed,
                          Matrix* grad_actions) const = 0;
};

/// Scores actions with the mean of `n_samples` reparameterized return draws
/// from the online DVN. Parameter gradients are never taken.
class DiffusionCritic final : public ActionValueCritic {
 public:
  DiffusionCritic(const ReturnDistributionModel& model, Index n_samples)
      : model_(model), n_samples_(n_samples) {}

  Vector evaluate(const Matrix& states, const Matrix& actions, std::uint64_t seed,
                  Matrix* grad_actions) const override;

 private:
  const ReturnDistributionModel& model_;
  Index n_samples_;
};

}  // namespace dsacd::value
