#pragma once

#include <cstdint>
#include <functional>

#include "dsacd/envs/environment.hpp"
#include "dsacd/value/return_model.hpp"

namespace dsacd::value {

/// Acts in an environment: action for `state` under stream `seed`.
using ActionFn = std::function<Vector(const Vector& state, std::uint64_t seed)>;
/// Value estimate for one (state, action).
using QFn = std::function<double(const Vector& state, const Vector& action)>;
/// Optional log pi(a|s), needed only when alpha > 0.
using LogProbFn = std::function<double(const Vector& state, const Vector& action)>;

struct BiasOptions {
  double gamma = 0.99;
  int n_episodes = 10;
  int horizon = 1000;
  double truncation_tol = 1e-3;
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

struct BiasReport {
  double mean_bias = 0.0;           // mean of (Q_hat - Q_true)
  double mean_relative_bias = 0.0;  // mean of (Q_hat - Q_true) / |Q_true|
  double mean_true_q = 0.0;
  double mean_estimated_q = 0.0;
  long long n_pairs = 0;
};

/// Rolls out `act` and compares `q` at every visited pair whose discounted
/// tail is either complete (episode terminated) or below the truncation
/// tolerance. Q_true is the discounted accumulation of sampled rewards, with
/// -alpha log pi bonuses from the next step on when alpha > 0.
BiasReport evaluate_bias(envs::Environment& env, const ActionFn& act, const QFn& q,
                         const BiasOptions& options, const LogProbFn& log_prob = {});

/// Convenience overload scoring pairs with the mean of `n_q_samples` DVN draws.
BiasReport evaluate_bias(const ReturnDistributionModel& model, envs::Environment& env,
                         const ActionFn& act, const BiasOptions& options, Index n_q_samples = 64,
                         const LogProbFn& log_prob = {});

}  // namespace dsacd::value
