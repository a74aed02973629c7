#include "dsacd/value/bias.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsacd/random.hpp"

namespace dsacd::value {

BiasReport evaluate_bias(envs::Environment& env, const ActionFn& act, const QFn& q,
                         const BiasOptions& options, const LogProbFn& log_prob) {
  if (!(options.gamma >= 0.0 && options.gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (options.alpha > 0.0 && !log_prob)
    throw std::invalid_argument("evaluate_bias: alpha > 0 needs a log-probability function");
  const double r_max = env.spec().reward_bound();
  // Rollouts that run the full horizon must leave a negligible tail for at least the first pair.
  if (std::pow(options.gamma, options.horizon) * r_max / (1.0 - options.gamma) > options.truncation_tol)
    throw std::invalid_argument("evaluate_bias: horizon " + std::to_string(options.horizon) +
                                " too short for the truncation tolerance");

  BiasReport report;
  double sum_bias = 0.0, sum_rel = 0.0, sum_true = 0.0, sum_est = 0.0;
  for (int ep = 0; ep < options.n_episodes; ++ep) {
    const std::uint64_t ep_seed = derive_seed(options.seed, static_cast<std::uint64_t>(ep));
    Vector state = env.reset(ep_seed);
    std::vector<Vector> states, actions;
    std::vector<double> rewards, bonuses;
    bool terminated = false;
    for (int t = 0; t < options.horizon; ++t) {
      const Vector a = act(state, derive_seed(ep_seed, static_cast<std::uint64_t>(t) + 1));
      const auto step = env.step(a);
      states.push_back(state);
      actions.push_back(a);
      rewards.push_back(step.reward);
      bonuses.push_back(options.alpha > 0.0 ? -options.alpha * log_prob(state, a) : 0.0);
      state = step.next_state;
      if (step.terminal) {
        terminated = true;
        break;
      }
      if (step.truncated) break;
    }

    // Backward accumulation: G_i = r_i + gamma * (bonus_{i+1} + G_{i+1}).
    const std::size_t len = rewards.size();
    std::vector<double> returns(len, 0.0);
    double tail = 0.0;
    for (std::size_t i = len; i-- > 0;) {
      const double next_bonus = i + 1 < len ? bonuses[i + 1] : 0.0;
      returns[i] = rewards[i] + options.gamma * (next_bonus + tail);
      tail = returns[i];
    }
    for (std::size_t i = 0; i < len; ++i) {
      const double remaining = static_cast<double>(len - i);
      const bool complete = terminated ||
                            std::pow(options.gamma, remaining) * r_max / (1.0 - options.gamma) <= options.truncation_tol;
      if (!complete) continue;
      const double truth = returns[i];
      const double est = q(states[i], actions[i]);
      sum_bias += est - truth;
      sum_rel += (est - truth) / std::max(std::abs(truth), 1e-8);
      sum_true += truth;
      sum_est += est;
      ++report.n_pairs;
    }
  }
  if (report.n_pairs > 0) {
    const double n = static_cast<double>(report.n_pairs);
    report.mean_bias = sum_bias / n;
    report.mean_relative_bias = sum_rel / n;
    report.mean_true_q = sum_true / n;
    report.mean_estimated_q = sum_est / n;
  }
  return report;
}

BiasReport evaluate_bias(const ReturnDistributionModel& model, envs::Environment& env,
                         const ActionFn& act, const BiasOptions& options, Index n_q_samples,
                         const LogProbFn& log_prob) {
  std::uint64_t counter = 0;
  const QFn q = [&](const Vector& s, const Vector& a) {
    return model.sample_returns(s, a, n_q_samples, derive_seed(options.seed ^ 0x5bd1e995ULL, counter++)).mean();
  };
  return evaluate_bias(env, act, q, options, log_prob);
}

}  // namespace dsacd::value
