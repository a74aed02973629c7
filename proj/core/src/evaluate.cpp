#include "dsacd/runtime/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dsacd/entropy/gmm.hpp"
#include "dsacd/policy/entropy_bridge.hpp"
#include "dsacd/random.hpp"

namespace dsacd::runtime {

void check_compatible(const envs::EnvSpec& trained, const envs::EnvSpec& env) {
  if (trained.state_dim != env.state_dim || trained.action_dim != env.action_dim)
    throw std::invalid_argument("environment '" + env.name + "' has state/action dims " +
                                std::to_string(env.state_dim) + "/" + std::to_string(env.action_dim) +
                                " but the checkpoint was trained on " + std::to_string(trained.state_dim) + "/" +
                                std::to_string(trained.action_dim));
  if (!trained.action_low.isApprox(env.action_low) || !trained.action_high.isApprox(env.action_high))
    throw std::invalid_argument("environment '" + env.name + "' has different action bounds than the checkpoint");
}

EvalReport evaluate(const Trainer& trainer, envs::Environment& env, const EvalOptions& options) {
  check_compatible(trainer.env_spec(), env.spec());
  if (options.n_episodes < 0) throw std::invalid_argument("n_episodes must be >= 0");
  const auto& policy = trainer.policy_model();
  EvalReport report;
  for (int e = 0; e < options.n_episodes; ++e) {
    const std::uint64_t ep_seed = derive_seed(options.seed, static_cast<std::uint64_t>(e));
    Vector s = env.reset(ep_seed);
    double ret = 0.0;
    int len = 0;
    for (;;) {
      const Vector a = policy::sample_action(policy, s, derive_seed(ep_seed, static_cast<std::uint64_t>(len) + 1),
                                             options.deterministic);
      const envs::StepResult r = env.step(a);
      ret += r.reward;
      ++len;
      if (r.terminal || r.truncated || len >= env.spec().max_episode_steps) break;
      s = r.next_state;
    }
    report.returns.push_back(ret);
    report.lengths.push_back(len);
  }
  if (!report.returns.empty()) {
    double m = 0.0;
    for (double r : report.returns) m += r;
    m /= static_cast<double>(report.returns.size());
    double v = 0.0;
    for (double r : report.returns) v += (r - m) * (r - m);
    report.mean_return = m;
    report.std_return = std::sqrt(v / static_cast<double>(report.returns.size()));
  }

  if (options.bias) {
    const auto& cfg = trainer.config();
    const double alpha = trainer.alpha().alpha;
    const value::ActionFn act = [&](const Vector& state, std::uint64_t seed) {
      return policy::explore_action(policy, state, alpha, cfg.exploration, seed);
    };
    entropy::EmOptions em;
    em.components = cfg.entropy.components;
    em.max_iters = cfg.entropy.em_max_iters;
    em.tol = cfg.entropy.em_tol;
    em.covariance_floor = cfg.entropy.covariance_floor;
    em.covariance = cfg.entropy.covariance;
    const auto sampler = policy::make_action_sampler(
        policy, value::Params::online, {cfg.exploration, alpha, cfg.entropy.include_exploration_noise});
    Rng lp_rng(derive_seed(options.seed, 0xb1a5));
    const value::LogProbFn log_prob = [&](const Vector& state, const Vector& action) {
      em.seed = lp_rng.next_u64();
      const Matrix draws = sampler(state, cfg.entropy.n_actions, lp_rng.next_u64());
      return entropy::gmm_log_density(entropy::em_fit(draws, em), action);
    };
    value::BiasOptions bo;
    bo.gamma = cfg.trainer.gamma;
    bo.n_episodes = options.bias_episodes;
    bo.alpha = alpha;
    bo.seed = derive_seed(options.seed, 0xb1a6);
    // Shortest horizon whose discounted tail bound fits the tolerance.
    const double r_max = std::max(env.spec().reward_bound(), 1e-12);
    if (bo.gamma > 0.0)
      bo.horizon = std::max(
          bo.horizon, static_cast<int>(std::ceil(std::log(bo.truncation_tol * (1.0 - bo.gamma) / r_max) /
                                                 std::log(bo.gamma))) + 1);
    report.bias = value::evaluate_bias(trainer.value_model(), env, act, bo, options.n_q_samples,
                                       alpha > 0.0 ? log_prob : value::LogProbFn{});
  }
  return report;
}

}  // namespace dsacd::runtime
