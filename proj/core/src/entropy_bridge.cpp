#include "dsacd/policy/entropy_bridge.hpp"

#include <stdexcept>

#include "dsacd/random.hpp"

namespace dsacd::policy {

LogProbMode parse_log_prob_mode(const std::string& name) {
  if (name == "gmm_log_density") return LogProbMode::gmm_log_density;
  if (name == "state_entropy") return LogProbMode::state_entropy;
  if (name == "batch_entropy") return LogProbMode::batch_entropy;
  throw std::invalid_argument("unknown log-probability mode '" + name + "'");
}

const char* to_string(LogProbMode mode) {
  switch (mode) {
    case LogProbMode::gmm_log_density:
      return "gmm_log_density";
    case LogProbMode::state_entropy:
      return "state_entropy";
    case LogProbMode::batch_entropy:
      return "batch_entropy";
  }
  return "?";
}

entropy::ActionBatchSampler make_action_sampler(const PolicyModel& policy, Params which,
                                                BehaviourNoise noise) {
  return [&policy, which, noise](const Matrix& states, Index n, std::uint64_t seed) {
    Matrix actions = sample_actions_batch(policy, states, n, derive_seed(seed, 0), false, which);
    const double scale = noise.include ? noise.exploration.noise_scale(noise.alpha) : 0.0;
    if (scale > 0.0) {
      Rng rng(derive_seed(seed, 1));
      actions = policy.clip(actions + scale * rng.normal_matrix(actions.rows(), actions.cols()));
    }
    return actions;
  };
}

value::NextActionDraw DiffusionNextActions::draw(const Matrix& next_states, std::uint64_t seed) const {
  const Index b = next_states.cols();
  value::NextActionDraw out;
  const auto sampler = make_action_sampler(policy_, which_, noise_);

  if (mode_ == LogProbMode::batch_entropy) {
    out.actions = sampler(next_states, 1, seed);
    out.log_probs = Vector::Constant(b, -cached_entropy_);
    return out;
  }

  // n_actions draws for the fit plus one held-out draw used as a'.
  const Index per = n_actions_ + 1;
  if (n_actions_ < em_.components)
    throw std::invalid_argument("mixture surrogate needs n_actions >= components");
  const Matrix draws = sampler(next_states, per, seed);
  out.actions.resize(policy_.action_dim(), b);
  out.log_probs.resize(b);
  for (Index j = 0; j < b; ++j) {
    entropy::EmOptions opts = em_;
    opts.seed = derive_seed(em_.seed ^ seed, static_cast<std::uint64_t>(j));
    const entropy::GmmFit fit = entropy::em_fit(draws.middleCols(j * per, n_actions_), opts);
    out.actions.col(j) = draws.col(j * per + n_actions_);
    out.log_probs[j] = mode_ == LogProbMode::gmm_log_density
                           ? entropy::gmm_log_density(fit, out.actions.col(j))
                           : -entropy::gmm_entropy(fit);
  }
  return out;
}

}  // namespace dsacd::policy
