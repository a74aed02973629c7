#include "dsacd/value/bellman.hpp"

#include <cmath>
#include <stdexcept>

namespace dsacd::value {

void TransitionBatch::validate() const {
  const Index n = rewards.size();
  if (states.cols() != n || actions.cols() != n || next_states.cols() != n ||
      static_cast<Index>(terminals.size()) != n)
    throw std::invalid_argument("transition batch columns disagree in size");
}

BellmanTargetBatch build_bellman_targets(const TransitionBatch& batch,
                                         const ReturnDistributionModel& model,
                                         const NextActionSource& policy, double alpha, double gamma,
                                         std::uint64_t seed) {
  batch.validate();
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  if (alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");

  const Index n = batch.size();
  BellmanTargetBatch out;
  out.gamma = gamma;
  out.alpha = alpha;
  out.targets = batch.rewards;
  out.next_returns = Vector::Zero(n);
  out.next_log_probs = Vector::Zero(n);

  std::vector<Index> live;
  for (Index j = 0; j < n; ++j)
    if (!batch.terminals[static_cast<std::size_t>(j)]) live.push_back(j);
  if (live.empty() || gamma == 0.0) return out;

  Matrix next_states(batch.next_states.rows(), static_cast<Index>(live.size()));
  for (std::size_t i = 0; i < live.size(); ++i) next_states.col(static_cast<Index>(i)) = batch.next_states.col(live[i]);

  const NextActionDraw draw = policy.draw(next_states, derive_seed(seed, 0));
  if (draw.actions.cols() != next_states.cols() || draw.log_probs.size() != next_states.cols())
    throw std::runtime_error("next-action source returned a malformed draw");
  const Vector z_next = model.sample_batch(next_states, draw.actions, derive_seed(seed, 1), Params::target);

  for (std::size_t i = 0; i < live.size(); ++i) {
    const Index j = live[i], k = static_cast<Index>(i);
    out.next_returns[j] = z_next[k];
    out.next_log_probs[j] = draw.log_probs[k];
    out.targets[j] = batch.rewards[j] + gamma * (z_next[k] - alpha * draw.log_probs[k]);
  }
  if (!out.targets.allFinite()) throw std::runtime_error("non-finite Bellman target");
  return out;
}

diffusion::LossAndGrad dvn_loss(const ReturnDistributionModel& model, const BellmanTargetBatch& targets,
                                const TransitionBatch& batch, Rng& rng, bool with_grad) {
  batch.validate();
  if (batch.size() == 0) throw std::invalid_argument("dvn_loss needs a non-empty batch");
  if (targets.targets.size() != batch.size())
    throw std::invalid_argument("Bellman targets are not aligned with the transitions");
  Matrix x0(1, batch.size());
  for (Index j = 0; j < batch.size(); ++j) x0(0, j) = model.normalizer().normalize(targets.targets[j]);
  const Matrix cond = model.conditioning(batch.states, batch.actions);
  return diffusion::simple_denoising_loss(x0, cond, model.predictor(), model.schedule(), rng, with_grad);
}

}  // namespace dsacd::value
