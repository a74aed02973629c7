#pragma once

#include <cstdint>
#include <vector>

#include "dsacd/diffusion/loss.hpp"
#include "dsacd/random.hpp"
#include "dsacd/value/return_model.hpp"

namespace dsacd::value {

/// Column-batched transitions (s, a, r, s', terminal).
struct TransitionBatch {
  Matrix states;
  Matrix actions;
  Vector rewards;
  Matrix next_states;
  std::vector<bool> terminals;

  Index size() const { return rewards.size(); }
  void validate() const;
};

/// Next actions a' ~ pi(.|s') together with the log-density term that enters
/// the entropy-corrected target.
struct NextActionDraw {
  Matrix actions;
  Vector log_probs;
};

class NextActionSource {
 public:
  virtual ~NextActionSource() = default;
  virtual NextActionDraw draw(const Matrix& next_states, std::uint64_t seed) const = 0;
};

struct BellmanTargetBatch {
  Vector targets;
  Vector next_returns;    // z' draws (zero for terminal rows)
  Vector next_log_probs;  // log pi(a'|s') (zero for terminal rows)
  double gamma = 0.0;
  double alpha = 0.0;
};

/// target = r + gamma * (z' - alpha * log pi(a'|s')) with z' one draw from the
/// TARGET parameters of `model`; terminal rows get exactly r.
BellmanTargetBatch build_bellman_targets(const TransitionBatch& batch,
                                         const ReturnDistributionModel& model,
                                         const NextActionSource& policy, double alpha, double gamma,
                                         std::uint64_t seed);

/// Simplified denoising objective on standardized targets conditioned on
/// (s, a). Gradients flow to the online parameters only.
diffusion::LossAndGrad dvn_loss(const ReturnDistributionModel& model, const BellmanTargetBatch& targets,
                                const TransitionBatch& batch, Rng& rng, bool with_grad = true);

}  // namespace dsacd::value
