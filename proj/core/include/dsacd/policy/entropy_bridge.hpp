#pragma once

#include <cstdint>
#include <string>

#include "dsacd/entropy/gmm.hpp"
#include "dsacd/entropy/policy_entropy.hpp"
#include "dsacd/policy/diffusion_policy.hpp"
#include "dsacd/value/bellman.hpp"

namespace dsacd::policy {

/// How the -alpha * log pi(a'|s') term of a Bellman target is evaluated.
enum class LogProbMode {
  gmm_log_density,  // log of a mixture fitted at s', evaluated at a'
  state_entropy,    // -H of the mixture fitted at s'
  batch_entropy,    // -H_hat from the most recent batch estimate
};

LogProbMode parse_log_prob_mode(const std::string& name);
const char* to_string(LogProbMode mode);

/// Behaviour distribution seen by the entropy machinery: the chain output,
/// optionally with the exploration noise lambda * alpha * N(0, I) added.
struct BehaviourNoise {
  ExplorationConfig exploration;
  double alpha = 0.0;
  bool include = true;
};

/// Batched sampler over `policy` suitable for mixture fitting.
entropy::ActionBatchSampler make_action_sampler(const PolicyModel& policy, Params which,
                                                BehaviourNoise noise);

/// Next-action source backed by the diffusion policy and a mixture density
/// surrogate fitted on demand at every next state.
class DiffusionNextActions final : public value::NextActionSource {
 public:
  DiffusionNextActions(const PolicyModel& policy, Params which, BehaviourNoise noise, LogProbMode mode,
                       Index n_actions, entropy::EmOptions em, double cached_entropy = 0.0)
      : policy_(policy), which_(which), noise_(noise), mode_(mode), n_actions_(n_actions), em_(em),
        cached_entropy_(cached_entropy) {}

  value::NextActionDraw draw(const Matrix& next_states, std::uint64_t seed) const override;

 private:
  const PolicyModel& policy_;
  Params which_;
  BehaviourNoise noise_;
  LogProbMode mode_;
  Index n_actions_;
  entropy::EmOptions em_;
  double cached_entropy_;
};

}  // namespace dsacd::policy
