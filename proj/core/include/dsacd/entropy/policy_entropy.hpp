#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dsacd/entropy/gmm.hpp"
#include "dsacd/types.hpp"

namespace dsacd::entropy {

/// Draws `n_per_state` actions for every column of `states`. The result is
/// d x (n_states * n_per_state), grouped by state.
using ActionBatchSampler =
    std::function<Matrix(const Matrix& states, Index n_per_state, std::uint64_t seed)>;

struct EntropyEstimate {
  double mean = 0.0;
  std::vector<double> per_state;
};

/// Per state: sample actions, fit a mixture, take its entropy. Returns the
/// batch mean together with the individual values.
EntropyEstimate estimate_policy_entropy(const ActionBatchSampler& sampler, const Matrix& states,
                                        Index n_actions, const EmOptions& em, std::uint64_t seed);

/// Mixture fits for every state in the batch, from one batched sampler call.
std::vector<GmmFit> fit_state_mixtures(const ActionBatchSampler& sampler, const Matrix& states,
                                       Index n_actions, const EmOptions& em, std::uint64_t seed);

}  // namespace dsacd::entropy
