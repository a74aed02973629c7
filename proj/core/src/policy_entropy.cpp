#include "dsacd/entropy/policy_entropy.hpp"

#include <stdexcept>

#include "dsacd/random.hpp"

namespace dsacd::entropy {

std::vector<GmmFit> fit_state_mixtures(const ActionBatchSampler& sampler, const Matrix& states,
                                       Index n_actions, const EmOptions& em, std::uint64_t seed) {
  if (n_actions < em.components)
    throw std::invalid_argument("entropy estimate needs n_actions >= mixture components");
  if (states.cols() < 1) throw std::invalid_argument("entropy estimate needs at least one state");
  const Matrix actions = sampler(states, n_actions, seed);
  if (actions.cols() != states.cols() * n_actions)
    throw std::invalid_argument("action sampler returned the wrong number of columns");
  std::vector<GmmFit> fits;
  fits.reserve(static_cast<std::size_t>(states.cols()));
  for (Index s = 0; s < states.cols(); ++s) {
    EmOptions opts = em;
    opts.seed = derive_seed(em.seed, static_cast<std::uint64_t>(s));
    fits.push_back(em_fit(actions.middleCols(s * n_actions, n_actions), opts));
  }
  return fits;
}

EntropyEstimate estimate_policy_entropy(const ActionBatchSampler& sampler, const Matrix& states,
                                        Index n_actions, const EmOptions& em, std::uint64_t seed) {
  EntropyEstimate out;
  for (const auto& fit : fit_state_mixtures(sampler, states, n_actions, em, seed))
    out.per_state.push_back(gmm_entropy(fit));
  double sum = 0.0;
  for (double h : out.per_state) sum += h;
  out.mean = sum / static_cast<double>(out.per_state.size());
  return out;
}

}  // namespace dsacd::entropy
