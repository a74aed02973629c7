#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "dsacd/random.hpp"
#include "dsacd/types.hpp"

namespace dsacd::envs {

/// Finite MDP with finitely supported rewards, used as ground truth for
/// distributional value learning.
struct OracleMdp {
  struct RewardAtom {
    double value;
    double prob;
  };

  int n_states = 0;
  int n_actions = 0;
  // transitions[s][a][s'] and rewards[s][a]
  std::vector<std::vector<std::vector<double>>> transitions;
  std::vector<std::vector<std::vector<RewardAtom>>> rewards;
  std::vector<bool> terminal;  // absorbing, zero-reward states
  double gamma = 0.9;

  /// Rows of the kernel and reward supports must sum to one.
  void validate(double tol = 1e-12) const;
  double max_abs_reward() const;
};

/// pi(a | s) as a table.
struct TabularPolicy {
  std::vector<std::vector<double>> probs;

  int sample(int state, Rng& rng) const;
  double log_prob(int state, int action) const { return std::log(probs[state][action]); }
};

/// Discrete distribution with atoms sorted by value.
struct DiscreteDistribution {
  std::vector<std::pair<double, double>> atoms;  // (value, probability)

  double total_probability() const;
  double mean() const;
  double min() const { return atoms.front().first; }
  double max() const { return atoms.back().first; }
};

struct OracleOptions {
  int horizon = 20;
  double alpha = 0.0;  // entropy bonus weight
  std::size_t node_budget = 2'000'000;
  double truncation_tol = 1e-6;
  // Partial returns are rounded to multiples of this, which moves the result
  // by at most horizon * resolution / 2 in W1. Branches with equal rounded
  // returns merge, so the frontier stays bounded.
  double resolution = 1e-4;
};

/// Exact law of r_0 + sum_{j>=1} gamma^j [r_j - alpha log pi(a_j | s_j)]
/// truncated after `horizon` rewards, by enumeration of every branch with
/// equal (rounded) partial returns merged. Throws std::invalid_argument when
/// gamma^horizon * r_max exceeds the truncation tolerance, and
/// std::length_error when the frontier outgrows the node budget.
DiscreteDistribution oracle_return_distribution(const OracleMdp& mdp, const TabularPolicy& policy,
                                                int state, int action, const OracleOptions& options);

/// Samples (reward, next_state) from the model.
std::pair<double, int> sample_transition(const OracleMdp& mdp, int state, int action, Rng& rng);

/// Monte-Carlo return of one truncated rollout.
double sample_return(const OracleMdp& mdp, const TabularPolicy& policy, int state, int action,
                     int horizon, double alpha, Rng& rng);

/// Two states, two actions, rewards +-1 with action-dependent odds.
OracleMdp two_state_mdp(double gamma = 0.5);

}  // namespace dsacd::envs
