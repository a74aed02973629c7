#include "dsacd/envs/oracle_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace dsacd::envs {

void OracleMdp::validate(double tol) const {
  if (n_states < 1 || n_actions < 1) throw std::invalid_argument("oracle MDP needs states and actions");
  if (static_cast<int>(transitions.size()) != n_states || static_cast<int>(rewards.size()) != n_states)
    throw std::invalid_argument("oracle MDP tables do not cover every state");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("oracle MDP gamma must lie in [0, 1)");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      double row = 0.0;
      for (double p : transitions[s][a]) {
        if (p < 0.0) throw std::invalid_argument("negative transition probability");
        row += p;
      }
      if (std::abs(row - 1.0) > tol)
        throw std::invalid_argument("transition row (" + std::to_string(s) + ", " + std::to_string(a) +
                                    ") does not sum to one");
      double mass = 0.0;
      for (const auto& atom : rewards[s][a]) mass += atom.prob;
      if (rewards[s][a].empty() || std::abs(mass - 1.0) > tol)
        throw std::invalid_argument("reward support of (" + std::to_string(s) + ", " + std::to_string(a) +
                                    ") does not sum to one");
    }
  }
}

double OracleMdp::max_abs_reward() const {
  double m = 0.0;
  for (const auto& per_state : rewards)
    for (const auto& atoms : per_state)
      for (const auto& atom : atoms) m = std::max(m, std::abs(atom.value));
  return m;
}

int TabularPolicy::sample(int state, Rng& rng) const {
  const auto& row = probs[static_cast<std::size_t>(state)];
  double u = rng.uniform();
  for (std::size_t a = 0; a + 1 < row.size(); ++a) {
    u -= row[a];
    if (u < 0.0) return static_cast<int>(a);
  }
  return static_cast<int>(row.size()) - 1;
}

double DiscreteDistribution::total_probability() const {
  double p = 0.0;
  for (const auto& [v, q] : atoms) p += q;
  return p;
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (const auto& [v, q] : atoms) m += v * q;
  return m;
}

DiscreteDistribution oracle_return_distribution(const OracleMdp& mdp, const TabularPolicy& policy,
                                                int state, int action, const OracleOptions& options) {
  mdp.validate();
  if (options.horizon < 1) throw std::invalid_argument("oracle horizon must be >= 1");
  if (!(options.resolution > 0.0)) throw std::invalid_argument("oracle resolution must be positive");
  const double r_max = mdp.max_abs_reward();
  if (std::pow(mdp.gamma, options.horizon) * r_max > options.truncation_tol)
    throw std::invalid_argument("horizon " + std::to_string(options.horizon) +
                                " too short: gamma^horizon * r_max exceeds the truncation tolerance");

  // Partial returns live on the grid k * resolution.
  const double h = options.resolution;
  auto snap = [h](double g) { return std::llround(g / h); };

  struct Node {
    int s, a;
    long long k;
    bool operator==(const Node& o) const { return s == o.s && a == o.a && k == o.k; }
  };
  struct NodeHash {
    std::size_t operator()(const Node& n) const {
      std::size_t x = std::hash<long long>{}(n.k);
      return x ^ (static_cast<std::size_t>(n.s) * 0x9e3779b97f4a7c15ULL + static_cast<std::size_t>(n.a) * 0x85ebca6bULL);
    }
  };
  std::unordered_map<Node, double, NodeHash> frontier{{Node{state, action, 0}, 1.0}};
  std::map<long long, double> finished;
  double discount = 1.0;

  for (int depth = 0; depth < options.horizon && !frontier.empty(); ++depth) {
    std::unordered_map<Node, double, NodeHash> next;
    const double next_discount = discount * mdp.gamma;
    for (const auto& [node, p] : frontier) {
      const double g = static_cast<double>(node.k) * h;
      for (const auto& atom : mdp.rewards[node.s][node.a]) {
        if (atom.prob <= 0.0) continue;
        const double with_reward = g + discount * atom.value;
        const double p_reward = p * atom.prob;
        if (depth + 1 == options.horizon) {
          finished[snap(with_reward)] += p_reward;
          continue;
        }
        const auto& row = mdp.transitions[node.s][node.a];
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
          const double pt = row[static_cast<std::size_t>(s2)];
          if (pt <= 0.0) continue;
          if (!mdp.terminal.empty() && mdp.terminal[static_cast<std::size_t>(s2)]) {
            finished[snap(with_reward)] += p_reward * pt;
            continue;
          }
          for (int a2 = 0; a2 < mdp.n_actions; ++a2) {
            const double pa = policy.probs[static_cast<std::size_t>(s2)][static_cast<std::size_t>(a2)];
            if (pa <= 0.0) continue;
            const double bonus = options.alpha > 0.0 ? -options.alpha * std::log(pa) * next_discount : 0.0;
            next[Node{s2, a2, snap(with_reward + bonus)}] += p_reward * pt * pa;
          }
        }
      }
      if (next.size() > options.node_budget)
        throw std::length_error("return enumeration exceeded the node budget of " +
                                std::to_string(options.node_budget) + "; use a smaller horizon or coarser resolution");
    }
    frontier = std::move(next);
    discount = next_discount;
  }

  DiscreteDistribution out;
  out.atoms.reserve(finished.size());
  for (const auto& [k, p] : finished) out.atoms.emplace_back(static_cast<double>(k) * h, p);
  return out;
}

std::pair<double, int> sample_transition(const OracleMdp& mdp, int state, int action, Rng& rng) {
  const auto& atoms = mdp.rewards[static_cast<std::size_t>(state)][static_cast<std::size_t>(action)];
  double u = rng.uniform();
  double r = atoms.back().value;
  for (const auto& atom : atoms) {
    u -= atom.prob;
    if (u < 0.0) {
      r = atom.value;
      break;
    }
  }
  const auto& row = mdp.transitions[static_cast<std::size_t>(state)][static_cast<std::size_t>(action)];
  double v = rng.uniform();
  int next = mdp.n_states - 1;
  for (int s2 = 0; s2 < mdp.n_states; ++s2) {
    v -= row[static_cast<std::size_t>(s2)];
    if (v < 0.0) {
      next = s2;
      break;
    }
  }
  return {r, next};
}

double sample_return(const OracleMdp& mdp, const TabularPolicy& policy, int state, int action,
                     int horizon, double alpha, Rng& rng) {
  double total = 0.0, discount = 1.0;
  int s = state, a = action;
  for (int depth = 0; depth < horizon; ++depth) {
    const auto [r, s2] = sample_transition(mdp, s, a, rng);
    total += discount * r;
    if (depth + 1 == horizon) break;
    if (!mdp.terminal.empty() && mdp.terminal[static_cast<std::size_t>(s2)]) break;
    discount *= mdp.gamma;
    s = s2;
    a = policy.sample(s, rng);
    if (alpha > 0.0) total -= discount * alpha * policy.log_prob(s, a);
  }
  return total;
}

OracleMdp two_state_mdp(double gamma) {
  OracleMdp m;
  m.n_states = 2;
  m.n_actions = 2;
  m.gamma = gamma;
  // Action a heads to state a with probability 0.8.
  m.transitions = {{{0.8, 0.2}, {0.2, 0.8}}, {{0.8, 0.2}, {0.2, 0.8}}};
  auto pm = [](double p_plus) {
    return std::vector<OracleMdp::RewardAtom>{{-1.0, 1.0 - p_plus}, {1.0, p_plus}};
  };
  m.rewards = {{pm(0.5), pm(0.8)}, {pm(0.2), pm(0.5)}};
  m.terminal = {false, false};
  return m;
}

}  // namespace dsacd::envs
