#include "doctest.h"

#include <cmath>
#include <map>

#include "dsacd/envs/bimodal_bandit.hpp"
#include "dsacd/envs/constant_chain.hpp"
#include "dsacd/envs/oracle_mdp.hpp"
#include "dsacd/envs/point_mass.hpp"
#include "dsacd/envs/registry.hpp"
#include "support.hpp"

using namespace dsacd;
using namespace dsacd::envs;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Single state that loops onto itself paying reward 1.
OracleMdp unit_chain(double gamma) {
  OracleMdp m;
  m.n_states = 1;
  m.n_actions = 1;
  m.gamma = gamma;
  m.transitions = {{{1.0}}};
  m.rewards = {{{{1.0, 1.0}}}};
  m.terminal = {false};
  return m;
}

TabularPolicy uniform_policy(int states, int actions) {
  TabularPolicy p;
  p.probs.assign(static_cast<std::size_t>(states), std::vector<double>(static_cast<std::size_t>(actions), 1.0 / actions));
  return p;
}

}  // namespace

TEST_CASE("bandit rewards") {
  BimodalBandit env;
  CHECK(env.reward(0.6, 0.0) == doctest::Approx(1.0));
  CHECK(env.reward(-0.6, 0.0) == doctest::Approx(1.0));
  CHECK(env.reward(0.0, 0.0) == doctest::Approx(0.64));
  for (int i = 0; i <= 100; ++i) {
    const double a = -1.0 + 0.02 * i;
    CHECK(env.expected_reward(a) == doctest::Approx(env.expected_reward(-a)).epsilon(1e-15));
  }
  const EnvSpec& s = env.spec();
  CHECK(s.max_episode_steps == 1);
  CHECK(s.action_dim == 1);
}

TEST_CASE("bandit step is terminal with noisy reward") {
  BimodalBandit env;
  env.reset(5);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const StepResult r = env.step(vec({0.6}));
    CHECK(r.terminal);
    sum += r.reward;
    sq += r.reward * r.reward;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean - 1.0) < 4.0 * 0.05 / std::sqrt(n));
  CHECK(sd == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("bandit clips out-of-bounds actions") {
  BimodalBandit env({0.6, 0.0});
  env.reset(0);
  const StepResult r = env.step(vec({3.0}));
  CHECK(r.reward == doctest::Approx(env.expected_reward(1.0)));
  CHECK(env.clipped_actions() == 1);
  CHECK_THROWS_AS(env.step(vec({0.1, 0.2})), std::invalid_argument);
}

TEST_CASE("bandit noise stream survives a state round trip") {
  BimodalBandit a;
  a.reset(9);
  a.step(vec({0.1}));
  const std::string snap = a.save_state();
  const double next = a.step(vec({0.2})).reward;
  BimodalBandit b;
  b.load_state(snap);
  CHECK(b.step(vec({0.2})).reward == next);
}

TEST_CASE("point mass at rest stays put") {
  TwoGoalPointMass env;
  const Vector s0 = env.reset(0);
  CHECK(s0.head(4).isZero());
  const StepResult r = env.step(Vector::Zero(2));
  CHECK(r.next_state.head(4).isZero());
  CHECK(r.reward == doctest::Approx(-std::hypot(0.8, 2.0)).epsilon(1e-12));
  CHECK_FALSE(r.terminal);
}

TEST_CASE("point mass dynamics are a damped double integrator") {
  TwoGoalPointMass env;
  env.reset(0);
  const auto& p = env.params();
  const StepResult r = env.step(vec({0.5, -1.0}));
  const double vx = p.accel_scale * 0.5 * p.dt, vy = -p.accel_scale * p.dt;
  CHECK(r.next_state[2] == doctest::Approx(vx));
  CHECK(r.next_state[3] == doctest::Approx(vy));
  CHECK(r.next_state[0] == doctest::Approx(vx * p.dt));
  CHECK(r.next_state[1] == doctest::Approx(vy * p.dt));
  CHECK(r.next_state[4] == doctest::Approx(1.0 - 1.0 / p.max_steps));
}

TEST_CASE("obstacle penalty lowers reward") {
  TwoGoalPointMass env;
  Vector inside = Vector::Zero(5);
  inside[1] = 1.1;
  Vector beside = inside;
  beside[0] = 2.0;
  CHECK(env.obstacle_penetration(0.0, 1.1) > 0.0);
  CHECK(env.obstacle_penetration(2.0, 1.1) == 0.0);
  const double with = env.reward(inside, Vector::Zero(2));
  const double without = -env.goal_distance(0.0, 1.1);
  CHECK(with < without);
  CHECK(with == doctest::Approx(without - env.params().obstacle_penalty * env.obstacle_penetration(0.0, 1.1)));
}

TEST_CASE("straight paths to either goal cross the obstacle") {
  TwoGoalPointMass env;
  const auto& p = env.params();
  for (double side : {-1.0, 1.0}) {
    bool hit = false;
    for (int i = 0; i <= 100; ++i) {
      const double f = i / 100.0;
      hit = hit || env.obstacle_penetration(side * p.goal[0] * f, p.goal[1] * f) > 0.0;
    }
    CHECK(hit);
  }
}

TEST_CASE("reflected rollouts earn the same rewards") {
  Rng rng(3);
  TwoGoalPointMass a, b;
  a.reset(0);
  b.reset(0);
  for (int t = 0; t < 25; ++t) {
    const Vector act = (rng.normal_vector(2) * 0.7).cwiseMax(-1.0).cwiseMin(1.0);
    const StepResult ra = a.step(act);
    const StepResult rb = b.step(TwoGoalPointMass::reflect_action(act));
    CHECK(rb.reward == doctest::Approx(ra.reward).epsilon(1e-12));
    CHECK((rb.next_state - TwoGoalPointMass::reflect_state(ra.next_state)).norm() < 1e-12);
    CHECK(a.reached_goal(ra.next_state) == -b.reached_goal(rb.next_state));
    if (ra.terminal) break;
  }
}

TEST_CASE("reaching a goal ends the episode") {
  TwoGoalPointMass env;
  Vector s = Vector::Zero(5);
  s[0] = -0.8;
  s[1] = 1.95;
  env.set_state(s, 3);
  const StepResult r = env.step(Vector::Zero(2));
  CHECK(r.terminal);
  CHECK(env.reached_goal(r.next_state) == -1);
}

TEST_CASE("episodes end at the step limit") {
  TwoGoalPointMass env;
  env.reset(0);
  int steps = 0;
  StepResult r;
  do {
    r = env.step(Vector::Zero(2));
    ++steps;
  } while (!r.terminal && steps < 1000);
  CHECK(steps == env.params().max_steps);
  CHECK(r.next_state[4] == doctest::Approx(0.0));
}

TEST_CASE("point mass state round trip") {
  TwoGoalPointMass a;
  a.reset(0);
  a.step(vec({0.3, 0.9}));
  a.step(vec({-0.2, 0.4}));
  TwoGoalPointMass b;
  b.load_state(a.save_state());
  CHECK(b.state() == a.state());
  CHECK(b.step(vec({0.1, 0.1})).next_state == a.step(vec({0.1, 0.1})).next_state);
}

TEST_CASE("constant chain pays a fixed reward") {
  ConstantChain env(1.0, 50);
  env.reset(0);
  double discounted = 0.0, g = 1.0;
  for (int t = 0; t < 50; ++t) {
    const StepResult r = env.step(Vector::Zero(1));
    CHECK(r.reward == 1.0);
    discounted += g * r.reward;
    g *= 0.9;
    if (t < 49) CHECK_FALSE((r.terminal || r.truncated));
  }
  CHECK(discounted == doctest::Approx((1.0 - std::pow(0.9, 50)) / 0.1));
}

TEST_CASE("registry") {
  for (const auto& name : environment_names()) {
    auto env = make_environment(name);
    env->spec().validate();
    CHECK(env->spec().name == name);
  }
  auto bandit = make_environment("bimodal_bandit", {{"mode", 0.4}});
  CHECK(dynamic_cast<BimodalBandit&>(*bandit).params().mode == 0.4);
  CHECK_THROWS_AS(make_environment("cartpole"), std::invalid_argument);
  CHECK_THROWS_AS(make_environment("bimodal_bandit", {{"width", 1}}), std::invalid_argument);
}

TEST_CASE("oracle on a deterministic chain") {
  OracleOptions o;
  o.horizon = 3;
  o.truncation_tol = 1.0;
  const auto d = oracle_return_distribution(unit_chain(0.5), uniform_policy(1, 1), 0, 0, o);
  REQUIRE(d.atoms.size() == 1);
  CHECK(d.atoms[0].first == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(d.atoms[0].second == doctest::Approx(1.0));
}

TEST_CASE("oracle on a single fair coin") {
  OracleMdp m;
  m.n_states = 1;
  m.n_actions = 1;
  m.gamma = 0.0;
  m.transitions = {{{1.0}}};
  m.rewards = {{{{-1.0, 0.5}, {1.0, 0.5}}}};
  m.terminal = {false};
  OracleOptions o;
  o.horizon = 1;
  const auto d = oracle_return_distribution(m, uniform_policy(1, 1), 0, 0, o);
  REQUIRE(d.atoms.size() == 2);
  CHECK(d.atoms[0].first == doctest::Approx(-1.0));
  CHECK(d.atoms[0].second == 0.5);
  CHECK(d.atoms[1].first == doctest::Approx(1.0));
  CHECK(d.atoms[1].second == 0.5);
}

TEST_CASE("oracle probabilities sum to one") {
  const OracleMdp m = two_state_mdp(0.5);
  OracleOptions o;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      const auto d = oracle_return_distribution(m, uniform_policy(2, 2), s, a, o);
      CHECK(std::abs(d.total_probability() - 1.0) <= 1e-12);
      CHECK(std::is_sorted(d.atoms.begin(), d.atoms.end()));
    }
}

TEST_CASE("oracle agrees with Monte Carlo rollouts") {
  const OracleMdp m = two_state_mdp(0.5);
  TabularPolicy pi;
  pi.probs = {{0.3, 0.7}, {0.6, 0.4}};
  OracleOptions o;
  Rng rng(42);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      const auto d = oracle_return_distribution(m, pi, s, a, o);
      std::vector<double> mc(1000000);
      for (double& x : mc) x = sample_return(m, pi, s, a, o.horizon, 0.0, rng);
      CHECK(dsacd::testing::wasserstein1(mc, d.atoms) <= 0.01);
      CHECK(d.mean() == doctest::Approx(dsacd::testing::mean(mc)).epsilon(0.01));
    }
}

TEST_CASE("entropy bonus shifts the return from the second step on") {
  const OracleMdp m = two_state_mdp(0.5);
  const TabularPolicy pi = uniform_policy(2, 2);
  OracleOptions plain;
  OracleOptions soft = plain;
  soft.alpha = 0.3;
  const double bonus_tail = soft.alpha * std::log(2.0) * (0.5 - std::pow(0.5, plain.horizon)) / 0.5;
  const auto d0 = oracle_return_distribution(m, pi, 0, 1, plain);
  const auto d1 = oracle_return_distribution(m, pi, 0, 1, soft);
  CHECK(std::abs(d1.mean() - d0.mean() - bonus_tail) <= plain.horizon * plain.resolution);
}

TEST_CASE("oracle guards horizon and node budget") {
  const OracleMdp m = two_state_mdp(0.9);
  OracleOptions o;
  o.horizon = 5;
  CHECK_THROWS_AS(oracle_return_distribution(m, uniform_policy(2, 2), 0, 0, o), std::invalid_argument);
  OracleMdp wide = two_state_mdp(0.5);
  wide.rewards[0][0] = {{-1.0, 0.25}, {0.1, 0.25}, {0.37, 0.25}, {1.0, 0.25}};
  wide.rewards[0][1] = {{-0.9, 0.5}, {0.73, 0.5}};
  wide.rewards[1][0] = {{-0.55, 0.5}, {0.21, 0.5}};
  OracleOptions tight;
  tight.node_budget = 1000;
  CHECK_THROWS_AS(oracle_return_distribution(wide, uniform_policy(2, 2), 0, 0, tight), std::length_error);
}
