#include "doctest.h"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include "dsacd/envs/bimodal_bandit.hpp"
#include "dsacd/envs/constant_chain.hpp"
#include "dsacd/envs/point_mass.hpp"
#include "dsacd/random.hpp"
#include "dsacd/runtime/checkpoint.hpp"
#include "dsacd/runtime/evaluate.hpp"
#include "dsacd/runtime/replay_buffer.hpp"
#include "dsacd/runtime/sampler_pool.hpp"
#include "dsacd/runtime/soft_update.hpp"
#include "dsacd/runtime/trainer.hpp"
#include "support.hpp"

using namespace dsacd;
using namespace dsacd::runtime;

namespace {

Transition item(double tag, Index sdim = 1, Index adim = 1) {
  return {Vector::Constant(sdim, tag), Vector::Constant(adim, -tag), tag, Vector::Constant(sdim, tag + 0.5), false};
}

io::RunConfig small_config(const std::string& env = "bimodal_bandit") {
  io::RunConfig c;
  c.env = env;
  for (auto* net : {&c.value_net, &c.policy_net}) {
    net->hidden = {8};
    net->time_embedding = 4;
    net->diffusion_steps = 5;
  }
  c.trainer.batch_size = 8;
  c.trainer.warmup_steps = 16;
  c.trainer.lr_value = 1e-3;
  c.trainer.lr_policy = 1e-3;
  c.trainer.lr_alpha = 1e-2;
  c.trainer.seed = 3;
  c.entropy.n_actions = 8;
  c.entropy.n_states = 2;
  c.entropy.em_max_iters = 5;
  return c;
}

Trainer warmed(io::RunConfig c) {
  Trainer t(std::move(c));
  while (t.buffer().size() < 16) t.train_iteration();
  return t;
}

}  // namespace

TEST_CASE("soft update blends elementwise") {
  Vector target(3), online(3);
  target << 1.0, 2.0, 3.0;
  online << -1.0, 0.0, 7.0;
  CHECK(soft_update(target, online, 0.0) == target);
  CHECK(soft_update(target, online, 1.0) == online);
  const Vector mid = soft_update(target, online, 0.25);
  for (Index i = 0; i < 3; ++i) CHECK(mid[i] == doctest::Approx(0.25 * online[i] + 0.75 * target[i]));
  CHECK_THROWS_AS(soft_update(target, online, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(soft_update(target, Vector::Zero(2), 0.5), std::invalid_argument);
}

TEST_CASE("replay buffer evicts the oldest items") {
  ReplayBuffer buf(5, 1, 1);
  for (int i = 0; i < 7; ++i) buf.add(item(i));
  CHECK(buf.size() == 5);
  const std::vector<Index> slots = {0, 4};
  const auto b = buf.gather(slots);
  CHECK(b.rewards[0] == 2.0);
  CHECK(b.rewards[1] == 6.0);
  CHECK(b.actions(0, 0) == -2.0);
  CHECK(b.next_states(0, 1) == 6.5);
  buf.clear();
  CHECK(buf.size() == 0);
  Rng rng(1);
  CHECK_THROWS(buf.sample(4, rng));
}

TEST_CASE("replay buffer rejects malformed transitions") {
  ReplayBuffer buf(4, 2, 1);
  CHECK_THROWS_AS(buf.add(item(1.0, 3, 1)), std::invalid_argument);
  Transition t = item(1.0, 2, 1);
  t.reward = std::nan("");
  CHECK_THROWS_AS(buf.add(t), std::invalid_argument);
  t = item(1.0, 2, 1);
  t.next_state[1] = INFINITY;
  CHECK_THROWS_AS(buf.add(t), std::invalid_argument);
  CHECK(buf.size() == 0);
  CHECK_THROWS_AS(ReplayBuffer(0, 1, 1), std::invalid_argument);
}

TEST_CASE("replay sampling is uniform over stored slots") {
  const Index cap = 50;
  ReplayBuffer buf(cap, 1, 1);
  for (int i = 0; i < 80; ++i) buf.add(item(i));
  Rng rng(2);
  std::vector<double> counts(cap, 0.0);
  const int n = 100000;
  for (int k = 0; k < n / 100; ++k)
    for (Index s : buf.sample_slots(100, rng)) counts[static_cast<std::size_t>(s)] += 1.0;
  const double expected = static_cast<double>(n) / cap;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  CHECK(chi2 <= dsacd::testing::chi2_quantile(cap - 1, 2.326));
}

TEST_CASE("replay storage round trip and copies") {
  ReplayBuffer buf(4, 1, 1);
  for (int i = 0; i < 6; ++i) buf.add(item(i));
  ReplayBuffer other(4, 1, 1);
  other.restore(buf.storage());
  ReplayBuffer copy(buf);
  const std::vector<Index> all = {0, 1, 2, 3};
  CHECK(other.gather(all).rewards == buf.gather(all).rewards);
  CHECK(copy.gather(all).rewards == buf.gather(all).rewards);
  other.add(item(10));
  CHECK(other.gather(all).rewards[3] == 10.0);
  CHECK(buf.gather(all).rewards[3] == 5.0);
}

TEST_CASE("concurrent adds are all recorded") {
  ReplayBuffer buf(10000, 1, 1);
  std::vector<std::thread> threads;
  for (int w = 0; w < 4; ++w)
    threads.emplace_back([&buf, w] {
      for (int i = 0; i < 500; ++i) buf.add(item(w * 1000 + i));
    });
  for (auto& th : threads) th.join();
  CHECK(buf.size() == 2000);
  std::vector<Index> all(2000);
  for (Index i = 0; i < 2000; ++i) all[static_cast<std::size_t>(i)] = i;
  const Vector r = buf.gather(all).rewards;
  double sum = r.sum();
  double expected = 0.0;
  for (int w = 0; w < 4; ++w)
    for (int i = 0; i < 500; ++i) expected += w * 1000 + i;
  CHECK(sum == expected);
}

TEST_CASE("collection does not depend on threading") {
  envs::TwoGoalPointMass proto;
  const ActionPicker act = [](const Vector&, std::uint64_t seed) {
    Rng rng(seed);
    return Vector(rng.normal_vector(2).cwiseMax(-1.0).cwiseMin(1.0));
  };
  SamplerPool a(proto, 3, 11), b(proto, 3, 11);
  ReplayBuffer ba(1000, 5, 2), bb(1000, 5, 2);
  const auto sa = collect(a, act, 40, ba, true);
  const auto sb = collect(b, act, 40, bb, false);
  CHECK(ba.size() == 120);
  CHECK(ba.storage().states == bb.storage().states);
  CHECK(ba.storage().rewards == bb.storage().rewards);
  CHECK(sa.returns == sb.returns);
  CHECK(sa.lengths.size() == 3);  // 40 steps is one 25-step episode per sampler
  // Sampler order: the first 40 rows come from sampler 0.
  const std::vector<Index> first = {0};
  CHECK(ba.gather(first).states.col(0).head(4).isZero());
}

TEST_CASE("sampler failures name the sampler") {
  envs::BimodalBandit proto;
  SamplerPool pool(proto, 2, 1);
  ReplayBuffer buf(100, 1, 1);
  const ActionPicker bad = [](const Vector&, std::uint64_t) { return Vector(Vector::Zero(3)); };
  try {
    collect(pool, bad, 1, buf, false);
    FAIL("expected a failure");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("sampler 0") != std::string::npos);
  }
}

TEST_CASE("warmup collects before any update") {
  Trainer t(small_config());
  const auto m = t.train_iteration();
  CHECK(m.warmup);
  CHECK(m.updates == 0);
  CHECK(std::isnan(m.value_loss));
  for (int i = 0; i < 20; ++i) t.train_iteration();
  CHECK(t.updates() > 0);
  CHECK(t.env_steps() == 21);
}

TEST_CASE("fractional update ratio") {
  auto c = small_config();
  c.trainer.updates_per_step = 0.5;
  Trainer t(c);
  for (int i = 0; i < 56; ++i) t.train_iteration();
  // warmup ends when the buffer holds 16 items; 40 paid steps buy 20 updates
  CHECK(t.updates() == 20);
}

TEST_CASE("off-gate updates leave policy, temperature and targets bit-identical") {
  auto c = small_config();
  c.trainer.delayed_update_interval = 3;
  Trainer t = warmed(c);
  const long long k0 = t.updates();
  while (t.updates() % 3 != 1) t.update_step();
  for (int rep = 0; rep < 2; ++rep) {
    const Vector omega = t.policy_model().predictor().params();
    const Vector omega_t = t.policy_model().predictor(value::Params::target).params();
    const Vector theta = t.value_model().predictor().params();
    const Vector theta_t = t.value_model().predictor(value::Params::target).params();
    const double alpha = t.alpha().alpha;
    const auto m = t.update_step();
    CHECK_FALSE(m.policy_objective.has_value());
    CHECK_FALSE(m.alpha_step.has_value());
    CHECK(t.policy_model().predictor().params() == omega);
    CHECK(t.policy_model().predictor(value::Params::target).params() == omega_t);
    CHECK(t.value_model().predictor(value::Params::target).params() == theta_t);
    CHECK(t.alpha().alpha == alpha);
    CHECK(t.value_model().predictor().params() != theta);
  }
  const Vector omega = t.policy_model().predictor().params();
  const auto gated = t.update_step();
  CHECK(gated.policy_objective.has_value());
  CHECK(gated.alpha_step.has_value());
  CHECK(t.policy_model().predictor().params() != omega);
  CHECK(t.updates() > k0);
}

TEST_CASE("zero rates freeze their parameters") {
  auto c = small_config();
  c.trainer.lr_value = 0.0;
  c.trainer.tau = 0.0;
  Trainer t = warmed(c);
  const Vector theta = t.value_model().predictor().params();
  const Vector theta_t = t.value_model().predictor(value::Params::target).params();
  const Vector omega_t = t.policy_model().predictor(value::Params::target).params();
  for (int i = 0; i < 6; ++i) t.update_step();
  CHECK(t.value_model().predictor().params() == theta);
  CHECK(t.value_model().predictor(value::Params::target).params() == theta_t);
  CHECK(t.policy_model().predictor(value::Params::target).params() == omega_t);
}

TEST_CASE("identical seeds give identical runs") {
  Trainer a(small_config()), b(small_config());
  for (int i = 0; i < 30; ++i) {
    a.train_iteration();
    b.train_iteration();
  }
  CHECK(a.checkpoint_bytes() == b.checkpoint_bytes());
  auto c = small_config();
  c.trainer.seed = 4;
  Trainer d(c);
  for (int i = 0; i < 30; ++i) d.train_iteration();
  CHECK(d.checkpoint_bytes() != a.checkpoint_bytes());
}

TEST_CASE("resuming from a checkpoint continues the run exactly") {
  Trainer straight(small_config());
  for (int i = 0; i < 40; ++i) straight.train_iteration();

  Trainer first(small_config());
  for (int i = 0; i < 25; ++i) first.train_iteration();
  Trainer resumed = Trainer::from_checkpoint_bytes(first.checkpoint_bytes());
  CHECK(resumed.checkpoint_bytes() == first.checkpoint_bytes());
  for (int i = 0; i < 15; ++i) resumed.train_iteration();
  CHECK(resumed.checkpoint_bytes() == straight.checkpoint_bytes());
}

TEST_CASE("checkpoint files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "dsacd_test_runtime";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "ck.bin").string();
  Trainer t = warmed(small_config());
  t.save_checkpoint(path);
  CHECK(Trainer::load_checkpoint(path).checkpoint_bytes() == t.checkpoint_bytes());
  t.save_checkpoint(path, false);
  const Trainer light = Trainer::load_checkpoint(path);
  CHECK(light.buffer().size() == 0);
  CHECK(light.policy_model().predictor().params() == t.policy_model().predictor().params());
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(Trainer::load_checkpoint(path), CheckpointError);
}

TEST_CASE("damaged checkpoints are rejected") {
  Trainer t(small_config());
  const std::string bytes = t.checkpoint_bytes();
  CHECK_THROWS_AS(Trainer::from_checkpoint_bytes(bytes.substr(0, bytes.size() / 2)), CheckpointError);
  CHECK_THROWS_AS(Trainer::from_checkpoint_bytes(""), CheckpointError);
  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x40;
  CHECK_THROWS_AS(Trainer::from_checkpoint_bytes(flipped), CheckpointError);
}

TEST_CASE("checkpoint version mismatch reports both versions") {
  RecordWriter w;
  w.put("x", 1.5);
  const std::string future = w.finish(kCheckpointVersion + 1);
  try {
    RecordReader r(future);
    FAIL("expected a version error");
  } catch (const CheckpointError& e) {
    CHECK(e.expected_version() == kCheckpointVersion);
    CHECK(e.found_version() == kCheckpointVersion + 1);
  }
  const RecordReader ok(w.finish());
  CHECK(ok.scalar("x") == 1.5);
  CHECK_THROWS_AS(ok.scalar("y"), CheckpointError);
}

TEST_CASE("record types round trip") {
  Rng rng(5);
  const Matrix m = rng.normal_matrix(3, 4);
  const Vector v = rng.normal_vector(6);
  RecordWriter w;
  w.put("m", m);
  w.put("v", v);
  w.put("n", -42LL);
  w.put("s", std::string("a\0b", 3));
  const RecordReader r(w.finish());
  CHECK(r.matrix("m") == m);
  CHECK(r.vector("v") == v);
  CHECK(r.integer("n") == -42);
  CHECK(r.bytes("s") == std::string("a\0b", 3));
}

TEST_CASE("evaluation rolls out episodes and checks compatibility") {
  Trainer t = warmed(small_config());
  envs::BimodalBandit env;
  EvalOptions o;
  o.n_episodes = 7;
  const auto rep = evaluate(t, env, o);
  CHECK(rep.returns.size() == 7);
  CHECK(rep.lengths == std::vector<int>(7, 1));
  CHECK(rep.mean_return == doctest::Approx(dsacd::testing::mean(rep.returns)));
  CHECK_FALSE(rep.bias.has_value());
  o.bias = true;
  o.bias_episodes = 3;
  o.n_q_samples = 4;
  const auto with_bias = evaluate(t, env, o);
  REQUIRE(with_bias.bias.has_value());
  CHECK(with_bias.bias->n_pairs == 3);

  envs::TwoGoalPointMass other;
  CHECK_THROWS_AS(evaluate(t, other, o), std::invalid_argument);
  CHECK_THROWS_AS(check_compatible(env.spec(), other.spec()), std::invalid_argument);
  check_compatible(env.spec(), env.spec());
}
