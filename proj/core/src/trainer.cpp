#include "dsacd/runtime/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "dsacd/diffusion/schedule.hpp"
#include "dsacd/entropy/policy_entropy.hpp"
#include "dsacd/envs/registry.hpp"
#include "dsacd/nn/mlp_predictor.hpp"
#include "dsacd/policy/entropy_bridge.hpp"
#include "dsacd/runtime/checkpoint.hpp"
#include "dsacd/runtime/soft_update.hpp"
#include "dsacd/value/bellman.hpp"

namespace dsacd::runtime {

namespace {

using value::Params;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Streams derived from the run seed.
enum : std::uint64_t { kValueInit = 101, kPolicyInit = 102, kLearner = 103, kSamplers = 104, kEm = 105 };

diffusion::NoiseSchedule make_net_schedule(const io::NetworkConfig& net) {
  return diffusion::make_schedule(net.diffusion_steps, net.beta_min, net.beta_max, net.schedule);
}

nn::MlpPredictorConfig predictor_config(const io::NetworkConfig& net, Index sample_dim, Index cond_dim) {
  nn::MlpPredictorConfig c;
  c.sample_dim = sample_dim;
  c.cond_dim = cond_dim;
  c.hidden = net.hidden;
  c.time_embedding = net.time_embedding;
  c.activation = net.activation;
  c.output_scale = net.output_scale;
  if (net.prior_skip) {
    const auto schedule = make_net_schedule(net);
    for (int t = 1; t <= schedule.steps; ++t) c.sample_skip.push_back(std::sqrt(1.0 - schedule.alpha_bar(t)));
  }
  return c;
}

entropy::AlphaController make_alpha(const io::RunConfig& config, const envs::EnvSpec& spec) {
  entropy::AlphaController a;
  a.alpha = config.entropy.alpha_init;
  a.learning_rate = config.trainer.lr_alpha;
  a.target_entropy = config.entropy.has_target_entropy
                         ? config.entropy.target_entropy
                         : entropy::default_target_entropy(static_cast<int>(spec.action_dim));
  a.alpha_min = config.entropy.alpha_min;
  a.alpha_max = config.entropy.alpha_max;
  return a;
}

entropy::EmOptions em_options(const io::RunConfig& config) {
  entropy::EmOptions em;
  em.components = config.entropy.components;
  em.max_iters = config.entropy.em_max_iters;
  em.tol = config.entropy.em_tol;
  em.covariance_floor = config.entropy.covariance_floor;
  em.covariance = config.entropy.covariance;
  em.seed = derive_seed(config.trainer.seed, kEm);
  return em;
}

std::unique_ptr<envs::Environment> build_env(const io::RunConfig& config) {
  config.trainer.validate();
  auto env = envs::make_environment(config.env, config.env_overrides);
  env->spec().validate();
  return env;
}

}  // namespace

value::ReturnDistributionModel make_value_model(const io::RunConfig& config, const envs::EnvSpec& spec) {
  Rng rng(derive_seed(config.trainer.seed, kValueInit));
  auto pred = std::make_unique<nn::MlpNoisePredictor>(
      predictor_config(config.value_net, 1, spec.state_dim + spec.action_dim), rng);
  value::ReturnDistributionModel model(std::move(pred), make_net_schedule(config.value_net), spec.state_dim,
                                       spec.action_dim);
  model.normalizer().enabled = config.trainer.normalize_returns;
  model.normalizer().momentum = config.trainer.normalizer_momentum;
  return model;
}

policy::PolicyModel make_policy_model(const io::RunConfig& config, const envs::EnvSpec& spec) {
  Rng rng(derive_seed(config.trainer.seed, kPolicyInit));
  auto pred = std::make_unique<nn::MlpNoisePredictor>(
      predictor_config(config.policy_net, spec.action_dim, spec.state_dim), rng);
  return policy::PolicyModel(std::move(pred), make_net_schedule(config.policy_net), spec.action_low,
                             spec.action_high);
}

Trainer::Trainer(io::RunConfig config) : Trainer(config, build_env(config)) {}

Trainer::Trainer(io::RunConfig config, std::unique_ptr<envs::Environment> env)
    : config_(std::move(config)),
      spec_(env->spec()),
      value_(make_value_model(config_, spec_)),
      policy_(make_policy_model(config_, spec_)),
      alpha_(make_alpha(config_, spec_)),
      value_opt_(value_.predictor().param_count(), nn::AdamConfig{config_.trainer.lr_value}),
      policy_opt_(policy_.predictor().param_count(), nn::AdamConfig{config_.trainer.lr_policy}),
      buffer_(config_.trainer.buffer_capacity, spec_.state_dim, spec_.action_dim),
      pool_(*env, config_.trainer.n_samplers, derive_seed(config_.trainer.seed, kSamplers)),
      learner_rng_(derive_seed(config_.trainer.seed, kLearner)),
      last_entropy_(kNaN),
      last_policy_objective_(kNaN) {}

policy::BehaviourNoise Trainer::behaviour_noise() const {
  return {config_.exploration, alpha_.alpha, config_.entropy.include_exploration_noise};
}

std::string Trainer::snapshot() const {
  std::ostringstream os;
  os << "iteration=" << iteration_ << " update=" << updates_ << " env_steps=" << env_steps_
     << " alpha=" << alpha_.alpha << " last_entropy=" << last_entropy_
     << " normalizer_mean=" << value_.normalizer().mean << " normalizer_var=" << value_.normalizer().variance
     << " |theta|=" << value_.predictor().params().norm() << " |omega|=" << policy_.predictor().params().norm()
     << " buffer=" << buffer_.size();
  return os.str();
}

UpdateMetrics Trainer::update_step() {
  const auto& tc = config_.trainer;
  if (buffer_.size() == 0) throw std::logic_error("update_step called with an empty replay buffer");
  const value::TransitionBatch batch = buffer_.sample(tc.batch_size, learner_rng_);
  const policy::BehaviourNoise noise = behaviour_noise();
  const entropy::EmOptions em = em_options(config_);

  const double cached = std::isnan(last_entropy_) ? alpha_.target_entropy : last_entropy_;
  const policy::DiffusionNextActions next(policy_, Params::target, noise, config_.entropy.log_prob_mode,
                                          config_.entropy.n_actions, em, cached);
  const value::BellmanTargetBatch targets =
      value::build_bellman_targets(batch, value_, next, alpha_.alpha, tc.gamma, learner_rng_.next_u64());
  if (!targets.targets.allFinite()) throw NumericalError("non-finite Bellman target; " + snapshot());

  value_.normalizer().observe(targets.targets);
  const diffusion::LossAndGrad loss = value::dvn_loss(value_, targets, batch, learner_rng_, true);
  if (!std::isfinite(loss.loss) || !loss.grad.allFinite())
    throw NumericalError("non-finite DVN loss or gradient (J_z=" + std::to_string(loss.loss) + "); " + snapshot());
  if (tc.lr_value > 0.0) {
    Vector theta = value_.predictor().params();
    value_opt_.step(theta, loss.grad);
    value_.predictor().set_params(theta);
  }

  UpdateMetrics m;
  m.update = updates_;
  m.value_loss = loss.loss;
  m.target_mean = targets.targets.mean();

  if (updates_ % tc.delayed_update_interval == 0) {
    const value::DiffusionCritic critic(value_, tc.n_q_samples);
    const policy::PolicyLossResult pl = policy::policy_loss(policy_, critic, batch.states, learner_rng_, true);
    if (!std::isfinite(pl.objective) || !pl.grad.allFinite())
      throw NumericalError("non-finite policy objective or gradient (Q=" + std::to_string(pl.objective) +
                           "); " + snapshot());
    if (tc.lr_policy > 0.0) {
      Vector omega = policy_.predictor().params();
      policy_opt_.step(omega, -pl.grad);
      policy_.predictor().set_params(omega);
    }
    m.policy_objective = pl.objective;
    last_policy_objective_ = pl.objective;

    const Index n_states = std::min(config_.entropy.n_states, batch.states.cols());
    const auto sampler = policy::make_action_sampler(policy_, Params::online, noise);
    const entropy::EntropyEstimate est = entropy::estimate_policy_entropy(
        sampler, batch.states.leftCols(n_states), config_.entropy.n_actions, em, learner_rng_.next_u64());
    if (!std::isfinite(est.mean)) throw NumericalError("non-finite entropy estimate; " + snapshot());
    m.entropy = est.mean;
    last_entropy_ = est.mean;
    m.alpha_step = entropy::update_alpha(alpha_, est.mean);

    auto& vt = value_.predictor(Params::target);
    vt.set_params(soft_update(vt.params(), value_.predictor().params(), tc.tau));
    auto& pt = policy_.predictor(Params::target);
    pt.set_params(soft_update(pt.params(), policy_.predictor().params(), tc.tau));
  }
  ++updates_;
  return m;
}

IterationMetrics Trainer::train_iteration() {
  const auto start = std::chrono::steady_clock::now();
  const auto& tc = config_.trainer;
  IterationMetrics m;
  m.iteration = iteration_;

  // Samplers act on a frozen copy so the learner never races them.
  const policy::PolicyModel snapshot_policy = policy_;
  const EpisodeStats stats =
      collect(pool_, snapshot_policy, alpha_.alpha, config_.exploration, tc.steps_per_iteration, buffer_);
  const long long collected = static_cast<long long>(tc.steps_per_iteration) * pool_.size();
  env_steps_ += collected;

  const long long ready = std::max<long long>(tc.batch_size, tc.resolved_warmup());
  m.warmup = buffer_.size() < ready;
  double loss_sum = 0.0;
  double target_sum = 0.0;
  int n_updates = 0;
  if (!m.warmup) {
    update_credit_ += tc.updates_per_step * static_cast<double>(collected);
    while (update_credit_ >= 1.0) {
      update_credit_ -= 1.0;
      const UpdateMetrics u = update_step();
      loss_sum += u.value_loss;
      target_sum += u.target_mean;
      ++n_updates;
      if (u.alpha_step) m.alpha_steps.push_back(*u.alpha_step);
    }
  }

  ++iteration_;
  m.env_steps = env_steps_;
  m.updates = updates_;
  m.value_loss = n_updates > 0 ? loss_sum / n_updates : kNaN;
  m.q_mean = n_updates > 0 ? target_sum / n_updates : kNaN;
  m.policy_objective = last_policy_objective_;
  m.entropy = last_entropy_;
  m.alpha = alpha_.alpha;
  m.episode_return_mean = stats.mean_return();
  m.episode_return_std = stats.std_return();
  m.episodes = static_cast<int>(stats.returns.size());
  m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return m;
}

std::string Trainer::checkpoint_bytes(bool include_buffer) const {
  RecordWriter w;
  w.put("config", io::to_json(config_).dump());
  w.put("value.online", value_.predictor(Params::online).params());
  w.put("value.target", value_.predictor(Params::target).params());
  w.put("policy.online", policy_.predictor(Params::online).params());
  w.put("policy.target", policy_.predictor(Params::target).params());
  const auto& norm = value_.normalizer();
  w.put("normalizer.mean", norm.mean);
  w.put("normalizer.variance", norm.variance);
  w.put("normalizer.initialized", static_cast<long long>(norm.initialized));
  w.put("alpha", alpha_.alpha);
  for (const auto& [name, opt] : {std::pair{"value_opt", &value_opt_}, std::pair{"policy_opt", &policy_opt_}}) {
    w.put(std::string(name) + ".m", opt->first_moment);
    w.put(std::string(name) + ".v", opt->second_moment);
    w.put(std::string(name) + ".t", opt->step_count);
  }
  w.put("counter.iteration", iteration_);
  w.put("counter.updates", updates_);
  w.put("counter.env_steps", env_steps_);
  w.put("update_credit", update_credit_);
  w.put("last_entropy", last_entropy_);
  w.put("last_policy_objective", last_policy_objective_);
  w.put("rng.learner", learner_rng_.serialize());
  w.put("samplers", static_cast<long long>(pool_.size()));
  for (int i = 0; i < pool_.size(); ++i) {
    const auto& s = pool_.slot(i);
    const std::string p = "sampler." + std::to_string(i) + ".";
    w.put(p + "env", s.env->save_state());
    w.put(p + "observation", s.observation);
    w.put(p + "episode_return", s.episode_return);
    w.put(p + "episode_length", static_cast<long long>(s.episode_length));
    w.put(p + "episodes", s.episodes);
    w.put(p + "steps", s.steps);
  }
  w.put("buffer.included", static_cast<long long>(include_buffer));
  if (include_buffer) {
    const ReplayBuffer::Storage st = buffer_.storage();
    w.put("buffer.states", st.states);
    w.put("buffer.actions", st.actions);
    w.put("buffer.next_states", st.next_states);
    w.put("buffer.rewards", st.rewards);
    Vector term(static_cast<Index>(st.terminals.size()));
    for (std::size_t i = 0; i < st.terminals.size(); ++i) term[static_cast<Index>(i)] = st.terminals[i] ? 1.0 : 0.0;
    w.put("buffer.terminals", term);
    w.put("buffer.size", static_cast<long long>(st.size));
    w.put("buffer.head", static_cast<long long>(st.head));
  }
  return w.finish();
}

Trainer Trainer::from_checkpoint_bytes(const std::string& bytes) {
  const RecordReader r(bytes);
  io::RunConfig config;
  try {
    config = io::parse_config(nlohmann::json::parse(r.bytes("config")));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("checkpoint config is unreadable: ") + e.what());
  }
  Trainer t(config);

  auto set_params = [&](diffusion::NoisePredictor& p, const std::string& name) {
    const Vector v = r.vector(name);
    if (v.size() != p.param_count()) throw CheckpointError("checkpoint record '" + name + "' has the wrong size");
    p.set_params(v);
  };
  set_params(t.value_.predictor(Params::online), "value.online");
  set_params(t.value_.predictor(Params::target), "value.target");
  set_params(t.policy_.predictor(Params::online), "policy.online");
  set_params(t.policy_.predictor(Params::target), "policy.target");
  auto& norm = t.value_.normalizer();
  norm.mean = r.scalar("normalizer.mean");
  norm.variance = r.scalar("normalizer.variance");
  norm.initialized = r.integer("normalizer.initialized") != 0;
  t.alpha_.alpha = r.scalar("alpha");
  for (const auto& [name, opt] : {std::pair{"value_opt", &t.value_opt_}, std::pair{"policy_opt", &t.policy_opt_}}) {
    opt->first_moment = r.vector(std::string(name) + ".m");
    opt->second_moment = r.vector(std::string(name) + ".v");
    opt->step_count = r.integer(std::string(name) + ".t");
  }
  t.iteration_ = r.integer("counter.iteration");
  t.updates_ = r.integer("counter.updates");
  t.env_steps_ = r.integer("counter.env_steps");
  t.update_credit_ = r.scalar("update_credit");
  t.last_entropy_ = r.scalar("last_entropy");
  t.last_policy_objective_ = r.scalar("last_policy_objective");
  t.learner_rng_.deserialize(r.bytes("rng.learner"));
  if (r.integer("samplers") != t.pool_.size()) throw CheckpointError("checkpoint sampler count does not match");
  for (int i = 0; i < t.pool_.size(); ++i) {
    auto& s = t.pool_.slot(i);
    const std::string p = "sampler." + std::to_string(i) + ".";
    s.env->load_state(r.bytes(p + "env"));
    s.observation = r.vector(p + "observation");
    s.episode_return = r.scalar(p + "episode_return");
    s.episode_length = static_cast<int>(r.integer(p + "episode_length"));
    s.episodes = r.integer(p + "episodes");
    s.steps = r.integer(p + "steps");
  }
  if (r.integer("buffer.included") != 0) {
    ReplayBuffer::Storage st;
    st.states = r.matrix("buffer.states");
    st.actions = r.matrix("buffer.actions");
    st.next_states = r.matrix("buffer.next_states");
    st.rewards = r.vector("buffer.rewards");
    const Vector term = r.vector("buffer.terminals");
    st.terminals.resize(static_cast<std::size_t>(term.size()));
    for (Index i = 0; i < term.size(); ++i) st.terminals[static_cast<std::size_t>(i)] = term[i] != 0.0;
    st.size = r.integer("buffer.size");
    st.head = r.integer("buffer.head");
    t.buffer_.restore(st);
  }
  return t;
}

void Trainer::save_checkpoint(const std::string& path, bool include_buffer) const {
  write_file_atomic(path, checkpoint_bytes(include_buffer));
}

Trainer Trainer::load_checkpoint(const std::string& path) { return from_checkpoint_bytes(read_file(path)); }

}  // namespace dsacd::runtime
