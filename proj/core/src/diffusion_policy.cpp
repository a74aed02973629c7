#include "dsacd/policy/diffusion_policy.hpp"

#include <stdexcept>
#include <vector>

#include "dsacd/diffusion/sampler.hpp"
#include "dsacd/random.hpp"

namespace dsacd::policy {

PolicyModel::PolicyModel(std::unique_ptr<diffusion::NoisePredictor> predictor,
                         diffusion::NoiseSchedule schedule, Vector action_low, Vector action_high)
    : online_(std::move(predictor)),
      schedule_(std::move(schedule)),
      low_(std::move(action_low)),
      high_(std::move(action_high)) {
  if (!online_) throw std::invalid_argument("policy model needs a predictor");
  if (low_.size() == 0 || high_.size() == 0)
    throw std::invalid_argument("policy model needs action bounds; unbounded actions are not supported");
  if (low_.size() != online_->sample_dim() || high_.size() != online_->sample_dim())
    throw std::invalid_argument("action bounds do not match the predictor output dimension");
  if (!low_.allFinite() || !high_.allFinite() || (low_.array() >= high_.array()).any())
    throw std::invalid_argument("action bounds must be finite with low < high");
  target_ = online_->clone();
}

PolicyModel::PolicyModel(const PolicyModel& other)
    : online_(other.online_->clone()),
      target_(other.target_->clone()),
      schedule_(other.schedule_),
      low_(other.low_),
      high_(other.high_) {}

PolicyModel& PolicyModel::operator=(const PolicyModel& other) {
  if (this != &other) *this = PolicyModel(other);
  return *this;
}

const diffusion::NoisePredictor& PolicyModel::predictor(Params which) const {
  return which == Params::online ? *online_ : *target_;
}

diffusion::NoisePredictor& PolicyModel::predictor(Params which) {
  return which == Params::online ? *online_ : *target_;
}

Matrix PolicyModel::squash(const Matrix& raw) const {
  const Vector center = 0.5 * (high_ + low_);
  const Vector half = 0.5 * (high_ - low_);
  Matrix out = raw.array().tanh().matrix();
  out = (half.asDiagonal() * out).colwise() + center;
  return out;
}

Matrix PolicyModel::squash_derivative(const Matrix& raw) const {
  const Vector half = 0.5 * (high_ - low_);
  const Matrix th = raw.array().tanh().matrix();
  return half.asDiagonal() * (1.0 - th.array().square()).matrix();
}

Matrix PolicyModel::clip(const Matrix& actions) const {
  Matrix out = actions;
  for (Index c = 0; c < out.cols(); ++c) out.col(c) = out.col(c).cwiseMax(low_).cwiseMin(high_);
  return out;
}

Vector sample_action(const PolicyModel& policy, const Vector& state, std::uint64_t seed,
                     bool deterministic, Params which) {
  if (state.size() != policy.state_dim())
    throw std::invalid_argument("sample_action: state dimension does not match the policy conditioning");
  const std::uint64_t seeds[1] = {seed};
  const Matrix raw = diffusion::reverse_sample_streams(seeds, state, !deterministic,
                                                       policy.predictor(which), policy.schedule());
  return policy.squash(raw).col(0);
}

Vector explore_action(const PolicyModel& policy, const Vector& state, double alpha,
                      const ExplorationConfig& cfg, std::uint64_t seed) {
  if (alpha < 0.0) throw std::invalid_argument("explore_action: alpha must be non-negative");
  if (cfg.lambda < 0.0) throw std::invalid_argument("explore_action: lambda must be non-negative");
  const Vector base = sample_action(policy, state, derive_seed(seed, 0));
  const double scale = cfg.noise_scale(alpha);
  if (scale == 0.0) return base;
  Rng rng(derive_seed(seed, 1));
  const Vector noisy = base + scale * rng.normal_vector(base.size());
  return policy.clip(noisy).col(0);
}

Matrix sample_actions(const PolicyModel& policy, const Vector& state, Index n, std::uint64_t seed,
                      Params which) {
  if (n < 1) throw std::invalid_argument("sample_actions: n must be >= 1");
  if (state.size() != policy.state_dim())
    throw std::invalid_argument("sample_actions: state dimension does not match the policy conditioning");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(seed, i);
  const Matrix raw =
      diffusion::reverse_sample_streams(seeds, state, true, policy.predictor(which), policy.schedule());
  return policy.squash(raw);
}

Matrix sample_actions_batch(const PolicyModel& policy, const Matrix& states, Index n_per_state,
                            std::uint64_t seed, bool deterministic, Params which) {
  if (n_per_state < 1) throw std::invalid_argument("sample_actions_batch: n must be >= 1");
  if (states.rows() != policy.state_dim())
    throw std::invalid_argument("sample_actions_batch: state dimension mismatch");
  const Index b = states.cols();
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(b * n_per_state));
  Matrix cond(states.rows(), b * n_per_state);
  for (Index j = 0; j < b; ++j) {
    const std::uint64_t sj = derive_seed(seed, static_cast<std::uint64_t>(j));
    for (Index i = 0; i < n_per_state; ++i)
      seeds[static_cast<std::size_t>(j * n_per_state + i)] = derive_seed(sj, static_cast<std::uint64_t>(i));
    cond.middleCols(j * n_per_state, n_per_state) = states.col(j).replicate(1, n_per_state);
  }
  const Matrix raw = diffusion::reverse_sample_streams(seeds, cond, !deterministic,
                                                       policy.predictor(which), policy.schedule());
  return policy.squash(raw);
}

PolicyLossResult policy_loss(const PolicyModel& policy, const value::ActionValueCritic& critic,
                             const Matrix& states, Rng& rng, bool with_grad) {
  const Index b = states.cols();
  if (b == 0) throw std::invalid_argument("policy_loss needs a non-empty batch");
  if (states.rows() != policy.state_dim())
    throw std::invalid_argument("policy_loss: state dimension mismatch");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(b));
  for (auto& s : seeds) s = rng.next_u64();
  const std::uint64_t critic_seed = rng.next_u64();

  const auto noise = diffusion::draw_chain_noise(seeds, policy.action_dim(), policy.schedule(), true);
  diffusion::ChainTrace trace;
  const Matrix raw = diffusion::run_chain(noise, states, policy.predictor(), policy.schedule(),
                                          with_grad ? &trace : nullptr);
  PolicyLossResult out;
  out.actions = policy.squash(raw);

  Matrix grad_actions;
  const Vector q = critic.evaluate(states, out.actions, critic_seed, with_grad ? &grad_actions : nullptr);
  out.objective = q.mean();
  if (!with_grad) return out;

  const Matrix grad_raw =
      (grad_actions / static_cast<double>(b)).cwiseProduct(policy.squash_derivative(raw));
  out.grad = Vector::Zero(policy.predictor().param_count());
  diffusion::backprop_chain(trace, policy.predictor(), policy.schedule(), grad_raw, &out.grad);
  return out;
}

}  // namespace dsacd::policy
