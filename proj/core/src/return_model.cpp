#include "dsacd/value/return_model.hpp"

#include <stdexcept>
#include <vector>

#include "dsacd/diffusion/sampler.hpp"
#include "dsacd/random.hpp"

namespace dsacd::value {

namespace {
constexpr double kMinVariance = 1e-6;

std::vector<std::uint64_t> column_seeds(std::uint64_t seed, Index n) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(seed, i);
  return seeds;
}
}  // namespace

void ReturnNormalizer::observe(const Vector& targets) {
  if (targets.size() == 0 || !enabled) return;
  const double m = targets.mean();
  const double v = (targets.array() - m).square().mean();
  if (!initialized) {
    mean = m;
    variance = std::max(v, kMinVariance);
    initialized = true;
    return;
  }
  const double new_mean = (1.0 - momentum) * mean + momentum * m;
  variance = (1.0 - momentum) * variance + momentum * (v + (m - new_mean) * (m - new_mean));
  variance = std::max(variance, kMinVariance);
  mean = new_mean;
}

ReturnDistributionModel::ReturnDistributionModel(std::unique_ptr<diffusion::NoisePredictor> predictor,
                                                 diffusion::NoiseSchedule schedule, Index state_dim,
                                                 Index action_dim)
    : online_(std::move(predictor)),
      schedule_(std::move(schedule)),
      state_dim_(state_dim),
      action_dim_(action_dim) {
  if (!online_) throw std::invalid_argument("return model needs a predictor");
  if (online_->sample_dim() != 1) throw std::invalid_argument("return model predictor must be scalar");
  if (online_->cond_dim() != state_dim + action_dim)
    throw std::invalid_argument("return model predictor must condition on [state; action]");
  target_ = online_->clone();
}

ReturnDistributionModel::ReturnDistributionModel(const ReturnDistributionModel& other)
    : online_(other.online_->clone()),
      target_(other.target_->clone()),
      schedule_(other.schedule_),
      state_dim_(other.state_dim_),
      action_dim_(other.action_dim_),
      normalizer_(other.normalizer_) {}

ReturnDistributionModel& ReturnDistributionModel::operator=(const ReturnDistributionModel& other) {
  if (this != &other) *this = ReturnDistributionModel(other);
  return *this;
}

const diffusion::NoisePredictor& ReturnDistributionModel::predictor(Params which) const {
  return which == Params::online ? *online_ : *target_;
}

diffusion::NoisePredictor& ReturnDistributionModel::predictor(Params which) {
  return which == Params::online ? *online_ : *target_;
}

Matrix ReturnDistributionModel::conditioning(const Matrix& states, const Matrix& actions) const {
  if (states.rows() != state_dim_ || actions.rows() != action_dim_)
    throw std::invalid_argument("return model: state/action dimension mismatch with conditioning");
  if (states.cols() != actions.cols())
    throw std::invalid_argument("return model: state and action batch sizes differ");
  Matrix cond(state_dim_ + action_dim_, states.cols());
  cond.topRows(state_dim_) = states;
  cond.bottomRows(action_dim_) = actions;
  return cond;
}

Vector ReturnDistributionModel::sample_batch(const Matrix& states, const Matrix& actions,
                                             std::uint64_t seed, Params which) const {
  const Matrix cond = conditioning(states, actions);
  const auto seeds = column_seeds(seed, cond.cols());
  const Matrix z = diffusion::reverse_sample_streams(seeds, cond, true, predictor(which), schedule_);
  Vector out(z.cols());
  for (Index j = 0; j < z.cols(); ++j) out[j] = normalizer_.denormalize(z(0, j));
  return out;
}

Vector ReturnDistributionModel::sample_returns(const Vector& state, const Vector& action, Index n,
                                               std::uint64_t seed, Params which) const {
  if (n < 1) throw std::invalid_argument("sample_returns: n must be >= 1");
  return sample_batch(state.replicate(1, n), action.replicate(1, n), seed, which);
}

Vector ReturnDistributionModel::q_estimate(const Matrix& states, const Matrix& actions, Index n,
                                           std::uint64_t seed, Params which) const {
  if (n < 1) throw std::invalid_argument("q_estimate: n must be >= 1");
  const Index b = states.cols();
  Matrix s_rep(states.rows(), b * n), a_rep(actions.rows(), b * n);
  for (Index j = 0; j < b; ++j) {
    s_rep.middleCols(j * n, n) = states.col(j).replicate(1, n);
    a_rep.middleCols(j * n, n) = actions.col(j).replicate(1, n);
  }
  const Vector draws = sample_batch(s_rep, a_rep, seed, which);
  Vector q(b);
  for (Index j = 0; j < b; ++j) q[j] = draws.segment(j * n, n).mean();
  return q;
}

Vector DiffusionCritic::evaluate(const Matrix& states, const Matrix& actions, std::uint64_t seed,
                                 Matrix* grad_actions) const {
  const Index b = states.cols(), n = n_samples_;
  if (n < 1) throw std::invalid_argument("DiffusionCritic needs n_samples >= 1");
  Matrix s_rep(states.rows(), b * n), a_rep(actions.rows(), b * n);
  for (Index j = 0; j < b; ++j) {
    s_rep.middleCols(j * n, n) = states.col(j).replicate(1, n);
    a_rep.middleCols(j * n, n) = actions.col(j).replicate(1, n);
  }
  const Matrix cond = model_.conditioning(s_rep, a_rep);
  const auto seeds = column_seeds(seed, b * n);
  const auto noise = diffusion::draw_chain_noise(seeds, 1, model_.schedule(), true);
  diffusion::ChainTrace trace;
  const Matrix z = diffusion::run_chain(noise, cond, model_.predictor(), model_.schedule(),
                                        grad_actions ? &trace : nullptr);
  const auto& norm = model_.normalizer();
  Vector q(b);
  for (Index j = 0; j < b; ++j) q[j] = norm.shift() + norm.scale() * z.row(0).segment(j * n, n).mean();

  if (grad_actions) {
    const Matrix upstream = Matrix::Constant(1, b * n, norm.scale() / static_cast<double>(n));
    const auto grads =
        diffusion::backprop_chain(trace, model_.predictor(), model_.schedule(), upstream, nullptr);
    grad_actions->setZero(actions.rows(), b);
    for (Index j = 0; j < b; ++j)
      grad_actions->col(j) =
          grads.conditioning.bottomRows(actions.rows()).middleCols(j * n, n).rowwise().sum();
  }
  return q;
}

}  // namespace dsacd::value
