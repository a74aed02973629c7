#include "dsacd/diffusion/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "dsacd/random.hpp"

namespace dsacd::diffusion {

namespace {

struct StepCoefficients {
  double scale;  // 1 / sqrt(alpha_t)
  double noise;  // beta_t / sqrt(1 - abar_t)
  double sigma;  // sqrt(beta_t)
};

StepCoefficients coefficients(int t, const NoiseSchedule& s) {
  return {1.0 / std::sqrt(s.alpha(t)), s.beta(t) / std::sqrt(1.0 - s.alpha_bar(t)),
          std::sqrt(s.beta(t))};
}

}  // namespace

Matrix broadcast_columns(const Matrix& cond, Index n) {
  if (cond.cols() == n) return cond;
  if (cond.cols() != 1)
    throw std::invalid_argument("conditioning must have one column or one per sample");
  return cond.replicate(1, n);
}

Matrix forward_corrupt(const Matrix& x0, int t, const NoiseSchedule& schedule, const Matrix& noise) {
  schedule.check_step(t);
  if (noise.rows() != x0.rows() || noise.cols() != x0.cols())
    throw std::invalid_argument("forward_corrupt: noise shape differs from sample shape");
  const double abar = schedule.alpha_bar(t);
  return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * noise;
}

Matrix reverse_mean(const Matrix& z_t, const Matrix& eps_hat, int t, const NoiseSchedule& schedule) {
  schedule.check_step(t);
  const auto c = coefficients(t, schedule);
  return c.scale * (z_t - c.noise * eps_hat);
}

Matrix reverse_step(const Matrix& z_t, int t, const NoisePredictor& predictor, const Matrix& cond,
                    const NoiseSchedule& schedule, const Matrix& eps) {
  schedule.check_step(t);
  if (z_t.rows() != predictor.sample_dim())
    throw std::invalid_argument("reverse_step: sample dimension does not match predictor output");
  if (eps.rows() != z_t.rows() || eps.cols() != z_t.cols())
    throw std::invalid_argument("reverse_step: eps shape differs from sample shape");
  const Matrix c = broadcast_columns(cond, z_t.cols());
  const std::vector<int> steps(static_cast<std::size_t>(z_t.cols()), t);
  const Matrix eps_hat = predictor.predict(z_t, c, steps);
  if (eps_hat.rows() != z_t.rows())
    throw std::invalid_argument("reverse_step: predictor output dimension mismatch");
  return reverse_mean(z_t, eps_hat, t, schedule) + std::sqrt(schedule.beta(t)) * eps;
}

ChainNoise draw_chain_noise(std::span<const std::uint64_t> column_seeds, Index sample_dim,
                            const NoiseSchedule& schedule, bool stochastic) {
  const Index n = static_cast<Index>(column_seeds.size());
  ChainNoise noise;
  noise.start.resize(sample_dim, n);
  noise.steps.assign(static_cast<std::size_t>(schedule.steps), Matrix::Zero(sample_dim, n));
  for (Index c = 0; c < n; ++c) {
    Rng rng(column_seeds[static_cast<std::size_t>(c)]);
    for (Index r = 0; r < sample_dim; ++r) noise.start(r, c) = rng.normal();
    if (!stochastic) continue;
    for (int t = schedule.steps; t >= 2; --t) {
      auto& m = noise.steps[static_cast<std::size_t>(t - 1)];
      for (Index r = 0; r < sample_dim; ++r) m(r, c) = rng.normal();
    }
  }
  return noise;
}

Matrix run_chain(const ChainNoise& noise, const Matrix& cond, const NoisePredictor& predictor,
                 const NoiseSchedule& schedule, ChainTrace* trace) {
  const Index n = noise.start.cols();
  const Matrix c = broadcast_columns(cond, n);
  if (trace) {
    trace->cond = c;
    trace->tapes.assign(static_cast<std::size_t>(schedule.steps), Tape{});
  }
  Matrix z = noise.start;
  std::vector<int> steps(static_cast<std::size_t>(n));
  for (int t = schedule.steps; t >= 1; --t) {
    std::fill(steps.begin(), steps.end(), t);
    Tape* tape = trace ? &trace->tapes[static_cast<std::size_t>(t - 1)] : nullptr;
    const Matrix eps_hat = predictor.forward(z, c, steps, tape);
    if (eps_hat.rows() != z.rows())
      throw std::invalid_argument("reverse chain: predictor output dimension mismatch");
    const auto k = coefficients(t, schedule);
    z = k.scale * (z - k.noise * eps_hat);
    if (t > 1) z += k.sigma * noise.steps[static_cast<std::size_t>(t - 1)];
  }
  return z;
}

ChainGradients backprop_chain(const ChainTrace& trace, const NoisePredictor& predictor,
                              const NoiseSchedule& schedule, const Matrix& grad_output,
                              Vector* grad_params) {
  if (static_cast<int>(trace.tapes.size()) != schedule.steps)
    throw std::invalid_argument("backprop_chain: trace does not match the schedule");
  Matrix g = grad_output;
  ChainGradients out;
  out.conditioning = Matrix::Zero(trace.cond.rows(), trace.cond.cols());
  for (int t = 1; t <= schedule.steps; ++t) {
    const auto k = coefficients(t, schedule);
    const Matrix upstream = (-k.scale * k.noise) * g;
    const InputGradients ig =
        predictor.backward(trace.tapes[static_cast<std::size_t>(t - 1)], upstream, grad_params);
    g = k.scale * g + ig.sample;
    out.conditioning += ig.conditioning;
  }
  out.start = std::move(g);
  return out;
}

Matrix reverse_sample_streams(std::span<const std::uint64_t> column_seeds, const Matrix& cond,
                              bool stochastic, const NoisePredictor& predictor,
                              const NoiseSchedule& schedule) {
  if (column_seeds.empty()) throw std::invalid_argument("reverse_sample: n_samples must be >= 1");
  const ChainNoise noise =
      draw_chain_noise(column_seeds, predictor.sample_dim(), schedule, stochastic);
  const Matrix c = broadcast_columns(cond, static_cast<Index>(column_seeds.size()));
  if (c.rows() != predictor.cond_dim())
    throw std::invalid_argument("reverse_sample: conditioning dimension mismatch");
  return run_chain(noise, c, predictor, schedule);
}

Matrix reverse_sample(const SampleRequest& request, const NoisePredictor& predictor,
                      const NoiseSchedule& schedule) {
  if (request.n_samples < 1) throw std::invalid_argument("reverse_sample: n_samples must be >= 1");
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(request.n_samples));
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = derive_seed(request.rng_seed, i);
  return reverse_sample_streams(seeds, request.conditioning, request.stochastic, predictor, schedule);
}

}  // namespace dsacd::diffusion
