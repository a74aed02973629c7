#include "dsacd/diffusion/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dsacd/diffusion/sampler.hpp"

namespace dsacd::diffusion {

LossAndGrad denoising_loss(const Matrix& x0, const Matrix& cond, const NoisePredictor& predictor,
                           const NoiseSchedule& schedule, std::span<const int> steps,
                           const Matrix& noise, bool with_grad) {
  const Index batch = x0.cols();
  if (batch == 0) throw std::invalid_argument("denoising loss needs a non-empty batch");
  if (noise.rows() != x0.rows() || noise.cols() != batch)
    throw std::invalid_argument("denoising loss: noise shape differs from sample shape");
  check_inputs(predictor, x0, cond, steps);

  Matrix corrupted(x0.rows(), batch);
  for (Index c = 0; c < batch; ++c) {
    const int t = steps[static_cast<std::size_t>(c)];
    schedule.check_step(t);
    const double abar = schedule.alpha_bar(t);
    corrupted.col(c) = std::sqrt(abar) * x0.col(c) + std::sqrt(1.0 - abar) * noise.col(c);
  }

  Tape tape;
  const Matrix eps_hat = predictor.forward(corrupted, cond, steps, with_grad ? &tape : nullptr);
  const Matrix residual = eps_hat - noise;

  LossAndGrad out;
  out.loss = residual.squaredNorm() / static_cast<double>(batch);
  if (with_grad) {
    out.grad = Vector::Zero(predictor.param_count());
    predictor.backward(tape, (2.0 / static_cast<double>(batch)) * residual, &out.grad);
  }
  return out;
}

LossAndGrad simple_denoising_loss(const Matrix& x0, const Matrix& cond,
                                  const NoisePredictor& predictor, const NoiseSchedule& schedule,
                                  Rng& rng, bool with_grad) {
  const Index batch = x0.cols();
  if (batch == 0) throw std::invalid_argument("denoising loss needs a non-empty batch");
  std::vector<int> steps(static_cast<std::size_t>(batch));
  Matrix noise(x0.rows(), batch);
  for (Index c = 0; c < batch; ++c) {
    steps[static_cast<std::size_t>(c)] = rng.uniform_int(1, schedule.steps);
    for (Index r = 0; r < x0.rows(); ++r) noise(r, c) = rng.normal();
  }
  return denoising_loss(x0, cond, predictor, schedule, steps, noise, with_grad);
}

Matrix posterior_mean(const Matrix& z_t, const Matrix& x0, int t, const NoiseSchedule& schedule) {
  schedule.check_step(t);
  if (z_t.rows() != x0.rows() || z_t.cols() != x0.cols())
    throw std::invalid_argument("posterior_mean: z_t and x0 shapes differ");
  const double abar = schedule.alpha_bar(t);
  const double abar_prev = t > 1 ? schedule.alpha_bar(t - 1) : 1.0;
  const double beta = schedule.beta(t);
  const double c0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
  const double ct = std::sqrt(schedule.alpha(t)) * (1.0 - abar_prev) / (1.0 - abar);
  return c0 * x0 + ct * z_t;
}

}  // namespace dsacd::diffusion
