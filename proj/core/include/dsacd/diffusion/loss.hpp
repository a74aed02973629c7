#pragma once

#include <span>

#include "dsacd/diffusion/predictor.hpp"
#include "dsacd/diffusion/schedule.hpp"
#include "dsacd/random.hpp"

namespace dsacd::diffusion {

struct LossAndGrad {
  double loss = 0.0;
  Vector grad;  // d loss / d params
};

/// Simplified denoising objective: mean over the batch of
/// ||eps - predictor(sqrt(abar_t) x0 + sqrt(1 - abar_t) eps, cond, t)||^2
/// with the step and noise given per column.
LossAndGrad denoising_loss(const Matrix& x0, const Matrix& cond, const NoisePredictor& predictor,
                           const NoiseSchedule& schedule, std::span<const int> steps,
                           const Matrix& noise, bool with_grad = true);

/// Draws t ~ U{1..T} and eps ~ N(0, I) independently per column, then
/// evaluates denoising_loss.
LossAndGrad simple_denoising_loss(const Matrix& x0, const Matrix& cond,
                                  const NoisePredictor& predictor, const NoiseSchedule& schedule,
                                  Rng& rng, bool with_grad = true);

/// Mean of q(z_{t-1} | z_t, z_0).
Matrix posterior_mean(const Matrix& z_t, const Matrix& x0, int t, const NoiseSchedule& schedule);

}  // namespace dsacd::diffusion
