#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsacd/diffusion/predictor.hpp"
#include "dsacd/diffusion/schedule.hpp"
#include "dsacd/types.hpp"

namespace dsacd::diffusion {

/// A batch request against the reverse chain. `conditioning` has either one
/// column (broadcast to every sample) or `n_samples` columns. Row i of the
/// draw uses the random stream derive_seed(rng_seed, i).
struct SampleRequest {
  Index n_samples = 1;
  Matrix conditioning;
  bool stochastic = true;
  std::uint64_t rng_seed = 0;
};

/// Closed-form corruption sqrt(abar_t) * x0 + sqrt(1 - abar_t) * noise.
Matrix forward_corrupt(const Matrix& x0, int t, const NoiseSchedule& schedule, const Matrix& noise);

/// Mean of one reverse transition given a noise estimate.
Matrix reverse_mean(const Matrix& z_t, const Matrix& eps_hat, int t, const NoiseSchedule& schedule);

/// One denoising step z_t -> z_{t-1}. `eps` is the additive noise; pass zeros
/// for deterministic sampling.
Matrix reverse_step(const Matrix& z_t, int t, const NoisePredictor& predictor, const Matrix& cond,
                    const NoiseSchedule& schedule, const Matrix& eps);

/// Runs the chain t = T..1 from standard-normal starts. The additive noise is
/// zero at t = 1 regardless of `stochastic`. Returns sample_dim x n_samples.
Matrix reverse_sample(const SampleRequest& request, const NoisePredictor& predictor,
                      const NoiseSchedule& schedule);

/// Same chain with one explicit random stream per column.
Matrix reverse_sample_streams(std::span<const std::uint64_t> column_seeds, const Matrix& cond,
                              bool stochastic, const NoisePredictor& predictor,
                              const NoiseSchedule& schedule);

/// Starting point and per-step noise for a chain, drawn up front so the chain
/// itself is a deterministic function of the parameters.
struct ChainNoise {
  Matrix start;               // z_T
  std::vector<Matrix> steps;  // steps[t - 1] is the additive noise used at step t
};

ChainNoise draw_chain_noise(std::span<const std::uint64_t> column_seeds, Index sample_dim,
                            const NoiseSchedule& schedule, bool stochastic);

/// Everything backprop through the chain needs.
struct ChainTrace {
  Matrix cond;
  std::vector<Tape> tapes;  // tapes[t - 1] recorded at step t
};

/// Deterministic chain over pre-drawn noise; records a trace when requested.
Matrix run_chain(const ChainNoise& noise, const Matrix& cond, const NoisePredictor& predictor,
                 const NoiseSchedule& schedule, ChainTrace* trace = nullptr);

struct ChainGradients {
  Matrix start;         // d/d z_T
  Matrix conditioning;  // d/d cond, summed over every step
};

/// Reverse-mode pass through a traced chain given d(loss)/d(z_0). Parameter
/// gradients accumulate into `grad_params` when non-null.
ChainGradients backprop_chain(const ChainTrace& trace, const NoisePredictor& predictor,
                              const NoiseSchedule& schedule, const Matrix& grad_output,
                              Vector* grad_params);

/// Broadcasts a single conditioning column to `n` columns; passes through
/// matrices that already have `n` columns.
Matrix broadcast_columns(const Matrix& cond, Index n);

}  // namespace dsacd::diffusion
