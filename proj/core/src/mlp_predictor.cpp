#include "dsacd/nn/mlp_predictor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dsacd::nn {

namespace {

Vector embed_step(int step, Index dim) {
  Vector out(dim);
  const Index half = dim / 2;
  const double t = step;
  for (Index k = 0; k < half; ++k) {
    const double freq = std::exp(-std::log(100.0) * static_cast<double>(k) / std::max<Index>(half, 1));
    out(k) = std::sin(t * freq);
    out(half + k) = std::cos(t * freq);
  }
  if (dim % 2 == 1) out(dim - 1) = t / 100.0;
  return out;
}

}  // namespace

Matrix time_embedding(std::span<const int> steps, Index dim) {
  Matrix out(dim, static_cast<Index>(steps.size()));
  // Chains evaluate one step for the whole batch, so consecutive columns
  // usually share a step.
  int cached_step = 0;
  Vector cached;
  for (Index c = 0; c < out.cols(); ++c) {
    const int t = steps[static_cast<std::size_t>(c)];
    if (c == 0 || t != cached_step) {
      cached = embed_step(t, dim);
      cached_step = t;
    }
    out.col(c) = cached;
  }
  return out;
}

MlpNoisePredictor::MlpNoisePredictor(const MlpPredictorConfig& config, Rng& rng) : config_(config) {
  if (config.sample_dim < 1) throw std::invalid_argument("predictor sample_dim must be >= 1");
  if (config.cond_dim < 0 || config.time_embedding < 0)
    throw std::invalid_argument("predictor dimensions must be non-negative");
  std::vector<Index> sizes;
  sizes.push_back(config.sample_dim + config.cond_dim + config.time_embedding);
  for (Index h : config.hidden) sizes.push_back(h);
  sizes.push_back(config.sample_dim);
  mlp_ = Mlp(std::move(sizes), config.activation);
  mlp_.initialize(rng, config.output_scale);
}

Matrix MlpNoisePredictor::forward(const Matrix& z, const Matrix& cond, std::span<const int> steps,
                                  diffusion::Tape* tape) const {
  diffusion::check_inputs(*this, z, cond, steps);
  const Index d = config_.sample_dim, c = config_.cond_dim, e = config_.time_embedding;
  Matrix input(d + c + e, z.cols());
  input.topRows(d) = z;
  if (c > 0) input.middleRows(d, c) = cond;
  if (e > 0) input.bottomRows(e) = time_embedding(steps, e);

  Matrix out = tape ? mlp_.forward(input, &tape->buffers) : mlp_.forward(input);
  if (tape) tape->steps.assign(steps.begin(), steps.end());
  if (!config_.sample_skip.empty())
    for (Index col = 0; col < z.cols(); ++col) out.col(col) += skip(steps[static_cast<std::size_t>(col)]) * z.col(col);
  return out;
}

double MlpNoisePredictor::skip(int step) const {
  if (step < 1 || step > static_cast<int>(config_.sample_skip.size()))
    throw std::out_of_range("predictor skip coefficient missing for step " + std::to_string(step));
  return config_.sample_skip[static_cast<std::size_t>(step - 1)];
}

diffusion::InputGradients MlpNoisePredictor::backward(const diffusion::Tape& tape,
                                                      const Matrix& upstream,
                                                      Vector* grad_params) const {
  if (tape.buffers.empty()) throw std::invalid_argument("backward called with an empty tape");
  const Matrix gin = mlp_.backward(tape.buffers, upstream, grad_params);
  const Index d = config_.sample_dim, c = config_.cond_dim;
  diffusion::InputGradients out{gin.topRows(d), gin.middleRows(d, c)};
  if (!config_.sample_skip.empty())
    for (Index col = 0; col < upstream.cols(); ++col)
      out.sample.col(col) += skip(tape.steps[static_cast<std::size_t>(col)]) * upstream.col(col);
  return out;
}

std::unique_ptr<diffusion::NoisePredictor> MlpNoisePredictor::clone() const {
  return std::make_unique<MlpNoisePredictor>(*this);
}

}  // namespace dsacd::nn
