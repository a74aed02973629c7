#pragma once

#include <vector>

#include "dsacd/diffusion/predictor.hpp"
#include "dsacd/nn/mlp.hpp"

namespace dsacd::nn {

struct MlpPredictorConfig {
  Index sample_dim = 1;
  Index cond_dim = 0;
  std::vector<Index> hidden = {64, 64};
  Index time_embedding = 16;
  Activation activation = Activation::mish;
  double output_scale = 0.1;
  /// Optional per-step coefficients c_t (index t - 1) of a linear skip term:
  /// eps = MLP(...) + c_t * z_t. With c_t = sqrt(1 - abar_t) an untrained
  /// chain already maps N(0, I) to N(0, I) instead of inflating it.
  std::vector<double> sample_skip;
};

/// Sinusoidal features of the diffusion step, `dim` rows per column.
Matrix time_embedding(std::span<const int> steps, Index dim);

/// eps(z_t, cond, t) = MLP([z_t; cond; embed(t)]) (+ c_t * z_t).
class MlpNoisePredictor final : public diffusion::NoisePredictor {
 public:
  MlpNoisePredictor(const MlpPredictorConfig& config, Rng& rng);

  Index sample_dim() const override { return config_.sample_dim; }
  Index cond_dim() const override { return config_.cond_dim; }
  const Vector& params() const override { return mlp_.params(); }
  void set_params(const Vector& p) override { mlp_.set_params(p); }

  Matrix forward(const Matrix& z, const Matrix& cond, std::span<const int> steps,
                 diffusion::Tape* tape = nullptr) const override;
  diffusion::InputGradients backward(const diffusion::Tape& tape, const Matrix& upstream,
                                     Vector* grad_params) const override;
  std::unique_ptr<diffusion::NoisePredictor> clone() const override;

  const MlpPredictorConfig& config() const { return config_; }

 private:
  double skip(int step) const;

  MlpPredictorConfig config_;
  Mlp mlp_;
};

}  // namespace dsacd::nn
