#pragma once

#include <functional>
#include <memory>

#include "dsacd/diffusion/predictor.hpp"
#include "dsacd/diffusion/schedule.hpp"

namespace dsacd::testing {

/// Parameter-free predictor backed by a closure eps(z, cond, t) per column.
class FunctionPredictor final : public diffusion::NoisePredictor {
 public:
  using Fn = std::function<Vector(const Vector& z, const Vector& cond, int t)>;
  FunctionPredictor(Index sample_dim, Index cond_dim, Fn fn)
      : sample_dim_(sample_dim), cond_dim_(cond_dim), fn_(std::move(fn)) {}

  Index sample_dim() const override { return sample_dim_; }
  Index cond_dim() const override { return cond_dim_; }
  const Vector& params() const override { return params_; }
  void set_params(const Vector& p) override { params_ = p; }

  Matrix forward(const Matrix& z, const Matrix& cond, std::span<const int> steps,
                 diffusion::Tape* tape) const override {
    diffusion::check_inputs(*this, z, cond, steps);
    Matrix out(sample_dim_, z.cols());
    for (Index j = 0; j < z.cols(); ++j) out.col(j) = fn_(z.col(j), cond.col(j), steps[static_cast<std::size_t>(j)]);
    if (tape) {
      tape->buffers = {z, cond};
      tape->steps.assign(steps.begin(), steps.end());
    }
    return out;
  }

  diffusion::InputGradients backward(const diffusion::Tape& tape, const Matrix&, Vector*) const override {
    return {Matrix::Zero(sample_dim_, tape.buffers[0].cols()),
            Matrix::Zero(cond_dim_, tape.buffers[0].cols())};
  }

  std::unique_ptr<diffusion::NoisePredictor> clone() const override {
    return std::make_unique<FunctionPredictor>(*this);
  }

 private:
  Index sample_dim_, cond_dim_;
  Fn fn_;
  Vector params_;
};

/// Scalar eps = w * z + b + v . cond, params [w, b, v...]. Small enough for
/// finite differences and exact enough to check backprop wiring.
class LinearPredictor final : public diffusion::NoisePredictor {
 public:
  explicit LinearPredictor(Index cond_dim, Vector params) : cond_dim_(cond_dim), params_(std::move(params)) {}

  Index sample_dim() const override { return 1; }
  Index cond_dim() const override { return cond_dim_; }
  const Vector& params() const override { return params_; }
  void set_params(const Vector& p) override { params_ = p; }

  Matrix forward(const Matrix& z, const Matrix& cond, std::span<const int> steps,
                 diffusion::Tape* tape) const override {
    diffusion::check_inputs(*this, z, cond, steps);
    Matrix out = params_[0] * z;
    out.array() += params_[1];
    if (cond_dim_ > 0) out += params_.tail(cond_dim_).transpose() * cond;
    if (tape) {
      tape->buffers = {z, cond};
      tape->steps.assign(steps.begin(), steps.end());
    }
    return out;
  }

  diffusion::InputGradients backward(const diffusion::Tape& tape, const Matrix& upstream,
                                     Vector* grad_params) const override {
    const Matrix& z = tape.buffers[0];
    const Matrix& cond = tape.buffers[1];
    if (grad_params) {
      (*grad_params)[0] += (upstream.array() * z.array()).sum();
      (*grad_params)[1] += upstream.sum();
      if (cond_dim_ > 0) grad_params->tail(cond_dim_) += cond * upstream.transpose();
    }
    diffusion::InputGradients g;
    g.sample = params_[0] * upstream;
    g.conditioning = params_.tail(cond_dim_) * upstream;
    return g;
  }

  std::unique_ptr<diffusion::NoisePredictor> clone() const override {
    return std::make_unique<LinearPredictor>(*this);
  }

 private:
  Index cond_dim_;
  Vector params_;
};

/// Exact noise predictor for data distributed as N(mu, sigma^2): the marginal
/// at step t is N(sqrt(abar) mu, abar sigma^2 + 1 - abar). Ignores any
/// conditioning.
inline std::unique_ptr<diffusion::NoisePredictor> gaussian_oracle(const diffusion::NoiseSchedule& s,
                                                                  double mu, double sigma, Index cond_dim = 0) {
  return std::make_unique<FunctionPredictor>(1, cond_dim, [s, mu, sigma](const Vector& z, const Vector&, int t) {
    const double ab = s.alpha_bar(t);
    const double var = ab * sigma * sigma + 1.0 - ab;
    return Vector((z.array() - std::sqrt(ab) * mu) * std::sqrt(1.0 - ab) / var);
  });
}

}  // namespace dsacd::testing
