#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dsacd/types.hpp"

namespace dsacd::diffusion {

/// Activations a predictor keeps from a forward pass so the matching
/// backward pass can run without recomputation.
struct Tape {
  std::vector<Matrix> buffers;
  std::vector<int> steps;
};

struct InputGradients {
  Matrix sample;        // sample_dim x batch
  Matrix conditioning;  // cond_dim x batch
};

/// Noise-prediction network eps(z_t, cond, t). Inputs are batched column-wise;
/// `steps` carries one diffusion step per column. Implementations must be
/// deterministic in (inputs, params).
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;

  virtual Index sample_dim() const = 0;
  virtual Index cond_dim() const = 0;

  virtual const Vector& params() const = 0;
  /// Replaces the parameter vector; throws on size mismatch.
  virtual void set_params(const Vector& p) = 0;
  Index param_count() const { return params().size(); }

  /// Evaluates the predictor. When `tape` is non-null the activations needed
  /// by backward() are recorded into it.
  virtual Matrix forward(const Matrix& z, const Matrix& cond, std::span<const int> steps,
                         Tape* tape = nullptr) const = 0;

  /// Vector-Jacobian product through the recorded forward pass. Parameter
  /// gradients are accumulated into `grad_params` when it is non-null.
  virtual InputGradients backward(const Tape& tape, const Matrix& upstream,
                                  Vector* grad_params) const = 0;

  virtual std::unique_ptr<NoisePredictor> clone() const = 0;

  Matrix predict(const Matrix& z, const Matrix& cond, std::span<const int> steps) const {
    return forward(z, cond, steps, nullptr);
  }
};

/// Throws std::invalid_argument when the batch shapes disagree with the predictor.
void check_inputs(const NoisePredictor& predictor, const Matrix& z, const Matrix& cond,
                  std::span<const int> steps);

}  // namespace dsacd::diffusion
