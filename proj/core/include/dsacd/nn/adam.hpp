#pragma once

#include "dsacd/types.hpp"

namespace dsacd::nn {

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First-order adaptive-moment optimizer over a flat parameter vector.
class Adam {
 public:
  Adam() = default;
  Adam(Index n_params, AdamConfig config);

  /// params -= lr * mhat / (sqrt(vhat) + eps). Pass a negated gradient to ascend.
  void step(Vector& params, const Vector& grad);

  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }

  // Exposed for checkpointing.
  Vector first_moment;
  Vector second_moment;
  long long step_count = 0;

 private:
  AdamConfig config_;
};

}  // namespace dsacd::nn
