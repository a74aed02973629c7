#pragma once

namespace dsacd::entropy {

/// Temperature adapted toward a target entropy:
/// alpha <- clamp(alpha - lr * (H_hat - H_target), alpha_min, alpha_max).
struct AlphaController {
  double alpha = 0.2;
  double learning_rate = 3e-4;
  double target_entropy = -1.0;
  double alpha_min = 1e-6;
  double alpha_max = 10.0;
};

struct AlphaStep {
  double alpha_before = 0.0;
  double alpha_after = 0.0;
  double entropy = 0.0;
  double target_entropy = 0.0;
  bool clamped = false;
};

/// The usual target, minus the action dimension.
inline double default_target_entropy(int action_dim) { return -static_cast<double>(action_dim); }

/// Applies one update in place and reports it. Throws on non-finite entropy.
AlphaStep update_alpha(AlphaController& controller, double entropy_estimate);

}  // namespace dsacd::entropy
