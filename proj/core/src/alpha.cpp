#include "dsacd/entropy/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dsacd::entropy {

AlphaStep update_alpha(AlphaController& controller, double entropy_estimate) {
  if (!std::isfinite(entropy_estimate))
    throw std::invalid_argument("update_alpha: entropy estimate is not finite");
  AlphaStep step;
  step.alpha_before = controller.alpha;
  step.entropy = entropy_estimate;
  step.target_entropy = controller.target_entropy;
  const double raw =
      controller.alpha - controller.learning_rate * (entropy_estimate - controller.target_entropy);
  controller.alpha = std::clamp(raw, controller.alpha_min, controller.alpha_max);
  step.clamped = controller.alpha != raw;
  step.alpha_after = controller.alpha;
  return step;
}

}  // namespace dsacd::entropy
