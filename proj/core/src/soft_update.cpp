#include "dsacd/runtime/soft_update.hpp"

#include <stdexcept>

namespace dsacd::runtime {

Vector soft_update(const Vector& target, const Vector& online, double tau) {
  if (target.size() != online.size())
    throw std::invalid_argument("soft_update: parameter shapes differ");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau must lie in [0, 1]");
  if (tau == 1.0) return online;
  if (tau == 0.0) return target;
  return tau * online + (1.0 - tau) * target;
}

}  // namespace dsacd::runtime
