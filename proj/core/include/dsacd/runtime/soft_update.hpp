#pragma once

#include "dsacd/types.hpp"

namespace dsacd::runtime {

/// tau * online + (1 - tau) * target, elementwise. Throws on shape mismatch or
/// tau outside [0, 1].
Vector soft_update(const Vector& target, const Vector& online, double tau);

}  // namespace dsacd::runtime
