#pragma once

#include <Eigen/Dense>

namespace dsacd {

// Batched data is column-major: one column per sample.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace dsacd
