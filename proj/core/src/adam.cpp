#include "dsacd/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dsacd::nn {

Adam::Adam(Index n_params, AdamConfig config)
    : first_moment(Vector::Zero(n_params)), second_moment(Vector::Zero(n_params)), config_(config) {}

void Adam::step(Vector& params, const Vector& grad) {
  if (params.size() != grad.size() || params.size() != first_moment.size())
    throw std::invalid_argument("Adam::step: parameter/gradient size mismatch");
  ++step_count;
  const double b1 = config_.beta1, b2 = config_.beta2;
  first_moment = b1 * first_moment + (1.0 - b1) * grad;
  second_moment = b2 * second_moment + (1.0 - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_count));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_count));
  params.array() -= config_.learning_rate * (first_moment.array() / c1) /
                    ((second_moment.array() / c2).sqrt() + config_.epsilon);
}

}  // namespace dsacd::nn
