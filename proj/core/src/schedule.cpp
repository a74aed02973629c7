#include "dsacd/diffusion/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dsacd::diffusion {

void NoiseSchedule::check_step(int t) const {
  if (t < 1 || t > steps)
    throw std::out_of_range("diffusion step " + std::to_string(t) + " outside [1, " +
                            std::to_string(steps) + "]");
}

NoiseSchedule schedule_from_betas(std::vector<double> betas) {
  if (betas.empty()) throw std::invalid_argument("noise schedule needs at least one step");
  NoiseSchedule s;
  s.steps = static_cast<int>(betas.size());
  s.alphas.reserve(betas.size());
  s.alpha_bars.reserve(betas.size());
  double running = 1.0;
  for (double b : betas) {
    if (!(b > 0.0 && b < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
    const double a = 1.0 - b;
    running *= a;
    s.alphas.push_back(a);
    s.alpha_bars.push_back(running);
  }
  s.betas = std::move(betas);
  return s;
}

NoiseSchedule make_schedule(int steps, double beta_min, double beta_max, ScheduleShape shape) {
  if (steps < 1) throw std::invalid_argument("noise schedule needs T >= 1");
  if (!(beta_min > 0.0 && beta_min <= beta_max && beta_max < 1.0))
    throw std::invalid_argument("beta bounds must satisfy 0 < beta_min <= beta_max < 1");

  std::vector<double> betas(static_cast<std::size_t>(steps));
  if (shape == ScheduleShape::linear) {
    for (int i = 0; i < steps; ++i) {
      const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
      betas[static_cast<std::size_t>(i)] = beta_min + frac * (beta_max - beta_min);
    }
  } else {
    constexpr double offset = 0.008;
    auto f = [&](double t) {
      const double c = std::cos((t / steps + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
      return c * c;
    };
    for (int i = 0; i < steps; ++i) {
      const double b = 1.0 - f(i + 1.0) / f(static_cast<double>(i));
      betas[static_cast<std::size_t>(i)] = std::clamp(b, beta_min, beta_max);
    }
  }
  return schedule_from_betas(std::move(betas));
}

ScheduleShape parse_schedule_shape(const std::string& name) {
  if (name == "linear") return ScheduleShape::linear;
  if (name == "cosine") return ScheduleShape::cosine;
  throw std::invalid_argument("unknown schedule shape '" + name + "'");
}

const char* to_string(ScheduleShape shape) {
  return shape == ScheduleShape::linear ? "linear" : "cosine";
}

}  // namespace dsacd::diffusion
