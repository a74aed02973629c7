#pragma once

#include <string>
#include <vector>

namespace dsacd::diffusion {

enum class ScheduleShape { linear, cosine };

/// Variance ladder shared by the forward corruption and the reverse chain.
///
/// Steps are addressed 1..T as in the usual diffusion notation; vectors are
/// stored 0-based, so `beta(t)` reads `betas[t - 1]`.
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;

  double beta(int t) const { return betas[static_cast<std::size_t>(t - 1)]; }
  double alpha(int t) const { return alphas[static_cast<std::size_t>(t - 1)]; }
  double alpha_bar(int t) const { return alpha_bars[static_cast<std::size_t>(t - 1)]; }

  /// Throws std::out_of_range unless 1 <= t <= steps.
  void check_step(int t) const;
};

/// Builds the ladder. For `linear` betas go uniformly from beta_min to
/// beta_max; for `cosine` the alpha_bar curve follows the squared-cosine
/// profile with per-step betas clipped into [beta_min, beta_max].
NoiseSchedule make_schedule(int steps, double beta_min, double beta_max,
                            ScheduleShape shape = ScheduleShape::linear);

/// Builds a schedule from explicit betas; each must lie in (0, 1).
NoiseSchedule schedule_from_betas(std::vector<double> betas);

ScheduleShape parse_schedule_shape(const std::string& name);
const char* to_string(ScheduleShape shape);

}  // namespace dsacd::diffusion
