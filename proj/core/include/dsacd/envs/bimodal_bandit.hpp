#pragma once

#include "dsacd/envs/environment.hpp"
#include "dsacd/random.hpp"

namespace dsacd::envs {

/// One-step bandit on [-1, 1] with two equally good optima at +-mode.
/// reward = 1 - min((a - mode)^2, (a + mode)^2) + noise_std * N(0, 1).
class BimodalBandit final : public Environment {
 public:
  struct Params {
    double mode = 0.6;
    double noise_std = 0.05;
  };

  BimodalBandit() : BimodalBandit(Params{}) {}
  explicit BimodalBandit(Params params);

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  std::string save_state() const override;
  void load_state(const std::string& state) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<BimodalBandit>(*this); }

  double expected_reward(double action) const;
  double reward(double action, double noise) const;
  const Params& params() const { return params_; }
  long long clipped_actions() const { return clipped_; }

 private:
  Params params_;
  EnvSpec spec_;
  Rng rng_;
  long long clipped_ = 0;
};

}  // namespace dsacd::envs
