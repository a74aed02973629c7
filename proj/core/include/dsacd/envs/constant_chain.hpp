#pragma once

#include "dsacd/envs/environment.hpp"

namespace dsacd::envs {

/// Single-state chain paying a constant reward forever; its discounted value
/// is reward / (1 - gamma). Used to check bias measurements.
class ConstantChain final : public Environment {
 public:
  explicit ConstantChain(double reward = 1.0, int max_steps = 1000);

  const EnvSpec& spec() const override { return spec_; }
  Vector reset(std::uint64_t seed) override;
  StepResult step(const Vector& action) override;
  std::string save_state() const override;
  void load_state(const std::string& state) override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<ConstantChain>(*this); }

 private:
  double reward_;
  EnvSpec spec_;
  int steps_ = 0;
};

}  // namespace dsacd::envs
