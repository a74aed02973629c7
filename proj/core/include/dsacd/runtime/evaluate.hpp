#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsacd/envs/environment.hpp"
#include "dsacd/runtime/trainer.hpp"
#include "dsacd/value/bias.hpp"

namespace dsacd::runtime {

struct EvalOptions {
  int n_episodes = 10;
  bool deterministic = false;  // zero the per-step chain noise
  bool bias = false;
  std::uint64_t seed = 0;
  int bias_episodes = 10;
  Index n_q_samples = 64;
};

struct EvalReport {
  std::vector<double> returns;
  std::vector<int> lengths;
  double mean_return = 0.0;
  double std_return = 0.0;
  std::optional<value::BiasReport> bias;
};

/// Rolls out the online policy without exploration noise. With `bias`, the
/// DVN is scored against discounted sampled returns of the behaviour policy
/// (exploration noise included), with the entropy bonus at the learned alpha.
EvalReport evaluate(const Trainer& trainer, envs::Environment& env, const EvalOptions& options);

/// Throws std::invalid_argument unless `env` has the dimensions and bounds
/// the trainer was built for.
void check_compatible(const envs::EnvSpec& trained, const envs::EnvSpec& env);

}  // namespace dsacd::runtime
