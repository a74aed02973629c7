#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsacd/diffusion/schedule.hpp"
#include "dsacd/entropy/gmm.hpp"
#include "dsacd/nn/mlp.hpp"
#include "dsacd/policy/diffusion_policy.hpp"
#include "dsacd/policy/entropy_bridge.hpp"

namespace dsacd::io {

/// Schema violations: unknown keys, missing required keys, bad values.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys)
      : std::runtime_error(what), keys_(std::move(keys)) {}
  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

struct NetworkConfig {
  std::vector<Index> hidden = {64, 64};
  Index time_embedding = 16;
  nn::Activation activation = nn::Activation::mish;
  double output_scale = 0.1;
  int diffusion_steps = 20;
  double beta_min = 1e-3;
  double beta_max = 0.4;
  diffusion::ScheduleShape schedule = diffusion::ScheduleShape::linear;
  bool prior_skip = false;  // add sqrt(1 - abar_t) * z_t to the predicted noise
};

struct EntropyConfig {
  int components = 2;
  Index n_actions = 32;
  Index n_states = 32;  // states per entropy estimate
  int em_max_iters = 50;
  double em_tol = 1e-6;
  double covariance_floor = 1e-6;
  entropy::CovarianceType covariance = entropy::CovarianceType::diagonal;
  policy::LogProbMode log_prob_mode = policy::LogProbMode::gmm_log_density;
  bool include_exploration_noise = true;
  bool has_target_entropy = false;  // default: -action_dim
  double target_entropy = 0.0;
  double alpha_init = 0.5;
  double alpha_min = 1e-6;
  double alpha_max = 10.0;
};

struct TrainerConfig {
  double gamma = 0.99;
  double lr_value = 3e-4;
  double lr_policy = 3e-4;
  double lr_alpha = 3e-4;
  double tau = 0.005;
  int delayed_update_interval = 2;
  Index batch_size = 256;
  double updates_per_step = 1.0;
  int n_samplers = 1;
  int steps_per_iteration = 1;  // per sampler
  long long iterations = 1000;
  long long warmup_steps = -1;  // -1: 10 * batch_size
  Index buffer_capacity = 100000;
  Index n_q_samples = 2;
  bool normalize_returns = true;
  double normalizer_momentum = 0.005;
  std::uint64_t seed = 0;
  long long log_every = 1;
  long long checkpoint_every = 0;  // 0: only at the end
  bool checkpoint_buffer = true;

  long long resolved_warmup() const { return warmup_steps < 0 ? 10 * batch_size : warmup_steps; }
  void validate() const;
};

struct RunConfig {
  std::string env;
  nlohmann::json env_overrides = nlohmann::json::object();
  TrainerConfig trainer;
  NetworkConfig value_net{.prior_skip = true};
  NetworkConfig policy_net{.beta_min = 1e-4, .beta_max = 0.02};
  EntropyConfig entropy;
  policy::ExplorationConfig exploration;
  std::string output_dir = "runs/default";
};

/// Every key with its default value; the documented schema.
nlohmann::json default_config_json();

/// Validates against the schema (unknown keys and a missing `env` are
/// rejected, listing the offending keys), fills defaults and converts.
RunConfig parse_config(const nlohmann::json& user);

/// Fully materialized configuration.
nlohmann::json to_json(const RunConfig& config);

/// Applies "dotted.key=value" overrides. Values are parsed as JSON when
/// possible and taken as strings otherwise.
void apply_overrides(nlohmann::json& config, const std::vector<std::string>& overrides);

RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides = {});

}  // namespace dsacd::io
