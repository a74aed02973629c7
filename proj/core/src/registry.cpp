#include "dsacd/envs/registry.hpp"

#include <stdexcept>

#include "dsacd/envs/bimodal_bandit.hpp"
#include "dsacd/envs/constant_chain.hpp"
#include "dsacd/envs/point_mass.hpp"

namespace dsacd::envs {

namespace {

template <typename T>
void take(const nlohmann::json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& overrides, std::initializer_list<const char*> known,
                    const std::string& env) {
  for (const auto& [key, value] : overrides.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw std::invalid_argument("unknown parameter '" + key + "' for environment " + env);
  }
}

}  // namespace

std::vector<std::string> environment_names() {
  return {"bimodal_bandit", "two_goal_pointmass", "constant_chain"};
}

std::unique_ptr<Environment> make_environment(const std::string& name, const nlohmann::json& overrides) {
  if (!overrides.is_object()) throw std::invalid_argument("environment overrides must be an object");
  if (name == "bimodal_bandit") {
    reject_unknown(overrides, {"mode", "noise_std"}, name);
    BimodalBandit::Params p;
    take(overrides, "mode", p.mode);
    take(overrides, "noise_std", p.noise_std);
    return std::make_unique<BimodalBandit>(p);
  }
  if (name == "two_goal_pointmass") {
    reject_unknown(overrides,
                   {"dt", "accel_scale", "drag", "obstacle_center", "obstacle_radius", "goal",
                    "goal_radius", "obstacle_penalty", "action_penalty", "max_steps"},
                   name);
    TwoGoalPointMass::Params p;
    take(overrides, "dt", p.dt);
    take(overrides, "accel_scale", p.accel_scale);
    take(overrides, "drag", p.drag);
    take(overrides, "obstacle_center", p.obstacle_center);
    take(overrides, "obstacle_radius", p.obstacle_radius);
    take(overrides, "goal", p.goal);
    take(overrides, "goal_radius", p.goal_radius);
    take(overrides, "obstacle_penalty", p.obstacle_penalty);
    take(overrides, "action_penalty", p.action_penalty);
    take(overrides, "max_steps", p.max_steps);
    return std::make_unique<TwoGoalPointMass>(p);
  }
  if (name == "constant_chain") {
    reject_unknown(overrides, {"reward", "max_steps"}, name);
    double reward = 1.0;
    int max_steps = 1000;
    take(overrides, "reward", reward);
    take(overrides, "max_steps", max_steps);
    return std::make_unique<ConstantChain>(reward, max_steps);
  }
  throw std::invalid_argument("unknown environment '" + name + "'");
}

}  // namespace dsacd::envs
