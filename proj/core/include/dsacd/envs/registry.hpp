#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsacd/envs/environment.hpp"

namespace dsacd::envs {

/// Builds an environment by name with optional parameter overrides. Unknown
/// names or override keys throw std::invalid_argument.
std::unique_ptr<Environment> make_environment(const std::string& name,
                                              const nlohmann::json& overrides = nlohmann::json::object());

std::vector<std::string> environment_names();

}  // namespace dsacd::envs
