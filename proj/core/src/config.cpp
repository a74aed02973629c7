#include "dsacd/io/config.hpp"

#include <fstream>
#include <sstream>

#include "dsacd/envs/registry.hpp"

namespace dsacd::io {

using nlohmann::json;

namespace {

json network_json(const NetworkConfig& n) {
  return {{"hidden", n.hidden},
          {"time_embedding", n.time_embedding},
          {"activation", nn::to_string(n.activation)},
          {"output_scale", n.output_scale},
          {"diffusion_steps", n.diffusion_steps},
          {"beta_min", n.beta_min},
          {"beta_max", n.beta_max},
          {"schedule", diffusion::to_string(n.schedule)},
          {"prior_skip", n.prior_skip}};
}

void collect_unknown(const json& user, const json& schema, const std::string& prefix,
                     std::vector<std::string>& unknown) {
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!schema.contains(key)) {
      unknown.push_back(path);
      continue;
    }
    if (key == "env_overrides" && prefix.empty()) continue;
    if (schema.at(key).is_object()) {
      if (!value.is_object()) {
        unknown.push_back(path);
        continue;
      }
      collect_unknown(value, schema.at(key), path, unknown);
    }
  }
}

template <typename T>
T get(const json& j, const char* section, const char* key) {
  try {
    return j.at(section).at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid value for ") + section + "." + key + ": " + e.what(),
                      {std::string(section) + "." + key});
  }
}

NetworkConfig network_from(const json& j, const char* section) {
  NetworkConfig n;
  n.hidden = get<std::vector<Index>>(j, section, "hidden");
  n.time_embedding = get<Index>(j, section, "time_embedding");
  n.activation = nn::parse_activation(get<std::string>(j, section, "activation"));
  n.output_scale = get<double>(j, section, "output_scale");
  n.diffusion_steps = get<int>(j, section, "diffusion_steps");
  n.beta_min = get<double>(j, section, "beta_min");
  n.beta_max = get<double>(j, section, "beta_max");
  n.prior_skip = get<bool>(j, section, "prior_skip");
  n.schedule = diffusion::parse_schedule_shape(get<std::string>(j, section, "schedule"));
  return n;
}

}  // namespace

void TrainerConfig::validate() const {
  std::vector<std::string> bad;
  if (!(gamma >= 0.0 && gamma < 1.0)) bad.push_back("trainer.gamma");
  if (!(tau >= 0.0 && tau <= 1.0)) bad.push_back("trainer.tau");
  if (delayed_update_interval < 1) bad.push_back("trainer.delayed_update_interval");
  if (batch_size < 1) bad.push_back("trainer.batch_size");
  if (updates_per_step < 0.0) bad.push_back("trainer.updates_per_step");
  if (n_samplers < 1) bad.push_back("trainer.n_samplers");
  if (steps_per_iteration < 0) bad.push_back("trainer.steps_per_iteration");
  if (iterations < 0) bad.push_back("trainer.iterations");
  if (buffer_capacity < 1) bad.push_back("trainer.buffer_capacity");
  if (n_q_samples < 1) bad.push_back("trainer.n_q_samples");
  if (lr_value < 0.0 || lr_policy < 0.0 || lr_alpha < 0.0) bad.push_back("trainer.lr_*");
  if (!bad.empty()) {
    std::string msg = "invalid trainer settings:";
    for (const auto& k : bad) msg += " " + k;
    throw ConfigError(msg, bad);
  }
}

json default_config_json() {
  const RunConfig d;
  json j = to_json(d);
  j["env"] = "";
  return j;
}

json to_json(const RunConfig& c) {
  const auto& t = c.trainer;
  const auto& e = c.entropy;
  json entropy = {{"components", e.components},
                  {"n_actions", e.n_actions},
                  {"n_states", e.n_states},
                  {"em_max_iters", e.em_max_iters},
                  {"em_tol", e.em_tol},
                  {"covariance_floor", e.covariance_floor},
                  {"covariance", e.covariance == entropy::CovarianceType::diagonal ? "diagonal" : "full"},
                  {"log_prob_mode", policy::to_string(e.log_prob_mode)},
                  {"include_exploration_noise", e.include_exploration_noise},
                  {"target_entropy", e.has_target_entropy ? json(e.target_entropy) : json(nullptr)},
                  {"alpha_init", e.alpha_init},
                  {"alpha_min", e.alpha_min},
                  {"alpha_max", e.alpha_max}};
  return {{"env", c.env},
          {"env_overrides", c.env_overrides},
          {"output_dir", c.output_dir},
          {"trainer",
           {{"gamma", t.gamma},
            {"lr_value", t.lr_value},
            {"lr_policy", t.lr_policy},
            {"lr_alpha", t.lr_alpha},
            {"tau", t.tau},
            {"delayed_update_interval", t.delayed_update_interval},
            {"batch_size", t.batch_size},
            {"updates_per_step", t.updates_per_step},
            {"n_samplers", t.n_samplers},
            {"steps_per_iteration", t.steps_per_iteration},
            {"iterations", t.iterations},
            {"warmup_steps", t.warmup_steps},
            {"buffer_capacity", t.buffer_capacity},
            {"n_q_samples", t.n_q_samples},
            {"normalize_returns", t.normalize_returns},
            {"normalizer_momentum", t.normalizer_momentum},
            {"seed", t.seed},
            {"log_every", t.log_every},
            {"checkpoint_every", t.checkpoint_every},
            {"checkpoint_buffer", t.checkpoint_buffer}}},
          {"value_net", network_json(c.value_net)},
          {"policy_net", network_json(c.policy_net)},
          {"entropy", entropy},
          {"exploration", {{"lambda", c.exploration.lambda}, {"enabled", c.exploration.enabled}}}};
}

RunConfig parse_config(const json& user) {
  if (!user.is_object()) throw ConfigError("configuration must be a key-value object", {});
  const json schema = default_config_json();
  std::vector<std::string> unknown;
  collect_unknown(user, schema, "", unknown);
  if (!unknown.empty()) {
    std::string msg = "unknown configuration keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg, unknown);
  }
  if (!user.contains("env") || !user.at("env").is_string() || user.at("env").get<std::string>().empty())
    throw ConfigError("missing required key: env", {"env"});

  json merged = schema;
  merged.merge_patch(user);
  // merge_patch drops explicit nulls; target_entropy null means "use the default".
  if (!merged["entropy"].contains("target_entropy")) merged["entropy"]["target_entropy"] = nullptr;

  RunConfig c;
  try {
    c.env = merged.at("env").get<std::string>();
    c.env_overrides = merged.at("env_overrides");
    if (!c.env_overrides.is_object()) throw ConfigError("env_overrides must be an object", {"env_overrides"});
    try {
      envs::make_environment(c.env, c.env_overrides);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what(), {"env"});
    }
    c.output_dir = merged.at("output_dir").get<std::string>();

    auto& t = c.trainer;
    t.gamma = get<double>(merged, "trainer", "gamma");
    t.lr_value = get<double>(merged, "trainer", "lr_value");
    t.lr_policy = get<double>(merged, "trainer", "lr_policy");
    t.lr_alpha = get<double>(merged, "trainer", "lr_alpha");
    t.tau = get<double>(merged, "trainer", "tau");
    t.delayed_update_interval = get<int>(merged, "trainer", "delayed_update_interval");
    t.batch_size = get<Index>(merged, "trainer", "batch_size");
    t.updates_per_step = get<double>(merged, "trainer", "updates_per_step");
    t.n_samplers = get<int>(merged, "trainer", "n_samplers");
    t.steps_per_iteration = get<int>(merged, "trainer", "steps_per_iteration");
    t.iterations = get<long long>(merged, "trainer", "iterations");
    t.warmup_steps = get<long long>(merged, "trainer", "warmup_steps");
    t.buffer_capacity = get<Index>(merged, "trainer", "buffer_capacity");
    t.n_q_samples = get<Index>(merged, "trainer", "n_q_samples");
    t.normalize_returns = get<bool>(merged, "trainer", "normalize_returns");
    t.normalizer_momentum = get<double>(merged, "trainer", "normalizer_momentum");
    t.seed = get<std::uint64_t>(merged, "trainer", "seed");
    t.log_every = get<long long>(merged, "trainer", "log_every");
    t.checkpoint_every = get<long long>(merged, "trainer", "checkpoint_every");
    t.checkpoint_buffer = get<bool>(merged, "trainer", "checkpoint_buffer");
    t.validate();

    c.value_net = network_from(merged, "value_net");
    c.policy_net = network_from(merged, "policy_net");

    auto& e = c.entropy;
    e.components = get<int>(merged, "entropy", "components");
    e.n_actions = get<Index>(merged, "entropy", "n_actions");
    e.n_states = get<Index>(merged, "entropy", "n_states");
    e.em_max_iters = get<int>(merged, "entropy", "em_max_iters");
    e.em_tol = get<double>(merged, "entropy", "em_tol");
    e.covariance_floor = get<double>(merged, "entropy", "covariance_floor");
    e.covariance = entropy::parse_covariance_type(get<std::string>(merged, "entropy", "covariance"));
    e.log_prob_mode = policy::parse_log_prob_mode(get<std::string>(merged, "entropy", "log_prob_mode"));
    e.include_exploration_noise = get<bool>(merged, "entropy", "include_exploration_noise");
    const json& te = merged.at("entropy").at("target_entropy");
    e.has_target_entropy = !te.is_null();
    if (e.has_target_entropy) e.target_entropy = te.get<double>();
    e.alpha_init = get<double>(merged, "entropy", "alpha_init");
    e.alpha_min = get<double>(merged, "entropy", "alpha_min");
    e.alpha_max = get<double>(merged, "entropy", "alpha_max");
    if (e.components < 1 || e.n_actions < e.components || e.n_states < 1)
      throw ConfigError("entropy settings need n_actions >= components >= 1 and n_states >= 1",
                        {"entropy.components", "entropy.n_actions"});
    if (!(e.alpha_min > 0.0 && e.alpha_min <= e.alpha_init && e.alpha_init <= e.alpha_max))
      throw ConfigError("entropy.alpha_* must satisfy 0 < alpha_min <= alpha_init <= alpha_max",
                        {"entropy.alpha_min", "entropy.alpha_init", "entropy.alpha_max"});

    c.exploration.lambda = get<double>(merged, "exploration", "lambda");
    c.exploration.enabled = get<bool>(merged, "exploration", "enabled");
    if (c.exploration.lambda < 0.0) throw ConfigError("exploration.lambda must be >= 0", {"exploration.lambda"});
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("invalid configuration: ") + ex.what(), {});
  }
  return c;
}

void apply_overrides(json& config, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("override '" + o + "' is not of the form key=value", {o});
    const std::string key = o.substr(0, eq), raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    json* node = &config;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      if (!node->contains(parts[i])) (*node)[parts[i]] = json::object();
      node = &(*node)[parts[i]];
    }
    (*node)[parts.back()] = value;
  }
}

RunConfig load_config_file(const std::string& path, const std::vector<std::string>& overrides) {
  json j = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open configuration file " + path, {});
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError("malformed configuration file " + path + ": " + e.what(), {});
    }
  }
  apply_overrides(j, overrides);
  return parse_config(j);
}

}  // namespace dsacd::io
