#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dsacd/io/config.hpp"
#include "dsacd/io/metrics.hpp"
#include "dsacd/io/plots.hpp"
#include "dsacd/io/svg.hpp"
#include "dsacd/random.hpp"

using namespace dsacd;
using namespace dsacd::io;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::string> error_keys(const json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.keys();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults round trip through json") {
  const RunConfig c = parse_config({{"env", "bimodal_bandit"}});
  CHECK(c.trainer.gamma == 0.99);
  CHECK(c.value_net.prior_skip);
  CHECK_FALSE(c.policy_net.prior_skip);
  const RunConfig back = parse_config(to_json(c));
  CHECK(to_json(back) == to_json(c));
  const json schema = default_config_json();
  for (const char* section : {"trainer", "value_net", "policy_net", "entropy", "exploration"}) CHECK(schema.contains(section));
}

TEST_CASE("unknown keys are named") {
  CHECK(error_keys({{"env", "bimodal_bandit"}, {"trainer", {{"gama", 0.9}}}}) == std::vector<std::string>{"trainer.gama"});
  CHECK(error_keys({{"env", "bimodal_bandit"}, {"optimizer", 1}}) == std::vector<std::string>{"optimizer"});
  CHECK(error_keys({{"trainer", {{"gamma", 0.9}}}}) == std::vector<std::string>{"env"});
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(parse_config({{"env", "bimodal_bandit"}, {"trainer", {{"gamma", 1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"env", "bimodal_bandit"}, {"trainer", {{"batch_size", "big"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"env", "bimodal_bandit"}, {"entropy", {{"components", 9}, {"n_actions", 4}}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config({{"env", "bimodal_bandit"}, {"exploration", {{"lambda", -1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("dotted overrides") {
  json j = {{"env", "bimodal_bandit"}};
  apply_overrides(j, {"trainer.gamma=0.5", "trainer.seed=7", "entropy.log_prob_mode=batch_entropy",
                      "value_net.hidden=[4,4]", "env_overrides.mode=0.3"});
  const RunConfig c = parse_config(j);
  CHECK(c.trainer.gamma == 0.5);
  CHECK(c.trainer.seed == 7);
  CHECK(c.entropy.log_prob_mode == policy::LogProbMode::batch_entropy);
  CHECK(c.value_net.hidden == std::vector<Index>{4, 4});
  CHECK(c.env_overrides.at("mode") == 0.3);
  CHECK_THROWS_AS(apply_overrides(j, {"trainer.gamma"}), ConfigError);
  CHECK_THROWS_AS(apply_overrides(j, {"=3"}), ConfigError);
}

TEST_CASE("config files") {
  TempDir tmp("dsacd_test_io_cfg");
  const auto path = (tmp.path / "c.json").string();
  std::ofstream(path) << "{\"env\": \"two_goal_pointmass\", \"trainer\": {\"tau\": 0.01}}";
  const RunConfig c = load_config_file(path, {"trainer.tau=0.02"});
  CHECK(c.env == "two_goal_pointmass");
  CHECK(c.trainer.tau == 0.02);
  std::ofstream(path) << "{\"env\": ";
  CHECK_THROWS_AS(load_config_file(path), ConfigError);
  CHECK_THROWS_AS(load_config_file((tmp.path / "missing.json").string()), ConfigError);
}

TEST_CASE("metrics records turn non-finite values into null") {
  runtime::IterationMetrics m;
  m.iteration = 4;
  m.value_loss = std::nan("");
  m.policy_objective = INFINITY;
  m.alpha = 0.3;
  m.wall_time = 1.5;
  const json j = metrics_json(m);
  CHECK(j.at("J_z").is_null());
  CHECK(j.at("J_pi").is_null());
  CHECK(j.at("alpha") == 0.3);
  CHECK_FALSE(j.contains("wall_time"));
  CHECK(timing_json(m).at("wall_time") == 1.5);
  CHECK(json::parse(j.dump()) == j);
}

TEST_CASE("jsonl append and read back") {
  TempDir tmp("dsacd_test_io_jsonl");
  const auto path = (tmp.path / "m.jsonl").string();
  {
    JsonlWriter w(path);
    w.write({{"a", 1}});
    w.write({{"a", 2}});
  }
  JsonlWriter(path).write({{"a", 3}});
  const auto recs = read_jsonl(path);
  REQUIRE(recs.size() == 3);
  CHECK(recs[2].at("a") == 3);
  std::ofstream(path, std::ios::app) << "\n{broken\n";
  try {
    read_jsonl(path);
    FAIL("expected a parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(":5:") != std::string::npos);
  }
  CHECK_THROWS_AS(read_jsonl((tmp.path / "none.jsonl").string()), std::runtime_error);
}

TEST_CASE("tick marks") {
  const auto t = nice_ticks(0.0, 1.0, 6);
  REQUIRE(t.size() >= 3);
  CHECK(t.front() >= 0.0);
  CHECK(t.back() <= 1.0 + 1e-12);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] - t[i - 1] == doctest::Approx(t[1] - t[0]));
  const double step = t[1] - t[0];
  const double mant = step / std::pow(10.0, std::floor(std::log10(step)));
  CHECK((std::abs(mant - 1) < 1e-9 || std::abs(mant - 2) < 1e-9 || std::abs(mant - 5) < 1e-9));
}

TEST_CASE("plots render standalone svg") {
  json rec = {{"iteration", 0}, {"J_z", 1.0}, {"J_pi", nullptr}, {"alpha", 0.5}};
  const auto curves = render_curves({rec, {{"iteration", 1}, {"J_z", 0.5}, {"alpha", 0.4}}});
  REQUIRE_FALSE(curves.empty());
  for (const auto& [stem, svg] : curves) {
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
  }
  const auto empty = render_curves({});
  REQUIRE(empty.size() == 1);
  CHECK(empty[0].second.find("no metrics records") != std::string::npos);

  Rng rng(1);
  entropy::GmmFit fit;
  fit.weights = Vector::Constant(2, 0.5);
  fit.means = Matrix(1, 2);
  fit.means << -0.6, 0.6;
  fit.covariances = {Matrix::Constant(1, 1, 0.01), Matrix::Constant(1, 1, 0.01)};
  CHECK(render_action_modes(rng.normal_matrix(1, 50), fit, "t").find("</svg>") != std::string::npos);
  CHECK(render_return_hist({1, 2, 3}, {}, "r").find("</svg>") != std::string::npos);
  CHECK(parse_plot_kind(to_string(PlotKind::trajectories)) == PlotKind::trajectories);
  CHECK_THROWS_AS(parse_plot_kind("heatmap"), std::invalid_argument);
}
