#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "dsacd/entropy/gmm.hpp"
#include "dsacd/envs/point_mass.hpp"
#include "dsacd/envs/registry.hpp"
#include "dsacd/io/config.hpp"
#include "dsacd/io/metrics.hpp"
#include "dsacd/io/plots.hpp"
#include "dsacd/random.hpp"
#include "dsacd/runtime/checkpoint.hpp"
#include "dsacd/runtime/evaluate.hpp"
#include "dsacd/runtime/trainer.hpp"

namespace dsacd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<long long> iterations;
  std::string out;
  std::string checkpoint;
};

struct EvalArgs {
  std::string checkpoint;
  std::string env;
  std::vector<std::string> overrides;
  int episodes = 10;
  std::uint64_t seed = 0;
  bool deterministic = false;
  bool bias = false;
  std::string out;
  int samples = 1000;
};

struct PlotArgs {
  std::string kind;
  std::string out = ".";
};

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

json read_json(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed artifact " + path.string() + ": " + e.what());
  }
}

json matrix_json(const Matrix& m) {
  json cols = json::array();
  for (Index j = 0; j < m.cols(); ++j) cols.push_back(std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows()));
  return cols;
}

Matrix matrix_from_json(const json& cols) {
  if (!cols.is_array() || cols.empty()) return Matrix();
  const Index d = static_cast<Index>(cols.at(0).size());
  Matrix m(d, static_cast<Index>(cols.size()));
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < d; ++i) m(i, j) = cols.at(static_cast<std::size_t>(j)).at(static_cast<std::size_t>(i)).get<double>();
  return m;
}

json gmm_json(const entropy::GmmFit& fit) {
  json covs = json::array();
  for (const auto& c : fit.covariances) covs.push_back(matrix_json(c));
  return {{"weights", std::vector<double>(fit.weights.data(), fit.weights.data() + fit.weights.size())},
          {"means", matrix_json(fit.means)},
          {"covariances", covs}};
}

entropy::GmmFit gmm_from_json(const json& j) {
  entropy::GmmFit fit;
  const auto w = j.at("weights").get<std::vector<double>>();
  fit.weights = Eigen::Map<const Vector>(w.data(), static_cast<Index>(w.size()));
  fit.means = matrix_from_json(j.at("means"));
  for (const auto& c : j.at("covariances")) fit.covariances.push_back(matrix_from_json(c));
  return fit;
}

json report_json(const runtime::EvalReport& r) {
  json j = {{"episodes", r.returns.size()}, {"returns", r.returns}, {"lengths", r.lengths}};
  if (!r.returns.empty()) {
    j["mean_return"] = r.mean_return;
    j["std_return"] = r.std_return;
  }
  if (r.bias)
    j["bias"] = {{"mean_bias", r.bias->mean_bias},
                 {"mean_relative_bias", r.bias->mean_relative_bias},
                 {"mean_true_q", r.bias->mean_true_q},
                 {"mean_estimated_q", r.bias->mean_estimated_q},
                 {"pairs", r.bias->n_pairs}};
  return j;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  std::optional<runtime::Trainer> trainer;
  if (!a.checkpoint.empty()) {
    if (!a.config.empty() || !a.overrides.empty() || a.seed)
      throw io::ConfigError("--checkpoint resumes a run; --config, --override and --seed do not apply", {});
    trainer.emplace(runtime::Trainer::load_checkpoint(a.checkpoint));
  }
  io::RunConfig config;
  if (trainer) {
    config = trainer->config();
  } else {
    json user = json::object();
    if (!a.config.empty()) {
      std::ifstream f(a.config);
      if (!f) throw io::ConfigError("cannot open configuration file " + a.config, {});
      try {
        user = json::parse(f);
      } catch (const json::parse_error& e) {
        throw io::ConfigError("malformed configuration file " + a.config + ": " + e.what(), {});
      }
    }
    io::apply_overrides(user, a.overrides);
    if (a.seed) user["trainer"]["seed"] = *a.seed;
    config = io::parse_config(user);
  }
  if (a.iterations) config.trainer.iterations = *a.iterations;
  if (!a.out.empty()) config.output_dir = a.out;
  config.trainer.validate();
  const fs::path dir = resolve_output_dir(config.output_dir);

  if (!trainer) trainer.emplace(config);  // validates the environment before anything is written

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("output directory " + dir.string() + " is not writable");
  json resolved = io::to_json(config);
  write_json(dir / "config.resolved.json", resolved);

  const bool resume = !a.checkpoint.empty();
  if (!resume) {
    std::ofstream(dir / "metrics.jsonl", std::ios::trunc);
    std::ofstream(dir / "timing.jsonl", std::ios::trunc);
  }
  io::JsonlWriter metrics((dir / "metrics.jsonl").string());
  io::JsonlWriter timing((dir / "timing.jsonl").string());

  const auto& tc = config.trainer;
  const long long log_every = std::max<long long>(tc.log_every, 1);
  try {
    while (trainer->iteration() < tc.iterations) {
      const runtime::IterationMetrics m = trainer->train_iteration();
      if (m.iteration % log_every == 0 || trainer->iteration() == tc.iterations) {
        metrics.write(io::metrics_json(m));
        timing.write(io::timing_json(m));
      }
      if (tc.checkpoint_every > 0 && trainer->iteration() % tc.checkpoint_every == 0)
        trainer->save_checkpoint((dir / "checkpoints" / ("checkpoint_" + std::to_string(trainer->iteration()) + ".bin")).string(),
                                 tc.checkpoint_buffer);
    }
  } catch (const runtime::NumericalError&) {
    trainer->save_checkpoint((dir / "checkpoint.aborted.bin").string(), false);
    throw;
  }
  trainer->save_checkpoint((dir / "checkpoint.bin").string(), tc.checkpoint_buffer);
  out << "trained " << trainer->iteration() << " iterations, " << trainer->updates() << " updates, "
      << trainer->env_steps() << " env steps; artifacts in " << dir.string() << '\n';
  return kOk;
}

// Sampled actions at the first evaluation state, their mixture fit, and one
// DVN return draw per action next to sampled rewards for one-step envs.
void write_eval_artifacts(const runtime::Trainer& trainer, envs::Environment& env, const EvalArgs& a,
                          const fs::path& dir) {
  const auto& cfg = trainer.config();
  const Vector s0 = env.reset(derive_seed(a.seed, 0));
  const Matrix actions =
      policy::sample_actions(trainer.policy_model(), s0, a.samples, derive_seed(a.seed, 0xac7), value::Params::online);
  entropy::EmOptions em;
  em.components = cfg.entropy.components;
  em.max_iters = 200;
  em.covariance = cfg.entropy.covariance;
  em.seed = a.seed;
  const entropy::GmmFit fit = entropy::em_fit(actions, em);
  write_json(dir / "actions.json", {{"state", std::vector<double>(s0.data(), s0.data() + s0.size())},
                                    {"actions", matrix_json(actions)},
                                    {"gmm", gmm_json(fit)}});

  const Matrix states = s0.replicate(1, actions.cols());
  const Vector draws = trainer.value_model().sample_batch(states, actions, derive_seed(a.seed, 0x2e7));
  json returns = {{"model", std::vector<double>(draws.data(), draws.data() + draws.size())}};
  if (env.spec().max_episode_steps == 1) {
    std::vector<double> reference;
    for (Index j = 0; j < actions.cols(); ++j) {
      auto e = env.clone();
      e->reset(derive_seed(a.seed, 0x5e0 + static_cast<std::uint64_t>(j)));
      reference.push_back(e->step(actions.col(j)).reward);
    }
    returns["reference"] = reference;
  }
  write_json(dir / "returns.json", returns);

  if (auto* pm = dynamic_cast<envs::TwoGoalPointMass*>(&env)) {
    json paths = json::array();
    std::vector<int> labels;
    for (int e = 0; e < a.episodes; ++e) {
      const std::uint64_t ep_seed = derive_seed(a.seed, static_cast<std::uint64_t>(e));
      Vector s = pm->reset(ep_seed);
      Matrix path(2, 1);
      path.col(0) = s.head(2);
      int label = 0;
      for (int t = 0; t < pm->spec().max_episode_steps; ++t) {
        const Vector act = policy::sample_action(trainer.policy_model(), s,
                                                 derive_seed(ep_seed, static_cast<std::uint64_t>(t) + 1),
                                                 a.deterministic);
        const auto r = pm->step(act);
        s = r.next_state;
        path.conservativeResize(2, path.cols() + 1);
        path.col(path.cols() - 1) = s.head(2);
        label = pm->reached_goal(s);
        if (r.terminal || r.truncated) break;
      }
      paths.push_back(matrix_json(path));
      labels.push_back(label);
    }
    write_json(dir / "trajectories.json", {{"paths", paths}, {"labels", labels}});
  }
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.episodes < 0) throw io::ConfigError("--episodes must be >= 0", {"episodes"});
  const runtime::Trainer trainer = runtime::Trainer::load_checkpoint(a.checkpoint);
  const auto& cfg = trainer.config();
  json env_overrides = a.env.empty() || a.env == cfg.env ? cfg.env_overrides : json::object();
  for (const auto& o : a.overrides) {
    json tmp = json::object();
    io::apply_overrides(tmp, {o});
    env_overrides.merge_patch(tmp);
  }
  auto env = envs::make_environment(a.env.empty() ? cfg.env : a.env, env_overrides);
  runtime::EvalOptions opts;
  opts.n_episodes = a.episodes;
  opts.deterministic = a.deterministic;
  opts.bias = a.bias;
  opts.seed = a.seed;
  const runtime::EvalReport report = runtime::evaluate(trainer, *env, opts);
  const fs::path dir = fs::path(resolve_output_dir(a.out.empty() ? fs::path(a.checkpoint).parent_path().string() : a.out)) / "eval";
  const json j = report_json(report);
  write_json(dir / "report.json", j);
  if (a.episodes > 0) write_eval_artifacts(trainer, *env, a, dir);
  out << j.dump(2) << '\n';
  return kOk;
}

void write_svg(const fs::path& path, const std::string& svg) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << svg;
}

int cmd_plot(const PlotArgs& a, std::ostream& out, std::ostream& err) {
  io::PlotKind kind;
  try {
    kind = io::parse_plot_kind(a.kind);
  } catch (const std::invalid_argument& e) {
    throw io::ConfigError(e.what(), {"kind"});
  }
  const fs::path dir = resolve_output_dir(a.out);
  const fs::path plots = dir / "plots";
  std::vector<io::Figure> figures;
  switch (kind) {
    case io::PlotKind::curves: {
      const auto records = io::read_jsonl((dir / "metrics.jsonl").string());
      if (records.empty()) err << "warning: " << (dir / "metrics.jsonl").string() << " has no records\n";
      figures = io::render_curves(records);
      break;
    }
    case io::PlotKind::return_hist: {
      const json j = read_json(dir / "eval" / "returns.json");
      const auto model = j.at("model").get<std::vector<double>>();
      const auto reference = j.contains("reference") ? j.at("reference").get<std::vector<double>>() : std::vector<double>{};
      figures.emplace_back("return_hist", io::render_return_hist(model, reference, "return distribution at the start state"));
      break;
    }
    case io::PlotKind::action_modes: {
      const json j = read_json(dir / "eval" / "actions.json");
      figures.emplace_back("action_modes", io::render_action_modes(matrix_from_json(j.at("actions")),
                                                                   gmm_from_json(j.at("gmm")), "sampled actions"));
      break;
    }
    case io::PlotKind::trajectories: {
      const json j = read_json(dir / "eval" / "trajectories.json");
      std::vector<Matrix> paths;
      for (const auto& p : j.at("paths")) paths.push_back(matrix_from_json(p));
      envs::TwoGoalPointMass::Params params;
      const fs::path resolved = dir / "config.resolved.json";
      if (fs::exists(resolved)) {
        const json overrides = read_json(resolved).value("env_overrides", json::object());
        auto env = envs::make_environment("two_goal_pointmass", overrides);
        params = dynamic_cast<const envs::TwoGoalPointMass&>(*env).params();
      }
      figures.emplace_back("trajectories",
                           io::render_trajectories(paths, j.at("labels").get<std::vector<int>>(), params));
      break;
    }
  }
  for (const auto& [stem, svg] : figures) {
    write_svg(plots / (stem + ".svg"), svg);
    out << (plots / (stem + ".svg")).string() << '\n';
  }
  return kOk;
}

}  // namespace

std::string resolve_output_dir(const std::string& dir) {
  const char* root = std::getenv(kOutputRootVar);
  const fs::path p(dir);
  if (root && *root && p.is_relative()) return (fs::path(root) / p).string();
  return p.string();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion-based distributional soft actor-critic: train, evaluate and plot."};
  app.footer(std::string("Relative output directories are placed under $") + kOutputRootVar +
             " when it is set.\nExit codes: 0 ok, 1 runtime failure, 2 usage or configuration error, 3 numerical abort.");
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Run training and write metrics, checkpoints and the resolved config.");
  train->add_option("--config", ta.config, "JSON configuration file");
  train->add_option("--override", ta.overrides, "dotted.key=value override (repeatable)")->allow_extra_args(false);
  train->add_option("--seed", ta.seed, "Run seed (sets trainer.seed)");
  train->add_option("--iterations", ta.iterations, "Number of training iterations (sets trainer.iterations)");
  train->add_option("--out", ta.out, "Output directory (sets output_dir)");
  train->add_option("--checkpoint", ta.checkpoint, "Resume from this checkpoint");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint; write a report and plotting artifacts.");
  eval->add_option("--checkpoint", ea.checkpoint, "Checkpoint file")->required();
  eval->add_option("--env", ea.env, "Environment name (default: the one in the checkpoint)");
  eval->add_option("--override", ea.overrides, "Environment parameter override key=value (repeatable)")->allow_extra_args(false);
  eval->add_option("--episodes", ea.episodes, "Number of evaluation episodes")->capture_default_str();
  eval->add_option("--seed", ea.seed, "Evaluation seed")->capture_default_str();
  eval->add_flag("--deterministic", ea.deterministic, "Zero the per-step noise of the action chain");
  eval->add_flag("--bias", ea.bias, "Also report value-estimation bias against sampled returns");
  eval->add_option("--out", ea.out, "Run directory for eval/ artifacts (default: the checkpoint's directory)");
  eval->add_option("--samples", ea.samples, "Actions sampled for the plotting artifacts")->capture_default_str();

  PlotArgs pa;
  auto* plot = app.add_subcommand("plot", "Render SVG figures from a run directory into <out>/plots.");
  plot->add_option("--kind", pa.kind, "curves, return_hist, action_modes or trajectories")->required();
  plot->add_option("--out", pa.out, "Run directory holding metrics.jsonl and eval/ artifacts")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(ta, out);
    if (*eval) return cmd_eval(ea, out);
    if (*plot) return cmd_plot(pa, out, err);
  } catch (const io::ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsage;
  } catch (const runtime::NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace dsacd::cli
