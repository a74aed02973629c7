#include "dsacd/io/plots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "dsacd/io/svg.hpp"

namespace dsacd::io {

namespace {

struct Histogram {
  std::vector<double> edges, density;
};

Histogram histogram(const std::vector<double>& v, double lo, double hi, int bins) {
  Histogram h;
  if (!(hi > lo)) hi = lo + 1.0;
  for (int i = 0; i <= bins; ++i) h.edges.push_back(lo + (hi - lo) * i / bins);
  h.density.assign(static_cast<std::size_t>(bins), 0.0);
  const double width = (hi - lo) / bins;
  for (double x : v) {
    int b = static_cast<int>(std::floor((x - lo) / width));
    b = std::clamp(b, 0, bins - 1);
    h.density[static_cast<std::size_t>(b)] += 1.0;
  }
  if (!v.empty())
    for (double& d : h.density) d /= static_cast<double>(v.size()) * width;
  return h;
}

}  // namespace

PlotKind parse_plot_kind(const std::string& name) {
  if (name == "curves") return PlotKind::curves;
  if (name == "return_hist") return PlotKind::return_hist;
  if (name == "action_modes") return PlotKind::action_modes;
  if (name == "trajectories") return PlotKind::trajectories;
  throw std::invalid_argument("unknown plot kind '" + name +
                              "' (expected curves, return_hist, action_modes or trajectories)");
}

const char* to_string(PlotKind kind) {
  switch (kind) {
    case PlotKind::curves: return "curves";
    case PlotKind::return_hist: return "return_hist";
    case PlotKind::action_modes: return "action_modes";
    case PlotKind::trajectories: return "trajectories";
  }
  return "?";
}

std::vector<Figure> render_curves(const std::vector<nlohmann::json>& records) {
  static const std::vector<std::pair<std::string, std::string>> series = {
      {"J_z", "DVN loss"},       {"J_pi", "policy objective"}, {"q_mean", "mean Bellman target"},
      {"H_hat", "entropy estimate"}, {"alpha", "temperature"},    {"episode_return_mean", "episode return"}};
  std::vector<Figure> figures;
  if (records.empty()) {
    SvgChart chart("training curves", "iteration", "value");
    chart.note("warning: no metrics records");
    figures.emplace_back("curves", chart.render());
    return figures;
  }
  for (const auto& [key, title] : series) {
    std::vector<double> xs, ys;
    for (const auto& r : records) {
      if (!r.contains(key) || !r.at(key).is_number()) continue;
      xs.push_back(r.at("iteration").get<double>());
      ys.push_back(r.at(key).get<double>());
    }
    SvgChart chart(title, "iteration", key);
    if (xs.empty()) {
      chart.note("no finite values");
    } else {
      chart.fit(xs, ys);
      chart.line(xs, ys, SvgChart::palette(0), key);
    }
    figures.emplace_back("curves_" + key, chart.render());
  }
  return figures;
}

std::string render_return_hist(const std::vector<double>& model, const std::vector<double>& reference,
                               const std::string& title) {
  std::vector<double> all = model;
  all.insert(all.end(), reference.begin(), reference.end());
  SvgChart chart(title, "return", "density");
  if (all.empty()) {
    chart.note("warning: no samples");
    return chart.render();
  }
  const auto [lo, hi] = std::minmax_element(all.begin(), all.end());
  const double pad = 0.05 * std::max(*hi - *lo, 1e-6);
  const Histogram hm = histogram(model, *lo - pad, *hi + pad, 40);
  double top = *std::max_element(hm.density.begin(), hm.density.end());
  Histogram hr;
  if (!reference.empty()) {
    hr = histogram(reference, *lo - pad, *hi + pad, 40);
    top = std::max(top, *std::max_element(hr.density.begin(), hr.density.end()));
  }
  chart.set_range(*lo - pad, *hi + pad, 0.0, 1.05 * top);
  chart.bars(hm.edges, hm.density, SvgChart::palette(0), "model draws");
  if (!reference.empty()) chart.bars(hr.edges, hr.density, SvgChart::palette(1), "reference", 0.35);
  return chart.render();
}

std::string render_action_modes(const Matrix& actions, const entropy::GmmFit& fit, const std::string& title) {
  if (actions.rows() == 1) {
    std::vector<double> v(actions.data(), actions.data() + actions.size());
    SvgChart chart(title, "action", "density");
    const Histogram h = histogram(v, -1.0, 1.0, 40);
    double top = h.density.empty() ? 1.0 : *std::max_element(h.density.begin(), h.density.end());
    std::vector<std::vector<double>> curves;
    std::vector<double> xs;
    for (int i = 0; i <= 200; ++i) xs.push_back(-1.0 + 2.0 * i / 200);
    for (Index k = 0; k < fit.components(); ++k) {
      std::vector<double> ys;
      for (double x : xs)
        ys.push_back(fit.weights[k] *
                     std::exp(entropy::gaussian_log_pdf(Vector::Constant(1, x), fit.means.col(k), fit.covariances[k])));
      top = std::max(top, *std::max_element(ys.begin(), ys.end()));
      curves.push_back(std::move(ys));
    }
    chart.set_range(-1.0, 1.0, 0.0, 1.05 * top);
    chart.bars(h.edges, h.density, SvgChart::palette(0), "sampled actions");
    for (std::size_t k = 0; k < curves.size(); ++k)
      chart.line(xs, curves[k], SvgChart::palette(static_cast<int>(k) + 1), "component " + std::to_string(k), 2.0);
    return chart.render();
  }
  if (actions.rows() != 2) throw std::invalid_argument("action_modes plots 1-D or 2-D actions only");
  SvgChart chart(title, "a1", "a2", 520, 520);
  chart.set_range(-1.0, 1.0, -1.0, 1.0);
  std::vector<double> xs(actions.cols()), ys(actions.cols());
  for (Index j = 0; j < actions.cols(); ++j) {
    xs[static_cast<std::size_t>(j)] = actions(0, j);
    ys[static_cast<std::size_t>(j)] = actions(1, j);
  }
  chart.points(xs, ys, SvgChart::palette(0), "sampled actions");
  for (Index k = 0; k < fit.components(); ++k) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(fit.covariances[k]);
    const Vector ev = es.eigenvalues().cwiseMax(0.0);
    const Vector major = es.eigenvectors().col(1);
    chart.ellipse(fit.means(0, k), fit.means(1, k), 2.0 * std::sqrt(ev[1]), 2.0 * std::sqrt(ev[0]),
                  std::atan2(major[1], major[0]), SvgChart::palette(static_cast<int>(k) + 1));
  }
  return chart.render();
}

std::string render_trajectories(const std::vector<Matrix>& paths, const std::vector<int>& labels,
                                const envs::TwoGoalPointMass::Params& params) {
  SvgChart chart("point-mass rollouts", "x", "y", 520, 560);
  const double gx = std::abs(params.goal[0]), gy = params.goal[1];
  chart.set_range(-gx - 0.8, gx + 0.8, -0.3, gy + 0.5);
  chart.circle(params.obstacle_center[0], params.obstacle_center[1], params.obstacle_radius, "#777", 0.5);
  chart.circle(-gx, gy, params.goal_radius, "#2ca02c", 0.5);
  chart.circle(gx, gy, params.goal_radius, "#2ca02c", 0.5);
  bool seen[3] = {false, false, false};
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const int label = i < labels.size() ? labels[i] : 0;
    const int slot = label < 0 ? 0 : (label > 0 ? 1 : 2);
    static const char* names[] = {"left goal", "right goal", "no goal"};
    static const char* colors[] = {"#1f77b4", "#d62728", "#999999"};
    std::vector<double> xs, ys;
    for (Index t = 0; t < paths[i].cols(); ++t) {
      xs.push_back(paths[i](0, t));
      ys.push_back(paths[i](1, t));
    }
    chart.line(xs, ys, colors[slot], seen[slot] ? "" : names[slot], 1.2);
    seen[slot] = true;
  }
  return chart.render();
}

}  // namespace dsacd::io
