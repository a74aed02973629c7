#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsacd/entropy/gmm.hpp"
#include "dsacd/envs/point_mass.hpp"

namespace dsacd::io {

enum class PlotKind { curves, return_hist, action_modes, trajectories };
PlotKind parse_plot_kind(const std::string& name);
const char* to_string(PlotKind kind);

using Figure = std::pair<std::string, std::string>;  // (file stem, svg)

/// One chart per metric against the iteration index. With no records a single
/// empty chart carrying a warning note is returned.
std::vector<Figure> render_curves(const std::vector<nlohmann::json>& records);

/// Histogram of model return draws, overlaid with reference draws if given.
std::string render_return_hist(const std::vector<double>& model, const std::vector<double>& reference,
                               const std::string& title);

/// 1-D actions: histogram with the fitted component densities. 2-D actions:
/// scatter with two-sigma component ellipses.
std::string render_action_modes(const Matrix& actions, const entropy::GmmFit& fit, const std::string& title);

/// Point-mass paths (2 x T positions each) colored by the goal they reached.
std::string render_trajectories(const std::vector<Matrix>& paths, const std::vector<int>& labels,
                                const envs::TwoGoalPointMass::Params& params);

}  // namespace dsacd::io
