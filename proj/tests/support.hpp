#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "dsacd/types.hpp"

namespace dsacd::testing {

/// W1 between two empirical samples of equal or unequal size, computed from
/// the quantile functions.
inline double wasserstein1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> grid;
  grid.reserve(a.size() + b.size());
  grid.insert(grid.end(), a.begin(), a.end());
  grid.insert(grid.end(), b.begin(), b.end());
  std::sort(grid.begin(), grid.end());
  double total = 0.0;
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    while (ia < a.size() && a[ia] <= grid[k]) ++ia;
    while (ib < b.size() && b[ib] <= grid[k]) ++ib;
    const double fa = static_cast<double>(ia) / a.size();
    const double fb = static_cast<double>(ib) / b.size();
    total += std::abs(fa - fb) * (grid[k + 1] - grid[k]);
  }
  return total;
}

/// W1 between an empirical sample and a discrete law given as sorted atoms.
inline double wasserstein1(std::vector<double> sample, const std::vector<std::pair<double, double>>& atoms) {
  std::sort(sample.begin(), sample.end());
  std::vector<double> grid(sample);
  for (const auto& [v, p] : atoms) grid.push_back(v);
  std::sort(grid.begin(), grid.end());
  double total = 0.0;
  std::size_t is = 0, ia = 0;
  double fa = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    while (is < sample.size() && sample[is] <= grid[k]) ++is;
    while (ia < atoms.size() && atoms[ia].first <= grid[k]) fa += atoms[ia++].second;
    const double fs = static_cast<double>(is) / sample.size();
    total += std::abs(fs - fa) * (grid[k + 1] - grid[k]);
  }
  return total;
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

/// Standard normal quantile by bisection on the erfc-based CDF.
inline double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// N(mu, sigma^2) discretized at m equal-mass midpoint quantiles.
inline std::vector<std::pair<double, double>> gaussian_atoms(double mu, double sigma, int m) {
  std::vector<std::pair<double, double>> atoms;
  for (int i = 0; i < m; ++i) atoms.emplace_back(mu + sigma * normal_quantile((i + 0.5) / m), 1.0 / m);
  return atoms;
}

/// Upper-tail chi-square quantile by the Wilson-Hilferty approximation.
inline double chi2_quantile(double dof, double z) {
  const double c = 2.0 / (9.0 * dof);
  return dof * std::pow(1.0 - c + z * std::sqrt(c), 3);
}

/// Central differences of f around x.
inline Vector numeric_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                               double h = 1e-5) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-12});
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace dsacd::testing
