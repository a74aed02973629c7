#include "dsacd/entropy/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "dsacd/random.hpp"

namespace dsacd::entropy {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;  // log(2 pi)

double log_sum_exp(const Vector& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Matrix sort_columns(const Matrix& samples) {
  std::vector<Index> order(static_cast<std::size_t>(samples.cols()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    for (Index r = 0; r < samples.rows(); ++r) {
      if (samples(r, a) < samples(r, b)) return true;
      if (samples(r, a) > samples(r, b)) return false;
    }
    return false;
  });
  Matrix out(samples.rows(), samples.cols());
  for (std::size_t i = 0; i < order.size(); ++i) out.col(static_cast<Index>(i)) = samples.col(order[i]);
  return out;
}

Matrix floor_covariance(Matrix cov, double floor, CovarianceType type) {
  if (type == CovarianceType::diagonal) {
    Matrix d = Matrix::Zero(cov.rows(), cov.cols());
    for (Index i = 0; i < cov.rows(); ++i) d(i, i) = std::max(cov(i, i), floor);
    return d;
  }
  cov = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  Vector ev = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix weighted_covariance(const Matrix& x, const Vector& w, const Vector& mean) {
  const Matrix centered = x.colwise() - mean;
  return (centered * w.asDiagonal() * centered.transpose()) / w.sum();
}

/// Per-component log w_k + log N(x_i | k), K x N.
Matrix joint_log_densities(const GmmFit& fit, const Matrix& x) {
  const Index k_count = fit.components(), n = x.cols(), d = x.rows();
  Matrix out(k_count, n);
  for (Index k = 0; k < k_count; ++k) {
    const double lw = fit.weights[k] > 0.0 ? std::log(fit.weights[k])
                                           : -std::numeric_limits<double>::infinity();
    Eigen::LLT<Matrix> llt(fit.covariances[static_cast<std::size_t>(k)]);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("mixture covariance is not positive definite");
    const Matrix& L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    const Matrix centered = x.colwise() - fit.means.col(k);
    const Matrix solved = llt.matrixL().solve(centered);
    const Vector maha = solved.colwise().squaredNorm().transpose();
    out.row(k) = (lw - 0.5 * (static_cast<double>(d) * kLog2Pi + log_det) - 0.5 * maha.array()).matrix().transpose();
  }
  return out;
}

/// E-step; fills `resp` (K x N) and returns the total log-likelihood.
double expectation(const GmmFit& fit, const Matrix& x, Matrix& resp) {
  resp = joint_log_densities(fit, x);
  const Index k_count = resp.rows();
  double total = 0.0;
  for (Index i = 0; i < x.cols(); ++i) {
    double* col = resp.col(i).data();
    double m = col[0];
    for (Index k = 1; k < k_count; ++k) m = std::max(m, col[k]);
    if (!std::isfinite(m)) {
      total += m;
      continue;
    }
    double sum = 0.0;
    for (Index k = 0; k < k_count; ++k) sum += std::exp(col[k] - m);
    const double lse = m + std::log(sum);
    total += lse;
    for (Index k = 0; k < k_count; ++k) col[k] = std::exp(col[k] - lse);
  }
  return total;
}

}  // namespace

CovarianceType parse_covariance_type(const std::string& name) {
  if (name == "diagonal") return CovarianceType::diagonal;
  if (name == "full") return CovarianceType::full;
  throw std::invalid_argument("unknown covariance type '" + name + "'");
}

double gaussian_log_pdf(const Vector& x, const Vector& mean, const Matrix& covariance) {
  Eigen::LLT<Matrix> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("covariance is not positive definite");
  const Matrix& L = llt.matrixL();
  const double log_det = 2.0 * L.diagonal().array().log().sum();
  const Vector solved = llt.matrixL().solve(x - mean);
  return -0.5 * (static_cast<double>(x.size()) * kLog2Pi + log_det + solved.squaredNorm());
}

GmmFit em_fit(const Matrix& samples, const EmOptions& options) {
  const Index n = samples.cols(), d = samples.rows();
  const Index k_count = options.components;
  if (k_count < 1) throw std::invalid_argument("em_fit: need at least one component");
  if (n < k_count)
    throw std::invalid_argument("em_fit: " + std::to_string(n) + " samples cannot support " +
                                std::to_string(k_count) + " components");
  if (d < 1) throw std::invalid_argument("em_fit: samples have zero dimension");

  const Matrix x = sort_columns(samples);
  Rng rng(options.seed);

  const Vector global_mean = x.rowwise().mean();
  const Matrix global_cov = floor_covariance(
      weighted_covariance(x, Vector::Ones(n), global_mean), options.covariance_floor, options.covariance);

  // k-means++ seeding.
  GmmFit fit;
  fit.means.resize(d, k_count);
  fit.means.col(0) = x.col(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Vector dist2 = (x.colwise() - fit.means.col(0)).colwise().squaredNorm().transpose();
  for (Index k = 1; k < k_count; ++k) {
    const double total = dist2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        u -= dist2[pick];
        if (u < 0.0) break;
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    fit.means.col(k) = x.col(pick);
    dist2 = dist2.cwiseMin((x.colwise() - fit.means.col(k)).colwise().squaredNorm().transpose());
  }
  fit.weights = Vector::Constant(k_count, 1.0 / static_cast<double>(k_count));
  fit.covariances.assign(static_cast<std::size_t>(k_count), global_cov);

  Matrix resp;
  double previous = -std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 0; it < options.max_iters; ++it) {
    const double ll = expectation(fit, x, resp);
    fit.log_likelihood_trace.push_back(ll);
    fit.log_likelihood = ll;
    if (it > 0 && ll - previous < options.tol) {
      converged = true;
      break;
    }
    previous = ll;

    // M-step.
    const Vector nk = resp.rowwise().sum();
    for (Index k = 0; k < k_count; ++k) {
      const double w = nk[k] / static_cast<double>(n);
      if (w < options.weight_floor) {
        fit.means.col(k) = x.col(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
        fit.covariances[static_cast<std::size_t>(k)] = global_cov;
        fit.weights[k] = 1.0 / static_cast<double>(k_count);
        ++fit.reseeds;
        continue;
      }
      fit.weights[k] = w;
      const Vector rk = resp.row(k).transpose();
      fit.means.col(k) = (x * rk) / nk[k];
      fit.covariances[static_cast<std::size_t>(k)] = floor_covariance(
          weighted_covariance(x, rk, fit.means.col(k)), options.covariance_floor, options.covariance);
    }
    fit.weights /= fit.weights.sum();
    fit.iterations = it + 1;
  }
  if (!converged) {
    fit.log_likelihood = expectation(fit, x, resp);
    fit.log_likelihood_trace.push_back(fit.log_likelihood);
  }
  return fit;
}

Matrix responsibilities(const GmmFit& fit, const Matrix& samples) {
  Matrix resp;
  expectation(fit, samples, resp);
  return resp;
}

void validate(const GmmFit& fit) {
  if (fit.components() < 1) throw std::invalid_argument("mixture has no components");
  if ((fit.weights.array() < 0.0).any() || std::abs(fit.weights.sum() - 1.0) > 1e-9)
    throw std::invalid_argument("mixture weights are not on the simplex");
  if (static_cast<Index>(fit.covariances.size()) != fit.components() ||
      fit.means.cols() != fit.components())
    throw std::invalid_argument("mixture component arrays disagree in size");
  for (const auto& c : fit.covariances) {
    if (c.rows() != fit.dim() || c.cols() != fit.dim())
      throw std::invalid_argument("mixture covariance has the wrong shape");
    Eigen::LLT<Matrix> llt(c);
    if (llt.info() != Eigen::Success)
      throw std::invalid_argument("mixture covariance is not positive definite");
  }
}

double gmm_entropy(const GmmFit& fit) {
  validate(fit);
  const double d = static_cast<double>(fit.dim());
  double h = 0.0;
  for (Index k = 0; k < fit.components(); ++k) {
    const double w = fit.weights[k];
    if (w <= 0.0) continue;
    Eigen::LLT<Matrix> llt(fit.covariances[static_cast<std::size_t>(k)]);
    const Matrix& L = llt.matrixL();
    const double log_det = 2.0 * L.diagonal().array().log().sum();
    h += -w * std::log(w) + w * 0.5 * (d * (kLog2Pi + 1.0) + log_det);
  }
  return h;
}

double gmm_log_density(const GmmFit& fit, const Vector& a) {
  if (a.size() != fit.dim())
    throw std::invalid_argument("gmm_log_density: action dimension mismatch");
  const Matrix joint = joint_log_densities(fit, a);
  return log_sum_exp(joint.col(0));
}

}  // namespace dsacd::entropy
