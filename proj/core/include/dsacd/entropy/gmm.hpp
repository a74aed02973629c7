#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dsacd/types.hpp"

namespace dsacd::entropy {

enum class CovarianceType { diagonal, full };

CovarianceType parse_covariance_type(const std::string& name);

/// Fitted Gaussian mixture. Means are stored one component per column.
struct GmmFit {
  Vector weights;                   // K, on the simplex
  Matrix means;                     // d x K
  std::vector<Matrix> covariances;  // K matrices, d x d
  double log_likelihood = 0.0;      // total over the fitted data
  std::vector<double> log_likelihood_trace;
  int iterations = 0;
  int reseeds = 0;

  Index components() const { return weights.size(); }
  Index dim() const { return means.rows(); }
};

struct EmOptions {
  int components = 2;
  int max_iters = 50;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  double covariance_floor = 1e-6;
  double weight_floor = 1e-4;
  CovarianceType covariance = CovarianceType::diagonal;
};

/// Expectation-maximization over the columns of `samples` (d x N). Columns
/// are sorted lexicographically before seeding, so the result does not depend
/// on their order. Initial means come from k-means++ seeding with
/// `options.seed`.
GmmFit em_fit(const Matrix& samples, const EmOptions& options);

/// Responsibilities gamma(z_ik) of every sample under `fit` (K x N).
Matrix responsibilities(const GmmFit& fit, const Matrix& samples);

/// -sum w_k log w_k + sum w_k * 0.5 * log((2 pi e)^d |Sigma_k|).
/// Throws std::invalid_argument if any covariance is not positive definite.
double gmm_entropy(const GmmFit& fit);

/// log sum_k w_k N(a | mu_k, Sigma_k), evaluated with log-sum-exp.
double gmm_log_density(const GmmFit& fit, const Vector& a);

double gaussian_log_pdf(const Vector& x, const Vector& mean, const Matrix& covariance);

/// Checks the simplex and positive-definiteness invariants.
void validate(const GmmFit& fit);

}  // namespace dsacd::entropy
