#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dsacd/diffusion/loss.hpp"
#include "dsacd/diffusion/sampler.hpp"
#include "dsacd/diffusion/schedule.hpp"
#include "fixtures.hpp"
#include "support.hpp"

using namespace dsacd;
using namespace dsacd::diffusion;
using dsacd::testing::FunctionPredictor;
using dsacd::testing::LinearPredictor;

namespace {

std::unique_ptr<NoisePredictor> zero_predictor(Index dim = 1, Index cond = 0) {
  return std::make_unique<FunctionPredictor>(dim, cond,
                                             [dim](const Vector&, const Vector&, int) { return Vector::Zero(dim); });
}

std::unique_ptr<NoisePredictor> constant_predictor(double c) {
  return std::make_unique<FunctionPredictor>(1, 0, [c](const Vector&, const Vector&, int) { return Vector::Constant(1, c); });
}

}  // namespace

TEST_CASE("schedule from explicit betas") {
  const NoiseSchedule s = schedule_from_betas({0.5, 0.5});
  CHECK(s.steps == 2);
  CHECK(s.alpha(1) == 0.5);
  CHECK(s.alpha(2) == 0.5);
  CHECK(s.alpha_bar(1) == 0.5);
  CHECK(s.alpha_bar(2) == 0.25);
}

TEST_CASE("single step linear schedule") {
  const NoiseSchedule s = make_schedule(1, 0.1, 0.1);
  REQUIRE(s.betas.size() == 1);
  CHECK(s.beta(1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.alpha_bar(1) == doctest::Approx(0.9).epsilon(1e-15));
}

TEST_CASE("linear schedule product against a separate loop") {
  const NoiseSchedule s = make_schedule(20, 1e-4, 0.02);
  long double prod = 1.0L;
  for (int i = 0; i < 20; ++i) {
    const long double beta = 1e-4L + (0.02L - 1e-4L) * i / 19.0L;
    prod *= 1.0L - beta;
  }
  CHECK(s.alpha_bar(20) == doctest::Approx(static_cast<double>(prod)).epsilon(1e-12));
  CHECK(s.beta(1) == doctest::Approx(1e-4));
  CHECK(s.beta(20) == doctest::Approx(0.02));
}

TEST_CASE("schedule invariants hold for both shapes") {
  for (auto shape : {ScheduleShape::linear, ScheduleShape::cosine}) {
    for (int T : {1, 2, 7, 50}) {
      const NoiseSchedule s = make_schedule(T, 1e-4, 0.5, shape);
      CHECK(s.alpha_bar(1) == s.alpha(1));
      for (int t = 1; t <= T; ++t) {
        CHECK(s.beta(t) > 0.0);
        CHECK(s.beta(t) < 1.0);
        CHECK(s.alpha(t) == 1.0 - s.beta(t));
        if (t >= 2) {
          CHECK(s.alpha_bar(t) == s.alpha_bar(t - 1) * s.alpha(t));
          CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
          CHECK(s.alpha_bar(t) / s.alpha_bar(t - 1) == doctest::Approx(s.alpha(t)).epsilon(1e-15));
        }
      }
    }
  }
}

TEST_CASE("schedule rejects bad arguments") {
  CHECK_THROWS_AS(make_schedule(0, 1e-4, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(10, 0.0, 0.02), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(10, 0.1, 0.05), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(10, 1e-4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(schedule_from_betas({0.2, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(schedule_from_betas({}), std::invalid_argument);
  const NoiseSchedule s = make_schedule(3, 1e-3, 0.1);
  CHECK_THROWS_AS(s.check_step(0), std::out_of_range);
  CHECK_THROWS_AS(s.check_step(4), std::out_of_range);
  CHECK_THROWS_AS(parse_schedule_shape("quadratic"), std::invalid_argument);
}

TEST_CASE("forward corruption closed form") {
  const NoiseSchedule s = schedule_from_betas({0.75});  // abar = 0.25
  Matrix x0(2, 3);
  x0 << 1, -2, 3, 0.5, 4, -1;
  CHECK(forward_corrupt(x0, 1, s, Matrix::Zero(2, 3)).isApprox(0.5 * x0));
  Matrix n = Matrix::Random(2, 3);
  CHECK(forward_corrupt(Matrix::Zero(2, 3), 1, s, n).isApprox(std::sqrt(0.75) * n));
  CHECK_THROWS(forward_corrupt(x0, 2, s, n));
  CHECK_THROWS(forward_corrupt(x0, 1, s, Matrix::Zero(1, 3)));
}

TEST_CASE("forward corruption is affine in data and noise") {
  const NoiseSchedule s = make_schedule(10, 1e-3, 0.3);
  Rng rng(3);
  const Matrix x1 = rng.normal_matrix(2, 5), x2 = rng.normal_matrix(2, 5);
  const Matrix n1 = rng.normal_matrix(2, 5), n2 = rng.normal_matrix(2, 5);
  const double a = 0.3, b = -1.7;
  for (int t : {1, 5, 10}) {
    const Matrix lhs = forward_corrupt(a * x1 + b * x2, t, s, a * n1 + b * n2);
    const Matrix rhs = a * forward_corrupt(x1, t, s, n1) + b * forward_corrupt(x2, t, s, n2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("forward corruption moments match the marginal") {
  const NoiseSchedule s = make_schedule(20, 1e-3, 0.4);
  const int t = 7;
  const double x0 = 1.3;
  const Index n = 100000;
  Rng rng(11);
  const Matrix out = forward_corrupt(Matrix::Constant(1, n, x0), t, s, rng.normal_matrix(1, n));
  const double mean = out.mean();
  const double var = (out.array() - mean).square().sum() / (n - 1);
  const double expect_mean = std::sqrt(s.alpha_bar(t)) * x0;
  const double expect_var = 1.0 - s.alpha_bar(t);
  CHECK(std::abs(mean - expect_mean) < 3.0 * std::sqrt(expect_var / n));
  CHECK(std::abs(var - expect_var) < 3.0 * expect_var * std::sqrt(2.0 / (n - 1)));
}

TEST_CASE("reverse step with zero and constant predictors") {
  const NoiseSchedule s = schedule_from_betas({0.75});  // alpha = 0.25
  Matrix z(1, 3);
  z << 1.0, -2.0, 0.5;
  const Matrix none(0, 1);
  CHECK(reverse_step(z, 1, *zero_predictor(), none, s, Matrix::Zero(1, 3)).isApprox(2.0 * z));

  const NoiseSchedule s2 = schedule_from_betas({0.1, 0.2, 0.3});
  const double c = 0.7;
  for (int t = 1; t <= 3; ++t) {
    const Matrix out = reverse_step(Matrix::Zero(1, 2), t, *constant_predictor(c), none, s2, Matrix::Zero(1, 2));
    const double expect = -(s2.beta(t) / (std::sqrt(s2.alpha(t)) * std::sqrt(1.0 - s2.alpha_bar(t)))) * c;
    CHECK(out(0, 0) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(out(0, 1) == doctest::Approx(expect).epsilon(1e-14));
  }
  const Matrix eps = Matrix::Constant(1, 3, 2.0);
  const Matrix noisy = reverse_step(z, 1, *zero_predictor(), none, s, eps);
  CHECK(noisy.isApprox(2.0 * z + std::sqrt(0.75) * eps));
  CHECK_THROWS(reverse_step(Matrix::Zero(2, 3), 1, *zero_predictor(), none, s, Matrix::Zero(2, 3)));
}

TEST_CASE("one step chain divides the start by sqrt(alpha_1)") {
  const NoiseSchedule s = make_schedule(1, 0.36, 0.36);
  SampleRequest req;
  req.n_samples = 5;
  req.conditioning = Matrix(0, 1);
  req.stochastic = false;
  req.rng_seed = 4;
  const Matrix out = reverse_sample(req, *zero_predictor(), s);
  for (Index j = 0; j < 5; ++j) {
    Rng rng(derive_seed(4, static_cast<std::uint64_t>(j)));
    CHECK(out(0, j) == doctest::Approx(rng.normal() / 0.8).epsilon(1e-14));
  }
}

TEST_CASE("reverse sampling is a pure function of seed and parameters") {
  const NoiseSchedule s = make_schedule(8, 1e-3, 0.2);
  Rng init(1);
  LinearPredictor p(2, init.normal_vector(4));
  SampleRequest req;
  req.n_samples = 16;
  req.conditioning = Matrix::Constant(2, 1, 0.3);
  for (bool stochastic : {false, true}) {
    req.stochastic = stochastic;
    req.rng_seed = 99;
    const Matrix a = reverse_sample(req, p, s);
    const Matrix b = reverse_sample(req, p, s);
    CHECK(a == b);
    req.rng_seed = 100;
    CHECK(reverse_sample(req, p, s) != a);
  }
  req.n_samples = 0;
  CHECK_THROWS(reverse_sample(req, p, s));
}

TEST_CASE("exact Gaussian predictor drives the chain to the target") {
  const double mu = 1.0, sigma = 0.5;
  const NoiseSchedule s = make_schedule(200, 1e-4, 0.05);
  auto oracle = dsacd::testing::gaussian_oracle(s, mu, sigma);
  SampleRequest req;
  req.n_samples = 100000;
  req.conditioning = Matrix(0, 1);
  req.rng_seed = 21;
  const Matrix out = reverse_sample(req, *oracle, s);
  const double mean = out.mean();
  const double var = (out.array() - mean).square().sum() / (out.size() - 1);
  CHECK(std::abs(mean - mu) < 4.0 * sigma / std::sqrt(1e5) + 0.01);
  CHECK(std::abs(var - sigma * sigma) < 0.02 * sigma * sigma + 4.0 * sigma * sigma * std::sqrt(2.0 / 1e5));

  Rng rng(5);
  std::vector<double> reference(100000);
  for (double& x : reference) x = mu + sigma * rng.normal();
  CHECK(dsacd::testing::wasserstein1(dsacd::testing::to_std(out.row(0).transpose()), reference) <= 0.05);
}

TEST_CASE("denoising loss is zero for a predictor that recovers the noise") {
  const NoiseSchedule s = make_schedule(10, 1e-3, 0.3);
  const double x0 = 0.8;
  FunctionPredictor oracle(1, 0, [s, x0](const Vector& z, const Vector&, int t) {
    return Vector((z.array() - std::sqrt(s.alpha_bar(t)) * x0) / std::sqrt(1.0 - s.alpha_bar(t)));
  });
  Rng rng(2);
  const auto r = simple_denoising_loss(Matrix::Constant(1, 64, x0), Matrix(0, 64), oracle, s, rng, false);
  CHECK(r.loss < 1e-24);
}

TEST_CASE("zero predictor loss estimates the sample dimension") {
  const NoiseSchedule s = make_schedule(10, 1e-3, 0.3);
  const Index d = 2, n = 100000;
  Rng rng(8);
  const auto r = simple_denoising_loss(rng.normal_matrix(d, n), Matrix(0, n), *zero_predictor(d), s, rng, false);
  CHECK(std::abs(r.loss - d) < 4.0 * std::sqrt(2.0 * d / n));
}

TEST_CASE("denoising loss ignores batch order") {
  const NoiseSchedule s = make_schedule(10, 1e-3, 0.3);
  Rng rng(6);
  LinearPredictor p(1, rng.normal_vector(3));
  const Index n = 32;
  const Matrix x0 = rng.normal_matrix(1, n), cond = rng.normal_matrix(1, n), noise = rng.normal_matrix(1, n);
  std::vector<int> steps(n);
  for (int& t : steps) t = rng.uniform_int(1, 10);
  std::vector<Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  Matrix x0p(1, n), cp(1, n), np(1, n);
  std::vector<int> sp(n);
  for (Index j = 0; j < n; ++j) {
    x0p.col(j) = x0.col(perm[j]);
    cp.col(j) = cond.col(perm[j]);
    np.col(j) = noise.col(perm[j]);
    sp[j] = steps[perm[j]];
  }
  const auto a = denoising_loss(x0, cond, p, s, steps, noise);
  const auto b = denoising_loss(x0p, cp, p, s, sp, np);
  CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-13));
  CHECK((a.grad - b.grad).norm() < 1e-12);
}

TEST_CASE("denoising loss gradient on a two-parameter predictor") {
  const NoiseSchedule s = make_schedule(10, 1e-3, 0.3);
  Rng rng(12);
  const Index n = 16;
  const Matrix x0 = rng.normal_matrix(1, n), noise = rng.normal_matrix(1, n);
  std::vector<int> steps(n);
  for (int& t : steps) t = rng.uniform_int(1, 10);
  Vector w(2);
  w << 0.4, -0.3;
  LinearPredictor p(0, w);
  const auto r = denoising_loss(x0, Matrix(0, n), p, s, steps, noise);
  const Vector fd = dsacd::testing::numeric_gradient(
      [&](const Vector& q) {
        LinearPredictor probe(0, q);
        return denoising_loss(x0, Matrix(0, n), probe, s, steps, noise, false).loss;
      },
      w);
  CHECK(dsacd::testing::relative_error(r.grad, fd) <= 1e-4);
}

TEST_CASE("denoising loss rejects an empty batch") {
  const NoiseSchedule s = make_schedule(3, 1e-3, 0.1);
  Rng rng(1);
  CHECK_THROWS_AS(simple_denoising_loss(Matrix(1, 0), Matrix(0, 0), *zero_predictor(), s, rng),
                  std::invalid_argument);
}

TEST_CASE("posterior mean") {
  const NoiseSchedule s = make_schedule(12, 1e-3, 0.3);
  Matrix x0(1, 2), zt(1, 2);
  x0 << 0.7, -1.1;
  zt << 2.0, 0.4;
  CHECK(posterior_mean(zt, x0, 1, s).isApprox(x0, 1e-12));
  CHECK(posterior_mean(Matrix::Zero(1, 2), Matrix::Zero(1, 2), 5, s).isZero());
  for (int t = 2; t <= 12; ++t) {
    // Product of the prior q(z_{t-1} | x0) and the likelihood q(z_t | z_{t-1}).
    const double prior_var = 1.0 - s.alpha_bar(t - 1);
    const double like_prec = s.alpha(t) / s.beta(t);
    const double prec = 1.0 / prior_var + like_prec;
    const Matrix expect = ((std::sqrt(s.alpha_bar(t - 1)) / prior_var) * x0 +
                           (std::sqrt(s.alpha(t)) / s.beta(t)) * zt) / prec;
    CHECK(posterior_mean(zt, x0, t, s).isApprox(expect, 1e-10));
  }
  CHECK_THROWS(posterior_mean(zt, x0, 13, s));
}

TEST_CASE("chain backprop matches finite differences") {
  const NoiseSchedule s = make_schedule(6, 1e-2, 0.3);
  Rng rng(31);
  const Vector w = rng.normal_vector(3) * 0.5;
  LinearPredictor p(1, w);
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
  const ChainNoise noise = draw_chain_noise(seeds, 1, s, true);
  const Matrix cond = rng.normal_matrix(1, 4);
  const Matrix weights = rng.normal_matrix(1, 4);
  ChainTrace trace;
  run_chain(noise, cond, p, s, &trace);
  Vector grad = Vector::Zero(3);
  const ChainGradients g = backprop_chain(trace, p, s, weights, &grad);
  auto objective = [&](const Vector& q) {
    LinearPredictor probe(1, q);
    return (weights.array() * run_chain(noise, cond, probe, s).array()).sum();
  };
  CHECK(dsacd::testing::relative_error(grad, dsacd::testing::numeric_gradient(objective, w)) <= 1e-6);

  // Gradient with respect to the conditioning as well.
  const Vector flat_cond = Eigen::Map<const Vector>(cond.data(), cond.size());
  const Vector fd_cond = dsacd::testing::numeric_gradient(
      [&](const Vector& c) {
        const Matrix cm = Eigen::Map<const Matrix>(c.data(), 1, 4);
        return (weights.array() * run_chain(noise, cm, p, s).array()).sum();
      },
      flat_cond);
  const Vector analytic_cond = Eigen::Map<const Vector>(g.conditioning.data(), g.conditioning.size());
  CHECK(dsacd::testing::relative_error(analytic_cond, fd_cond) <= 1e-6);
}
