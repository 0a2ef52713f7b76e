#include <doctest.h>

#include <random>

#include "dif/reference_kf.hpp"
#include "dif/smoother.hpp"

using namespace dif;

namespace {

AffineApproximation scalar_aff(double a, double b, double omega = 0.0) {
  AffineApproximation aff;
  aff.A = Matrix::Constant(1, 1, a);
  aff.b = Vector::Constant(1, b);
  aff.Omega = Matrix::Constant(1, 1, omega);
  return aff;
}

GaussianDensity scalar(double mean, double var) {
  return GaussianDensity(Vector::Constant(1, mean), Matrix::Constant(1, 1, var));
}

}  // namespace

TEST_CASE("time update") {
  // random walk
  const GaussianDensity pred =
      time_update(scalar(0, 1), scalar_aff(1, 0), Matrix::Constant(1, 1, 1.0));
  CHECK(pred.mean[0] == 0.0);
  CHECK(pred.cov(0, 0) == 2.0);

  // definition check on a random multivariate instance
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  Matrix a(3, 3), root(3, 3), qroot(3, 3);
  Vector b(3), m(3);
  for (int i = 0; i < 9; ++i) {
    a(i / 3, i % 3) = gauss(rng);
    root(i / 3, i % 3) = gauss(rng);
    qroot(i / 3, i % 3) = gauss(rng);
  }
  for (int i = 0; i < 3; ++i) {
    b[i] = gauss(rng);
    m[i] = gauss(rng);
  }
  const Matrix p = root * root.transpose() + Matrix::Identity(3, 3);
  const Matrix q = qroot * qroot.transpose() + Matrix::Identity(3, 3);
  AffineApproximation aff;
  aff.A = a;
  aff.b = b;
  aff.Omega = 0.1 * Matrix::Identity(3, 3);
  const GaussianDensity out = time_update(GaussianDensity(m, p), aff, q);
  CHECK((out.mean - (a * m + b)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((out.cov - (a * p * a.transpose() + q + aff.Omega)).cwiseAbs().maxCoeff() <=
        1e-12);

  // one-step prediction of the cubic illustration: slope 0.27 from the
  // analytical linearization at the prior mean 3
  const GaussianDensity ill = time_update(scalar(3, 4), scalar_aff(0.27, -0.54),
                                          Matrix::Constant(1, 1, 0.1));
  CHECK(ill.mean[0] == doctest::Approx(0.27).epsilon(1e-14));
  CHECK(ill.cov(0, 0) == doctest::Approx(0.27 * 0.27 * 4 + 0.1).epsilon(1e-14));

  CHECK_THROWS_AS(
      time_update(scalar(0, 1), scalar_aff(1, 0), Matrix::Identity(2, 2)),
      std::invalid_argument);
}

TEST_CASE("measurement update") {
  // scalar Kalman arithmetic: K = 2/(2+1), posterior N(2/3, 2/3)
  const auto [post, gains] =
      measurement_update(scalar(0, 2), Vector::Constant(1, 1.0),
                         scalar_aff(1, 0), Matrix::Constant(1, 1, 1.0));
  CHECK(gains.K(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(post.mean[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(post.cov(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  // zero innovation moves nothing
  const GaussianDensity pred = scalar(1.5, 2.0);
  const auto [post2, g2] =
      measurement_update(pred, Vector::Constant(1, 1.5 * 0.8 + 0.3),
                         scalar_aff(0.8, 0.3), Matrix::Constant(1, 1, 0.5));
  CHECK(post2.mean[0] == doctest::Approx(1.5).epsilon(1e-14));

  // uninformative measurement: K = 0, posterior = predictive
  const auto [post3, g3] =
      measurement_update(pred, Vector::Constant(1, 9.0), scalar_aff(0, 9.0),
                         Matrix::Constant(1, 1, 0.5));
  CHECK(g3.K(0, 0) == 0.0);
  CHECK(post3.mean[0] == pred.mean[0]);
  CHECK(post3.cov(0, 0) == doctest::Approx(pred.cov(0, 0)).epsilon(1e-14));

  // singular innovation covariance names a condition estimate
  CHECK_THROWS_WITH_AS(
      measurement_update(scalar(0, 1), Vector::Zero(1), scalar_aff(0, 0),
                         Matrix::Zero(1, 1)),
      doctest::Contains("condition"), std::runtime_error);
}

TEST_CASE("smoothing step") {
  const GaussianDensity prior = scalar(0, 1);
  const AffineApproximation f = scalar_aff(1, 0);
  const Matrix q = Matrix::Constant(1, 1, 1.0);
  const GaussianDensity pred = time_update(prior, f, q);

  // no information gained: smoothed = prior
  const GaussianDensity same = smoothing_step(prior, pred, pred, f, q);
  CHECK(same.mean[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(same.cov(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  // continues the measurement-update example: G = 1/2
  const GaussianDensity post_next = scalar(2.0 / 3.0, 2.0 / 3.0);
  const GaussianDensity smoothed = smoothing_step(prior, pred, post_next, f, q);
  CHECK(smoothed.mean[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(smoothed.cov(0, 0) ==
        doctest::Approx(1.0 + 0.25 * (2.0 / 3.0 - 2.0)).epsilon(1e-14));
  CHECK(smoothed.cov(0, 0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));

  // no dynamical coupling: G = 0, smoothed = prior
  const AffineApproximation constant = scalar_aff(0, 1.0, 0.2);
  const GaussianDensity pred_c = time_update(prior, constant, q);
  const GaussianDensity sm_c =
      smoothing_step(prior, pred_c, scalar(5, 0.1), constant, q);
  CHECK(sm_c.mean[0] == prior.mean[0]);
  CHECK(sm_c.cov(0, 0) == doctest::Approx(prior.cov(0, 0)).epsilon(1e-14));
}

TEST_CASE("chained updates match the reference filter on an affine model") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> gauss;
  const int n = 2, m = 1;
  Matrix f(n, n), h(m, n), root(n, n);
  for (int i = 0; i < n * n; ++i) {
    f(i / n, i % n) = 0.4 * gauss(rng);
    root(i / n, i % n) = gauss(rng);
  }
  for (int i = 0; i < m * n; ++i) {
    h(i / n, i % n) = gauss(rng);
  }
  Vector bf(n), bh(m);
  bf << 0.1, -0.2;
  bh << 0.05;
  const Matrix q = root * root.transpose() + Matrix::Identity(n, n);
  const Matrix r = Matrix::Constant(m, m, 0.8);
  AffineApproximation f_aff{f, bf, Matrix::Zero(n, n)};
  AffineApproximation h_aff{h, bh, Matrix::Zero(m, m)};

  std::vector<Vector> ys;
  for (int k = 0; k < 10; ++k) {
    ys.push_back(Vector::Constant(m, gauss(rng)));
  }
  const GaussianDensity prior(Vector::Zero(n), Matrix::Identity(n, n));

  const reference::Trajectory ref = reference::run(
      {f, bf, q, h, bh, r}, prior.mean, prior.cov, ys);

  GaussianDensity cur = prior;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    const GaussianDensity pred = time_update(cur, f_aff, q);
    const auto [post, gains] = measurement_update(pred, ys[k], h_aff, r);
    const GaussianDensity sm = smoothing_step(cur, pred, post, f_aff, q);
    CHECK((post.mean - ref.post_mean[k]).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((post.cov - ref.post_cov[k]).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((sm.mean - ref.smoothed_mean[k]).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((sm.cov - ref.smoothed_cov[k]).cwiseAbs().maxCoeff() <= 1e-10);
    cur = post;
  }
}

TEST_CASE("posterior covariance never exceeds predictive in the Loewner order") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    const int m = 1 + trial % 2;
    Matrix root(n, n), h(m, n);
    Vector mean(n);
    for (int i = 0; i < n; ++i) {
      mean[i] = gauss(rng);
      for (int j = 0; j < n; ++j) {
        root(i, j) = gauss(rng);
      }
    }
    for (int i = 0; i < m * n; ++i) {
      h(i / n, i % n) = gauss(rng);
    }
    const GaussianDensity pred(mean,
                               Matrix(root * root.transpose() +
                                      0.3 * Matrix::Identity(n, n)));
    AffineApproximation h_aff{h, Vector::Zero(m), 0.05 * Matrix::Identity(m, m)};
    const auto [post, gains] = measurement_update(
        pred, Vector::Constant(m, gauss(rng)), h_aff,
        Matrix(0.5 * Matrix::Identity(m, m)));
    const Matrix gap = pred.cov - post.cov;
    Eigen::SelfAdjointEigenSolver<Matrix> es(gap);
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
    CHECK(is_valid_covariance(post.cov));
  }
}

TEST_CASE("smoothing shrinks the trace when the future carries information") {
  const GaussianDensity prior = scalar(0, 1);
  const AffineApproximation f = scalar_aff(1, 0);
  const Matrix q = Matrix::Constant(1, 1, 1.0);
  const GaussianDensity pred = time_update(prior, f, q);
  // trace(post_next) < trace(pred) here, so the smoothed trace must shrink
  const GaussianDensity post_next = scalar(0.5, 0.4);
  const GaussianDensity sm = smoothing_step(prior, pred, post_next, f, q);
  CHECK(post_next.cov.trace() <= pred.cov.trace());
  CHECK(sm.cov.trace() <= prior.cov.trace());
}
