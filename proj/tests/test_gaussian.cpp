#include <doctest.h>

#include <cmath>
#include <random>

#include "dif/gaussian.hpp"

using namespace dif;

namespace {

GaussianDensity scalar(double mean, double var) {
  return GaussianDensity(Vector::Constant(1, mean), Matrix::Constant(1, 1, var));
}

Matrix random_spd_with_condition(std::mt19937_64& rng, int n, double cond) {
  std::normal_distribution<double> gauss;
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      m(i, j) = gauss(rng);
    }
  }
  const Eigen::HouseholderQR<Matrix> qr(m);
  const Matrix q = qr.householderQ();
  Vector eigs(n);
  for (int i = 0; i < n; ++i) {
    // log-spaced spectrum from 1 down to 1/cond
    eigs[i] = std::pow(cond, -static_cast<double>(i) / std::max(1, n - 1));
  }
  return Matrix(q * eigs.asDiagonal() * q.transpose());
}

}  // namespace

TEST_CASE("kl divergence closed-form scalar cases") {
  CHECK(kl_divergence(scalar(0, 1), scalar(0, 1)) == doctest::Approx(0.0).epsilon(1e-12));
  // ½[tr(1) + 1 − 1 + ln 1] = ½
  CHECK(kl_divergence(scalar(1, 1), scalar(0, 1)) == doctest::Approx(0.5).epsilon(1e-12));
  // ½[2 − 1 + ln(1/2)]
  const double expected = 0.5 * (2.0 - 1.0 + std::log(0.5));
  CHECK(kl_divergence(scalar(0, 2), scalar(0, 1)) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.15342641).epsilon(1e-7));
}

TEST_CASE("kl divergence errors") {
  GaussianDensity p2(Vector::Zero(2), Matrix::Identity(2, 2));
  CHECK_THROWS_AS(kl_divergence(p2, scalar(0, 1)), std::invalid_argument);
  CHECK_THROWS_WITH_AS(kl_divergence(scalar(0, 1), scalar(0, 0)),
                       doctest::Contains("covariance of q"), std::runtime_error);
}

TEST_CASE("kl divergence nonnegativity and self-distance on random pairs") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + trial % 4;
    Matrix a(n, n), b(n, n);
    Vector mp(n), mq(n);
    for (int i = 0; i < n; ++i) {
      mp[i] = gauss(rng);
      mq[i] = gauss(rng);
      for (int j = 0; j < n; ++j) {
        a(i, j) = gauss(rng);
        b(i, j) = gauss(rng);
      }
    }
    GaussianDensity p(mp, Matrix(a * a.transpose() + 0.3 * Matrix::Identity(n, n)));
    GaussianDensity q(mq, Matrix(b * b.transpose() + 0.3 * Matrix::Identity(n, n)));
    CHECK(kl_divergence(p, q) >= -1e-12);
    CHECK(std::abs(kl_divergence(p, p)) <= 1e-12);
  }
}

TEST_CASE("weighted norm squared") {
  CHECK(weighted_norm_sq(Vector::Zero(2), Matrix::Identity(2, 2)) == 0.0);
  CHECK(weighted_norm_sq(Vector::Constant(1, 2.0), Matrix::Constant(1, 1, 4.0)) ==
        doctest::Approx(1.0).epsilon(1e-14));
  Vector v(2);
  v << 1, 1;
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 1;
  s(1, 1) = 4;
  // 1/1 + 1/4
  CHECK(weighted_norm_sq(v, s) == doctest::Approx(1.25).epsilon(1e-14));
  CHECK_THROWS_AS(weighted_norm_sq(v, Matrix::Zero(2, 2)), std::runtime_error);
}

TEST_CASE("weighted norm matches explicit inverse on conditioned matrices") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  for (double cond : {1e2, 1e4, 1e6}) {
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 2 + trial % 4;
      const Matrix s = random_spd_with_condition(rng, n, cond);
      Vector v(n);
      for (int i = 0; i < n; ++i) {
        v[i] = gauss(rng);
      }
      const double via_chol = weighted_norm_sq(v, s);
      const double via_inverse = v.dot(s.inverse() * v);
      CHECK(std::abs(via_chol - via_inverse) <=
            1e-10 * std::max(1.0, std::abs(via_inverse)));
    }
  }
}

TEST_CASE("repair_psd") {
  const Matrix eye = Matrix::Identity(3, 3);
  CHECK(repair_psd(eye) == eye);

  Matrix tiny_neg = Matrix::Zero(2, 2);
  tiny_neg(0, 0) = 1.0;
  tiny_neg(1, 1) = -1e-14;
  const Matrix repaired = repair_psd(tiny_neg);
  CHECK(repaired(0, 0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(repaired(1, 1) >= 0.0);
  CHECK(repaired(1, 1) <= 1e-13);

  // eigenvalues ±1; clamping the negative one leaves ½·[1 1; 1 1]
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  const Matrix clamped = repair_psd(swap);
  Matrix expected(2, 2);
  expected << 0.5, 0.5, 0.5, 0.5;
  CHECK((clamped - expected).cwiseAbs().maxCoeff() <= 1e-12);

  // idempotent and always a valid covariance
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 5;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        m(i, j) = gauss(rng);
      }
    }
    const Matrix once = repair_psd(m);
    CHECK(is_valid_covariance(once));
    const Matrix twice = repair_psd(once);
    CHECK((twice - once).cwiseAbs().maxCoeff() <=
          1e-13 * std::max(1.0, once.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("gaussian density construction") {
  Matrix skew(2, 2);
  skew << 1.0, 0.5, 0.1, 1.0;
  GaussianDensity d(Vector::Zero(2), skew);
  CHECK(d.cov == d.cov.transpose());
  CHECK(d.cov(0, 1) == doctest::Approx(0.3));
  CHECK_THROWS_AS(GaussianDensity(Vector(), Matrix()), std::invalid_argument);
  CHECK_THROWS_AS(GaussianDensity(Vector::Zero(2), Matrix::Identity(3, 3)),
                  std::invalid_argument);
}
