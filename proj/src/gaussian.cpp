#include "dif/gaussian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dif {

namespace testing {
bool skip_symmetrize = false;
}  // namespace testing

Matrix symmetrized(const Matrix& m) {
  if (testing::skip_symmetrize) {
    return m;
  }
  return 0.5 * (m + m.transpose());
}

Matrix repair_psd(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("repair_psd: matrix must be square");
  }
  Matrix sym = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) {
    return sym;
  }
  const Vector& ev = es.eigenvalues();
  if (ev.minCoeff() >= 0.0) {
    return sym;
  }
  Vector clamped = ev.cwiseMax(0.0);
  Matrix repaired =
      es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (repaired + repaired.transpose());
}

Matrix psd_sqrt(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("psd_sqrt: matrix must be square");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(m));
  Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix s = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (s + s.transpose());
}

GaussianDensity::GaussianDensity(Vector mean_in, Matrix cov_in)
    : mean(std::move(mean_in)), cov(symmetrized(cov_in)) {
  if (mean.size() < 1) {
    throw std::invalid_argument("GaussianDensity: dimension must be at least 1");
  }
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw std::invalid_argument(
        "GaussianDensity: covariance is " + std::to_string(cov.rows()) + "x" +
        std::to_string(cov.cols()) + " but mean has dimension " +
        std::to_string(mean.size()));
  }
}

bool GaussianDensity::finite() const {
  return mean.allFinite() && cov.allFinite();
}

bool is_valid_covariance(const Matrix& cov, double tol) {
  if (cov.rows() != cov.cols() || !cov.allFinite()) {
    return false;
  }
  if (cov != cov.transpose()) {
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  if (es.info() != Eigen::Success) {
    return false;
  }
  const double lmin = es.eigenvalues().minCoeff();
  const double lmax = es.eigenvalues().maxCoeff();
  return lmin >= -tol * std::max(lmax, 0.0) - std::numeric_limits<double>::min();
}

namespace {

// log det of an SPD matrix from its Cholesky factor; -inf if the
// factorization failed (singular or indefinite).
double spd_log_det(const Matrix& m, bool& ok) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    ok = false;
    return -std::numeric_limits<double>::infinity();
  }
  ok = true;
  return 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
}

}  // namespace

double kl_divergence(const GaussianDensity& p, const GaussianDensity& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument(
        "kl_divergence: dimension mismatch (p has dimension " +
        std::to_string(p.dim()) + ", q has dimension " + std::to_string(q.dim()) +
        ")");
  }
  Eigen::LLT<Matrix> llt_q(q.cov);
  if (llt_q.info() != Eigen::Success) {
    throw std::runtime_error(
        "kl_divergence: covariance of q is singular (not positive definite)");
  }
  const int n = p.dim();
  const double trace_term = llt_q.solve(p.cov).trace();
  const Vector diff = q.mean - p.mean;
  const double maha = diff.dot(llt_q.solve(diff));
  const double log_det_q =
      2.0 * Matrix(llt_q.matrixL()).diagonal().array().log().sum();
  bool ok = true;
  const double log_det_p = spd_log_det(p.cov, ok);
  if (!ok) {
    return std::numeric_limits<double>::infinity();
  }
  return 0.5 * (trace_term + maha - n + log_det_q - log_det_p);
}

double weighted_norm_sq(const Vector& v, const Matrix& s) {
  if (s.rows() != s.cols() || s.rows() != v.size()) {
    throw std::invalid_argument("weighted_norm_sq: dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(
        "weighted_norm_sq: weight matrix is singular (not positive definite)");
  }
  return Matrix(llt.matrixL())
      .triangularView<Eigen::Lower>()
      .solve(v)
      .squaredNorm();
}

}  // namespace dif
