#pragma once

#include <Eigen/Dense>

namespace dif {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace testing {
// Verification hook: when set, symmetrized() becomes the identity so the
// symmetry suites can demonstrate they catch covariance drift. Never set
// outside of verification runs.
extern bool skip_symmetrize;
}  // namespace testing

/// Exact symmetrization ½(M + Mᵀ).
Matrix symmetrized(const Matrix& m);

/// Symmetrizes M and clamps negative eigenvalues to zero. Total for finite
/// square input; PSD matrices pass through beyond symmetrization. Idempotent.
Matrix repair_psd(const Matrix& m);

/// Symmetric S ⪰ 0 with S·S = repair_psd(M). Tolerates semidefinite input,
/// unlike a Cholesky factor.
Matrix psd_sqrt(const Matrix& m);

/**
 * Multivariate Gaussian N(mean, cov).
 *
 * The covariance is symmetrized on construction. Positive semi-definiteness
 * is the producer's contract; is_valid_covariance() is the checkable form.
 * Immutable value type: copy freely, share across threads.
 */
struct GaussianDensity {
  Vector mean;
  Matrix cov;

  GaussianDensity() = default;
  GaussianDensity(Vector mean_in, Matrix cov_in);

  int dim() const { return static_cast<int>(mean.size()); }
  bool finite() const;
};

/// Exact symmetry plus λmin ≥ −tol·max(λmax, 0).
bool is_valid_covariance(const Matrix& cov, double tol = 1e-10);

/// KL(p‖q) = ½[tr(Σq⁻¹Σp) + (μq−μp)ᵀΣq⁻¹(μq−μp) − n + ln(det Σq/det Σp)].
/// q.cov must be strictly positive definite; a singular p.cov yields +inf.
double kl_divergence(const GaussianDensity& p, const GaussianDensity& q);

/// vᵀS⁻¹v for symmetric positive definite S. Cholesky solve, no inverse.
double weighted_norm_sq(const Vector& v, const Matrix& s);

}  // namespace dif
