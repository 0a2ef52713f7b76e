#include "dif/smoother.hpp"

#include <sstream>
#include <stdexcept>

namespace dif {

namespace {

void check_dims(const AffineApproximation& aff, int in, const char* where) {
  if (aff.A.cols() != in) {
    std::ostringstream oss;
    oss << where << ": affine slope has " << aff.A.cols()
        << " columns but the state has dimension " << in;
    throw std::invalid_argument(oss.str());
  }
  if (aff.b.size() != aff.A.rows() || aff.Omega.rows() != aff.A.rows() ||
      aff.Omega.cols() != aff.A.rows()) {
    std::ostringstream oss;
    oss << where << ": inconsistent affine approximation dimensions";
    throw std::invalid_argument(oss.str());
  }
}

// Condition estimate for the error message when an innovation-style
// covariance fails to factor.
double condition_estimate(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  if (es.info() != Eigen::Success) {
    return std::numeric_limits<double>::infinity();
  }
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double lmin = es.eigenvalues().cwiseAbs().minCoeff();
  if (lmin == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return lmax / lmin;
}

}  // namespace

GaussianDensity time_update(const GaussianDensity& prior,
                            const AffineApproximation& f_aff, const Matrix& Q) {
  check_dims(f_aff, prior.dim(), "time_update");
  if (Q.rows() != f_aff.A.rows() || Q.cols() != f_aff.A.rows()) {
    throw std::invalid_argument("time_update: Q dimension mismatch");
  }
  Vector mean = f_aff.A * prior.mean + f_aff.b;
  Matrix cov = symmetrized(f_aff.A * prior.cov * f_aff.A.transpose() + Q +
                           f_aff.Omega);
  return GaussianDensity(std::move(mean), std::move(cov));
}

std::pair<GaussianDensity, SmootherGains> measurement_update(
    const GaussianDensity& pred, const Vector& y,
    const AffineApproximation& h_aff, const Matrix& R) {
  check_dims(h_aff, pred.dim(), "measurement_update");
  if (y.size() != h_aff.A.rows()) {
    throw std::invalid_argument("measurement_update: measurement dimension "
                                "does not match the affine approximation");
  }
  const Matrix s = symmetrized(h_aff.A * pred.cov * h_aff.A.transpose() + R +
                               h_aff.Omega);
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) {
    std::ostringstream oss;
    oss << "measurement_update: innovation covariance S is singular "
        << "(condition estimate " << condition_estimate(s) << ")";
    throw std::runtime_error(oss.str());
  }
  // K = P Aᵀ S⁻¹ without forming S⁻¹: solve S Kᵀ = A P.
  const Matrix k = llt.solve(h_aff.A * pred.cov).transpose();

  const Vector innovation = y - h_aff.A * pred.mean - h_aff.b;
  Vector mean = pred.mean + k * innovation;
  Matrix cov = repair_psd(pred.cov - k * h_aff.A * pred.cov);

  SmootherGains gains;
  gains.K = k;
  gains.G = Matrix();
  return {GaussianDensity(std::move(mean), std::move(cov)), gains};
}

GaussianDensity smoothing_step(const GaussianDensity& prior,
                               const GaussianDensity& pred,
                               const GaussianDensity& post_next,
                               const AffineApproximation& f_aff,
                               const Matrix& Q) {
  check_dims(f_aff, prior.dim(), "smoothing_step");
  const Matrix pred_cov =
      symmetrized(f_aff.A * prior.cov * f_aff.A.transpose() + Q + f_aff.Omega);
  Eigen::LLT<Matrix> llt(pred_cov);
  if (llt.info() != Eigen::Success) {
    std::ostringstream oss;
    oss << "smoothing_step: predictive covariance is singular "
        << "(condition estimate " << condition_estimate(pred_cov) << ")";
    throw std::runtime_error(oss.str());
  }
  // G = P Aᵀ (A P Aᵀ + Q + Ω)⁻¹
  const Matrix g = llt.solve(f_aff.A * prior.cov).transpose();

  Vector mean = prior.mean + g * (post_next.mean - pred.mean);
  Matrix cov = repair_psd(prior.cov +
                          g * (post_next.cov - pred_cov) * g.transpose());
  return GaussianDensity(std::move(mean), std::move(cov));
}

}  // namespace dif
