#include "dif/linearization.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dif {

SigmaPoints sigma_points(const GaussianDensity& density,
                         const UnscentedConfig& cfg) {
  const int n = density.dim();
  const double kappa = cfg.kappa_for(n);
  if (n + kappa <= 0.0) {
    throw std::invalid_argument("sigma_points: n + kappa must be positive");
  }
  const double scale = std::sqrt(n + kappa);

  Matrix root;
  Eigen::LLT<Matrix> llt(density.cov);
  if (llt.info() == Eigen::Success) {
    root = llt.matrixL();
  } else {
    root = psd_sqrt(density.cov);
  }

  SigmaPoints sp;
  sp.points.resize(n, 2 * n + 1);
  sp.weights.resize(2 * n + 1);
  sp.points.col(0) = density.mean;
  sp.weights[0] = kappa / (n + kappa);
  const double wi = 1.0 / (2.0 * (n + kappa));
  for (int i = 0; i < n; ++i) {
    sp.points.col(1 + i) = density.mean + scale * root.col(i);
    sp.points.col(1 + n + i) = density.mean - scale * root.col(i);
    sp.weights[1 + i] = wi;
    sp.weights[1 + n + i] = wi;
  }
  return sp;
}

AffineApproximation linearize_analytical(const DifferentiableMap& g,
                                         const Vector& x_bar) {
  AffineApproximation aff;
  aff.A = g.jacobian(x_bar);
  if (!aff.A.allFinite()) {
    throw std::runtime_error(
        "linearize_analytical: Jacobian has non-finite entries");
  }
  aff.b = g(x_bar) - aff.A * x_bar;
  aff.Omega = Matrix::Zero(g.out_dim, g.out_dim);
  return aff;
}

SlMoments sl_moments_unscented(const DifferentiableMap& g,
                               const GaussianDensity& density,
                               const UnscentedConfig& cfg) {
  const SigmaPoints sp = sigma_points(density, cfg);
  const int n = density.dim();
  const int m = g.out_dim;
  const int count = static_cast<int>(sp.weights.size());

  Matrix transformed(m, count);
  for (int i = 0; i < count; ++i) {
    transformed.col(i) = g(sp.points.col(i));
    if (!transformed.col(i).allFinite()) {
      throw std::runtime_error(
          "sl_moments_unscented: map produced non-finite values at sigma point " +
          std::to_string(i));
    }
  }

  SlMoments out;
  out.z_bar = transformed * sp.weights;
  out.Psi = Matrix::Zero(n, m);
  out.Phi = Matrix::Zero(m, m);
  for (int i = 0; i < count; ++i) {
    const Vector dx = sp.points.col(i) - density.mean;
    const Vector dz = transformed.col(i) - out.z_bar;
    out.Psi += sp.weights[i] * dx * dz.transpose();
    out.Phi += sp.weights[i] * dz * dz.transpose();
  }
  out.Phi = symmetrized(out.Phi);
  return out;
}

AffineApproximation linearize_statistical(const DifferentiableMap& g,
                                          const GaussianDensity& density,
                                          const UnscentedConfig& cfg) {
  const int n = density.dim();
  Matrix p = density.cov;
  Eigen::LLT<Matrix> llt(p);
  if (llt.info() != Eigen::Success) {
    // nudge borderline-singular covariances onto the PD cone once
    p += (1e-12 * p.trace() / n) * Matrix::Identity(n, n);
    llt.compute(p);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error(
          "linearize_statistical: density covariance is singular even after "
          "regularization");
    }
  }
  const SlMoments mom = sl_moments_unscented(g, GaussianDensity(density.mean, p), cfg);

  AffineApproximation aff;
  aff.A = llt.solve(mom.Psi).transpose();  // ΨᵀP⁻¹
  aff.b = mom.z_bar - aff.A * density.mean;
  aff.Omega = repair_psd(mom.Phi - aff.A * p * aff.A.transpose());
  return aff;
}

}  // namespace dif
