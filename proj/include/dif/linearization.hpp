#pragma once

#include <optional>

#include "dif/gaussian.hpp"
#include "dif/models.hpp"

namespace dif {

/**
 * Affine stand-in g(x) ≈ A·x + b + η with η ~ N(0, Omega). Omega captures
 * the fit error; the analytical route sets it to the exact zero matrix.
 */
struct AffineApproximation {
  Matrix A;
  Vector b;
  Matrix Omega;
};

/// Moments of a map pushed through a Gaussian: z̄ = E[g(x)],
/// Ψ = E[(x−x̂)(g(x)−z̄)ᵀ], Φ = E[(g(x)−z̄)(g(x)−z̄)ᵀ].
struct SlMoments {
  Vector z_bar;
  Matrix Psi;  // n×m cross-covariance
  Matrix Phi;  // m×m transformed covariance
};

/// Unscented-transform parameters. κ defaults to 3−n (fourth-moment matching
/// for a scalar Gaussian); weights are w₀ = κ/(n+κ), wᵢ = 1/(2(n+κ)).
struct UnscentedConfig {
  std::optional<double> kappa_override;

  double kappa_for(int n) const {
    return kappa_override ? *kappa_override : 3.0 - static_cast<double>(n);
  }
};

/// 2n+1 sigma points of N(x̂, P) in columns, with their common weights.
/// Square root of P via Cholesky, falling back to the symmetric
/// eigendecomposition root when P is only semidefinite.
struct SigmaPoints {
  Matrix points;   // n×(2n+1)
  Vector weights;  // 2n+1, sums to 1
};
SigmaPoints sigma_points(const GaussianDensity& density,
                         const UnscentedConfig& cfg);

/// First-order Taylor expansion at x̄: A = J_g(x̄), b = g(x̄) − A·x̄, Ω = 0.
AffineApproximation linearize_analytical(const DifferentiableMap& g,
                                         const Vector& x_bar);

/// Unscented estimate of the push-forward moments of g under the density.
SlMoments sl_moments_unscented(const DifferentiableMap& g,
                               const GaussianDensity& density,
                               const UnscentedConfig& cfg = {});

/// Statistical linearization w.r.t. the density: A = ΨᵀP⁻¹, b = z̄ − A·x̂,
/// Ω = repair_psd(Φ − A·P·Aᵀ). Exact (Ω = 0) for affine g.
AffineApproximation linearize_statistical(const DifferentiableMap& g,
                                          const GaussianDensity& density,
                                          const UnscentedConfig& cfg = {});

}  // namespace dif
