#pragma once

#include "dif/gaussian.hpp"
#include "dif/linearization.hpp"

namespace dif {

/// Gains from the affine update steps, kept for diagnostics.
struct SmootherGains {
  Matrix K;  // n×m Kalman gain
  Matrix G;  // n×n smoothing gain
};

/// x̂⁺ = A·x̂ + b, P⁺ = A·P·Aᵀ + Q + Ω.
GaussianDensity time_update(const GaussianDensity& prior,
                            const AffineApproximation& f_aff, const Matrix& Q);

/// K = P·Aᵀ·S⁻¹ with S = A·P·Aᵀ + R + Ω, solved by Cholesky;
/// x̂⁺ = x̂ + K(y − A·x̂ − b), P⁺ = P − K·A·P (symmetrized, PSD-repaired).
std::pair<GaussianDensity, SmootherGains> measurement_update(
    const GaussianDensity& pred, const Vector& y,
    const AffineApproximation& h_aff, const Matrix& R);

/// One-lag smoothing: G = P·Aᵀ·(A·P·Aᵀ + Q + Ω)⁻¹,
/// x̂_s = x̂ + G(x̂_next_post − x̂_next_pred),
/// P_s = P + G(P_next_post − A·P·Aᵀ − Q − Ω)Gᵀ.
/// `pred` must be time_update(prior, f_aff, Q); that consistency is the
/// caller's responsibility.
GaussianDensity smoothing_step(const GaussianDensity& prior,
                               const GaussianDensity& pred,
                               const GaussianDensity& post_next,
                               const AffineApproximation& f_aff,
                               const Matrix& Q);

}  // namespace dif
