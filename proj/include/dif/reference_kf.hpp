#pragma once

#include <vector>

#include "dif/gaussian.hpp"

// Textbook affine Kalman filter and one-lag smoother, written directly from
// the standard equations with explicit inverses. Deliberately independent of
// the smoother module: it is the oracle the verification and acceptance
// suites compare against.

namespace dif::reference {

struct AffineModel {
  Matrix F;   // transition slope
  Vector bf;  // transition offset
  Matrix Qe;  // effective process noise (Q + Ω_f)
  Matrix H;   // measurement slope
  Vector bh;  // measurement offset
  Matrix Re;  // effective measurement noise (R + Ω_h)
};

struct Trajectory {
  std::vector<Vector> post_mean;
  std::vector<Matrix> post_cov;
  std::vector<Vector> smoothed_mean;  // lag-one: x_{k-1|k}
  std::vector<Matrix> smoothed_cov;
};

inline Trajectory run(const AffineModel& m, const Vector& prior_mean,
                      const Matrix& prior_cov, const std::vector<Vector>& ys) {
  Trajectory out;
  Vector x = prior_mean;
  Matrix p = prior_cov;
  for (const Vector& y : ys) {
    const Vector x_pred = m.F * x + m.bf;
    const Matrix p_pred = m.F * p * m.F.transpose() + m.Qe;

    const Matrix s = m.H * p_pred * m.H.transpose() + m.Re;
    const Matrix k = p_pred * m.H.transpose() * s.inverse();
    const Vector x_post = x_pred + k * (y - m.H * x_pred - m.bh);
    const Matrix p_post = p_pred - k * m.H * p_pred;

    const Matrix g = p * m.F.transpose() * p_pred.inverse();
    const Vector x_sm = x + g * (x_post - x_pred);
    const Matrix p_sm = p + g * (p_post - p_pred) * g.transpose();

    out.post_mean.push_back(x_post);
    out.post_cov.push_back(p_post);
    out.smoothed_mean.push_back(x_sm);
    out.smoothed_cov.push_back(p_sm);
    x = x_post;
    p = p_post;
  }
  return out;
}

}  // namespace dif::reference
