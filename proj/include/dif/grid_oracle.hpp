#pragma once

#include "dif/damped.hpp"
#include "dif/gaussian.hpp"
#include "dif/models.hpp"

namespace dif {

/// Densely evaluated 1D density, normalized to unit trapezoid integral.
struct GridDensity {
  Vector x;
  Vector density;
};

double trapezoid(const Vector& x, const Vector& f);

/// Exact (up to quadrature) one-step posterior of a 1D model: the prior is
/// pushed through the transition by numerical integration of the
/// Chapman-Kolmogorov equation, then multiplied by the likelihood of y and
/// normalized on [lo, hi].
GridDensity grid_posterior_1d(const StateSpaceModel& model,
                              const GaussianDensity& prior, double y,
                              double lo, double hi, int points);

/// KL(grid ‖ N(mean, var)) by trapezoid quadrature.
double grid_kl_to_gaussian(const GridDensity& grid, double mean, double var);

/// The lag-one loss evaluated over an (x_prev, x_curr) grid for a 1D model.
struct LossLandscape {
  Vector x0;        // x_prev axis
  Vector x1;        // x_curr axis
  Matrix loss;      // loss(i, j) at (x0[i], x1[j])
  double min_loss;
  double min_x0;
  double min_x1;
};

LossLandscape loss_landscape_1d(const StateSpaceModel& model,
                                const GaussianDensity& prior, const Vector& y,
                                const LossWeights& w, double lo, double hi,
                                int points);

}  // namespace dif
