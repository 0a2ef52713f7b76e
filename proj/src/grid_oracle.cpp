#include "dif/grid_oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dif {

namespace {

double gauss_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) /
         std::sqrt(2.0 * std::numbers::pi * var);
}

}  // namespace

double trapezoid(const Vector& x, const Vector& f) {
  if (x.size() != f.size() || x.size() < 2) {
    throw std::invalid_argument("trapezoid: need matching grids of length >= 2");
  }
  double sum = 0.0;
  for (int i = 0; i + 1 < x.size(); ++i) {
    sum += 0.5 * (x[i + 1] - x[i]) * (f[i] + f[i + 1]);
  }
  return sum;
}

GridDensity grid_posterior_1d(const StateSpaceModel& model,
                              const GaussianDensity& prior, double y,
                              double lo, double hi, int points) {
  if (model.state_dim() != 1 || model.meas_dim() != 1) {
    throw std::invalid_argument("grid_posterior_1d: model must be 1D");
  }
  if (points < 2 || hi <= lo) {
    throw std::invalid_argument("grid_posterior_1d: bad grid");
  }
  const double q = model.Q(0, 0);
  const double r = model.R(0, 0);
  const double prior_mean = prior.mean[0];
  const double prior_sd = std::sqrt(prior.cov(0, 0));

  // Support of the prior for the Chapman-Kolmogorov quadrature.
  const int inner_points = points;
  const double in_lo = prior_mean - 8.0 * prior_sd;
  const double in_hi = prior_mean + 8.0 * prior_sd;
  Vector xp(inner_points), prior_pdf(inner_points), fx(inner_points);
  Vector arg(1);
  for (int i = 0; i < inner_points; ++i) {
    xp[i] = in_lo + (in_hi - in_lo) * i / (inner_points - 1);
    prior_pdf[i] = gauss_pdf(xp[i], prior_mean, prior_sd * prior_sd);
    arg[0] = xp[i];
    fx[i] = model.transition(arg)[0];
  }

  GridDensity out;
  out.x.resize(points);
  out.density.resize(points);
  Vector integrand(inner_points);
  for (int j = 0; j < points; ++j) {
    const double xk = lo + (hi - lo) * j / (points - 1);
    out.x[j] = xk;
    for (int i = 0; i < inner_points; ++i) {
      integrand[i] = gauss_pdf(xk, fx[i], q) * prior_pdf[i];
    }
    const double predictive = trapezoid(xp, integrand);
    arg[0] = xk;
    out.density[j] = gauss_pdf(y, model.measurement(arg)[0], r) * predictive;
  }
  const double z = trapezoid(out.x, out.density);
  if (!(z > 0.0) || !std::isfinite(z)) {
    throw std::runtime_error("grid_posterior_1d: posterior mass vanished on the grid");
  }
  out.density /= z;
  return out;
}

double grid_kl_to_gaussian(const GridDensity& grid, double mean, double var) {
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * var);
  Vector integrand(grid.x.size());
  for (int i = 0; i < grid.x.size(); ++i) {
    const double p = grid.density[i];
    if (p <= 0.0) {
      integrand[i] = 0.0;
    } else {
      // log q analytically; the pdf itself underflows in far tails
      const double d = grid.x[i] - mean;
      const double log_q = log_norm - 0.5 * d * d / var;
      integrand[i] = p * (std::log(p) - log_q);
    }
  }
  return trapezoid(grid.x, integrand);
}

LossLandscape loss_landscape_1d(const StateSpaceModel& model,
                                const GaussianDensity& prior, const Vector& y,
                                const LossWeights& w, double lo, double hi,
                                int points) {
  if (model.state_dim() != 1) {
    throw std::invalid_argument("loss_landscape_1d: model must be 1D");
  }
  LossLandscape out;
  out.x0.resize(points);
  out.x1.resize(points);
  for (int i = 0; i < points; ++i) {
    const double v = lo + (hi - lo) * i / (points - 1);
    out.x0[i] = v;
    out.x1[i] = v;
  }
  out.loss.resize(points, points);
  out.min_loss = std::numeric_limits<double>::infinity();
  out.min_x0 = lo;
  out.min_x1 = lo;
  JointIterate it;
  it.x_prev.resize(1);
  it.x_curr.resize(1);
  for (int i = 0; i < points; ++i) {
    it.x_prev[0] = out.x0[i];
    for (int j = 0; j < points; ++j) {
      it.x_curr[0] = out.x1[j];
      const double l = evaluate_loss(it, y, prior, model, w);
      out.loss(i, j) = l;
      if (l < out.min_loss) {
        out.min_loss = l;
        out.min_x0 = out.x0[i];
        out.min_x1 = out.x1[j];
      }
    }
  }
  return out;
}

}  // namespace dif
