#pragma once

#include <cstdint>
#include <optional>

#include "dif/bench.hpp"
#include "dif/grid_oracle.hpp"

namespace dif::experiments {

// ---------------------------------------------------------------------------
// Cubic-model illustration: one filter step against a dense-grid posterior.

struct IllustrationSpec {
  double prior_mean = 3.0;
  double prior_var = 4.0;
  double y = 2.0;
  double grid_lo = -10.0;
  double grid_hi = 10.0;
  int grid_points = 4001;
  int max_iters = 10;
  double gamma = 1e-6;
};

struct IllustrationResult {
  GridDensity grid;
  StepTrace trace;
  std::vector<double> kl_grid_to_posterior;  // per recorded iteration
};

IllustrationResult run_illustration(const IllustrationSpec& spec);

// ---------------------------------------------------------------------------
// Trig-model damping demo: loss landscape plus the iterate paths of the
// measurement-only iterated filter, the dynamically iterated filter, and its
// line-searched version.

struct Example1dSpec {
  double true_x0 = -3.2;
  double prior_mean = -2.9;
  double prior_var = 1.0;
  int iters = 10;
  double grid_lo = -6.0;
  double grid_hi = 2.0;
  int grid_points = 401;
  std::uint64_t seed = 5;  // realization where the undamped loop diverges
  std::optional<double> y_override;  // default: simulate one step from seed
};

struct AlgPath {
  std::string name;
  std::vector<double> x0;    // smoothed-state iterate per iteration
  std::vector<double> x1;    // posterior-state iterate per iteration
  std::vector<double> loss;  // lag-one loss at each iterate
};

struct Example1dResult {
  double y = 0.0;
  LossLandscape landscape;
  AlgPath iekf;
  AlgPath diekf;
  AlgPath lsdiekf;
};

Example1dResult run_example1d(const Example1dSpec& spec);

/// Divergence witness used for the undamped path: the iterates left the grid
/// bounding box, or the loss exceeded 10× its initial value.
bool path_diverged(const AlgPath& path, double lo, double hi);

// ---------------------------------------------------------------------------
// Sweep scenario builders.

struct TrackingScenario {
  double T = 0.25;
  double q2 = 1e-2;
  int steps = 100;
  Vector x0;          // defaults to [0, 10, 0, 10, 0.1]
  Vector prior_mean;  // defaults to x0 with unknown (zero) turn rate
  Vector prior_diag;  // defaults to [1, 1, 1, 1, 0.04]

  TrackingScenario();
};

/// Matched simulation and filter models; the swept axes are q1 and σ².
/// A run counts as diverged when its position RMSE exceeds σ.
ProblemFactory tracking_problem_factory(const TrackingScenario& sc);

struct TdoaScenario {
  double T = 0.5;
  int steps = 80;
  TdoaConfig geometry;  // receivers at the corners of a 4 m × 4 m area
  Vector x0;            // defaults to [1.2, 1.0, 1.2, 0, 0.6]
  Vector prior_mean;    // defaults to x0 with unknown turn rate
  Vector prior_diag;
  double sim_q1 = 1e-4;        // true process noise of the simulated cart
  double omega_mag = 0.6;      // alternating turn rate magnitude
  int omega_switch_every = 20; // steps between turn reversals
  double divergence_threshold = 1.0;  // meters

  TdoaScenario();
};

/// Fixed simulated trajectory family (figure-eight cart); the swept axes are
/// the *filter* noise parameters q1 and q2.
ProblemFactory tdoa_problem_factory(const TdoaScenario& sc);

}  // namespace dif::experiments
