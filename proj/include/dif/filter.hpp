#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dif/gaussian.hpp"
#include "dif/linearization.hpp"
#include "dif/models.hpp"
#include "dif/smoother.hpp"

namespace dif {

/**
 * Filter variants.
 *
 * EKF/UKF run a single pass. IEKF/IUKF/IPLF re-linearize the measurement map
 * only, keeping the transition linearization at its first-pass value.
 * DIEKF/DIUKF/DIPLF re-linearize both maps each pass — the transition about
 * the one-lag smoothed density, the measurement about the posterior — until
 * the posterior reaches a KL fixed point.
 */
enum class Variant { EKF, UKF, IEKF, IUKF, IPLF, DIEKF, DIUKF, DIPLF };

std::string variant_name(Variant v);
Variant parse_variant(const std::string& name);

/// True for variants that iterate at all (everything except EKF/UKF).
bool is_iterated(Variant v);
/// True for variants that re-linearize the transition map (DIEKF/DIUKF/DIPLF).
bool is_dynamic(Variant v);
/// True for variants using statistical (sigma-point) linearization.
bool uses_statistical(Variant v);

struct IterationConfig {
  int max_iters = 10;
  double gamma = 1e-6;
  Variant variant = Variant::DIEKF;
  UnscentedConfig ut;
};

/// The four densities manipulated within one filter step at time k:
/// prior at k−1, predictive, posterior, and the one-lag smoothed density.
struct LagOneBelief {
  GaussianDensity prior_prev;     // q(x_{k−1} | y_{1:k−1})
  GaussianDensity predictive;     // q(x_k | y_{1:k−1})
  GaussianDensity posterior;      // q(x_k | y_{1:k})
  GaussianDensity smoothed_prev;  // q(x_{k−1} | y_{1:k})
};

/// Per-pass record: the belief plus the affine approximations and the
/// densities they were computed about.
struct IterationRecord {
  LagOneBelief belief;
  AffineApproximation f_aff;
  AffineApproximation h_aff;
  GaussianDensity f_lin_density;  // density the transition was linearized about
  GaussianDensity h_lin_density;  // density the measurement was linearized about
};

struct StepTrace {
  std::vector<IterationRecord> iterates;  // index 0 = non-iterated pass
  std::optional<int> converged_at;
  bool diverged = false;
};

/// Densities the next pass linearizes about, as a function of the variant
/// and the previous pass. `prior_cov` and `prev_pred_cov` feed the frozen
/// covariance rules of the sigma-point variants.
struct LinearizationInputs {
  GaussianDensity f_about;
  GaussianDensity h_about;
  bool f_frozen;  // transition approximation reused from pass 0
};
LinearizationInputs select_linearizer(Variant v, const LagOneBelief& prev,
                                      const Matrix& prior_cov,
                                      const Matrix& prev_pred_cov);

/**
 * One filter step: pass 0 is the classical EKF/UKF recursion; iterated
 * variants then re-linearize per select_linearizer and rerun the three
 * smoother steps until KL(posteriorⁱ ‖ posteriorⁱ⁺¹) < gamma or max_iters.
 * On numerical blow-up the last finite iterate is returned with the trace
 * flagged diverged.
 */
std::pair<LagOneBelief, StepTrace> dif_step(const GaussianDensity& prior_prev,
                                            const Vector& y,
                                            const StateSpaceModel& model,
                                            const IterationConfig& cfg);

/// A full filtering pass. Beliefs stop at the step where divergence was
/// detected (if any); diverged_at carries that time index (0-based).
struct FilterRun {
  std::vector<LagOneBelief> beliefs;
  std::optional<int> diverged_at;
};

FilterRun run_filter(const GaussianDensity& prior0,
                     const std::vector<Vector>& ys,
                     const StateSpaceModel& model, const IterationConfig& cfg);

}  // namespace dif
