#pragma once

#include "dif/filter.hpp"

namespace dif {

/// Joint iterate over the states at k−1 and k.
struct JointIterate {
  Vector x_prev;
  Vector x_curr;

  Vector stacked() const;
  static JointIterate from_stacked(const Vector& s, int n);
};

/// Weights of the lag-one loss: prior covariance, R+Ω_h, Q+Ω_f. All PD.
struct LossWeights {
  Matrix P_prior;
  Matrix R_eff;
  Matrix Q_eff;
};

struct LineSearchConfig {
  double shrink = 0.5;
  double alpha_min = 1e-4;
  double armijo_c = 1e-4;
  int max_backtracks = 20;
  bool use_armijo = true;  // false: accept on plain decrease
  int outer_max = 5;       // outer-loop cap for the doubly iterated variant
};

/// L(s) = ½[‖x_prev − x̂_prior‖²_P + ‖y − h(x_curr)‖²_{R_eff}
///          + ‖x_curr − f(x_prev)‖²_{Q_eff}].
double evaluate_loss(const JointIterate& it, const Vector& y,
                     const GaussianDensity& prior_prev,
                     const StateSpaceModel& model, const LossWeights& w);

/// Whitened residual stack r(s) with ‖r‖²/2 = evaluate_loss. Blocks in order:
/// prior, measurement, transition, each multiplied by the inverse Cholesky
/// factor of its weight.
Vector gn_residual(const JointIterate& it, const Vector& y,
                   const GaussianDensity& prior_prev,
                   const StateSpaceModel& model, const LossWeights& w);

/// Jacobian of gn_residual w.r.t. the stacked iterate, assembled from the
/// model Jacobians and the weight Cholesky factors.
Matrix gn_jacobian(const JointIterate& it, const StateSpaceModel& model,
                   const LossWeights& w);

/// ∇L = Jᵀr.
Vector gn_gradient(const JointIterate& it, const Vector& y,
                   const GaussianDensity& prior_prev,
                   const StateSpaceModel& model, const LossWeights& w);

/// Gauss-Newton step −(JᵀJ)⁻¹Jᵀr in the joint state space. Equals one
/// analytically linearized smoother pass minus the iterate.
Vector gn_step(const JointIterate& it, const Vector& y,
               const GaussianDensity& prior_prev, const StateSpaceModel& model,
               const LossWeights& w);

/// Backtracking from α = 1. Returns the accepted (α, iterate); α = 0 with the
/// iterate unchanged when no acceptable step exists (a normal outcome).
std::pair<double, JointIterate> line_search(const JointIterate& it,
                                            const Vector& p, const Vector& y,
                                            const GaussianDensity& prior_prev,
                                            const StateSpaceModel& model,
                                            const LossWeights& w,
                                            const LineSearchConfig& cfg);

/// One smoother pass linearized at the iterate (analytically, or
/// statistically about the given covariances), returning the proposed means
/// and the pass densities. The building block of the damped loop.
struct SmootherProposal {
  JointIterate proposal;
  GaussianDensity predictive;
  GaussianDensity posterior;
  GaussianDensity smoothed;
  AffineApproximation f_aff;
  AffineApproximation h_aff;
};
SmootherProposal propose_by_smoothing(const JointIterate& it, const Vector& y,
                                      const GaussianDensity& prior_prev,
                                      const StateSpaceModel& model,
                                      bool statistical, const Matrix& f_cov,
                                      const Matrix& h_cov,
                                      const UnscentedConfig& ut);

/**
 * Damped filter step for variants DIEKF, DIUKF, DIPLF. The inner loop
 * line-searches the mean iterate along (smoother proposal − iterate) with
 * covariance inputs frozen; the doubly iterated DIPLF wraps it in an outer
 * loop that refreshes the covariances and reruns.
 */
std::pair<LagOneBelief, StepTrace> damped_dif_step(
    const GaussianDensity& prior_prev, const Vector& y,
    const StateSpaceModel& model, const IterationConfig& cfg,
    const LineSearchConfig& ls);

FilterRun run_damped_filter(const GaussianDensity& prior0,
                            const std::vector<Vector>& ys,
                            const StateSpaceModel& model,
                            const IterationConfig& cfg,
                            const LineSearchConfig& ls);

}  // namespace dif
