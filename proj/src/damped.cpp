#include "dif/damped.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dif {

Vector JointIterate::stacked() const {
  Vector s(x_prev.size() + x_curr.size());
  s << x_prev, x_curr;
  return s;
}

JointIterate JointIterate::from_stacked(const Vector& s, int n) {
  JointIterate it;
  it.x_prev = s.head(n);
  it.x_curr = s.tail(s.size() - n);
  return it;
}

namespace {

Matrix chol_lower(const Matrix& m, const char* name) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(std::string("loss weight ") + name +
                             " is singular (not positive definite)");
  }
  return llt.matrixL();
}

Vector whiten(const Matrix& lower, const Vector& v) {
  return lower.triangularView<Eigen::Lower>().solve(v);
}

Matrix whiten(const Matrix& lower, const Matrix& m) {
  return lower.triangularView<Eigen::Lower>().solve(m);
}

}  // namespace

double evaluate_loss(const JointIterate& it, const Vector& y,
                     const GaussianDensity& prior_prev,
                     const StateSpaceModel& model, const LossWeights& w) {
  const double prior_term =
      weighted_norm_sq(it.x_prev - prior_prev.mean, w.P_prior);
  const double meas_term =
      weighted_norm_sq(y - model.measurement(it.x_curr), w.R_eff);
  const double trans_term =
      weighted_norm_sq(it.x_curr - model.transition(it.x_prev), w.Q_eff);
  return 0.5 * (prior_term + meas_term + trans_term);
}

Vector gn_residual(const JointIterate& it, const Vector& y,
                   const GaussianDensity& prior_prev,
                   const StateSpaceModel& model, const LossWeights& w) {
  const Matrix lp = chol_lower(w.P_prior, "P_prior");
  const Matrix lr = chol_lower(w.R_eff, "R_eff");
  const Matrix lq = chol_lower(w.Q_eff, "Q_eff");
  const int n = static_cast<int>(it.x_prev.size());
  const int m = static_cast<int>(y.size());
  Vector r(n + m + n);
  r.head(n) = whiten(lp, Vector(it.x_prev - prior_prev.mean));
  r.segment(n, m) = whiten(lr, Vector(y - model.measurement(it.x_curr)));
  r.tail(n) = whiten(lq, Vector(it.x_curr - model.transition(it.x_prev)));
  return r;
}

Matrix gn_jacobian(const JointIterate& it, const StateSpaceModel& model,
                   const LossWeights& w) {
  const Matrix lp = chol_lower(w.P_prior, "P_prior");
  const Matrix lr = chol_lower(w.R_eff, "R_eff");
  const Matrix lq = chol_lower(w.Q_eff, "Q_eff");
  const int n = static_cast<int>(it.x_prev.size());
  const int m = model.meas_dim();
  Matrix j = Matrix::Zero(n + m + n, 2 * n);
  j.topLeftCorner(n, n) = whiten(lp, Matrix(Matrix::Identity(n, n)));
  j.block(n, n, m, n) = -whiten(lr, model.measurement.jacobian(it.x_curr));
  j.block(n + m, 0, n, n) = -whiten(lq, model.transition.jacobian(it.x_prev));
  j.block(n + m, n, n, n) = whiten(lq, Matrix(Matrix::Identity(n, n)));
  return j;
}

Vector gn_gradient(const JointIterate& it, const Vector& y,
                   const GaussianDensity& prior_prev,
                   const StateSpaceModel& model, const LossWeights& w) {
  return gn_jacobian(it, model, w).transpose() *
         gn_residual(it, y, prior_prev, model, w);
}

Vector gn_step(const JointIterate& it, const Vector& y,
               const GaussianDensity& prior_prev, const StateSpaceModel& model,
               const LossWeights& w) {
  const Matrix j = gn_jacobian(it, model, w);
  const Vector r = gn_residual(it, y, prior_prev, model, w);
  const Matrix normal = j.transpose() * j;
  const Vector rhs = j.transpose() * r;
  Eigen::LDLT<Matrix> ldlt(normal);
  Vector p = -ldlt.solve(rhs);
  const double residual_norm = (normal * p + rhs).norm();
  if (!p.allFinite() || residual_norm > 1e-8 * std::max(rhs.norm(), 1.0)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(normal);
    std::ostringstream oss;
    oss << "gn_step: normal equations are rank deficient (condition estimate ";
    if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() > 0) {
      oss << es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    } else {
      oss << "inf";
    }
    oss << ")";
    throw std::runtime_error(oss.str());
  }
  return p;
}

std::pair<double, JointIterate> line_search(const JointIterate& it,
                                            const Vector& p, const Vector& y,
                                            const GaussianDensity& prior_prev,
                                            const StateSpaceModel& model,
                                            const LossWeights& w,
                                            const LineSearchConfig& cfg) {
  if (!p.allFinite()) {
    throw std::invalid_argument("line_search: direction has non-finite entries");
  }
  const int n = static_cast<int>(it.x_prev.size());
  const double l0 = evaluate_loss(it, y, prior_prev, model, w);
  const double slope =
      cfg.use_armijo ? gn_gradient(it, y, prior_prev, model, w).dot(p) : 0.0;
  const Vector s0 = it.stacked();

  double alpha = 1.0;
  for (int k = 0; k <= cfg.max_backtracks && alpha >= cfg.alpha_min; ++k) {
    const JointIterate cand = JointIterate::from_stacked(s0 + alpha * p, n);
    const double lc = evaluate_loss(cand, y, prior_prev, model, w);
    const double bound = cfg.use_armijo ? l0 + cfg.armijo_c * alpha * slope : l0;
    if (std::isfinite(lc) && lc <= bound) {
      return {alpha, cand};
    }
    alpha *= cfg.shrink;
  }
  return {0.0, it};
}

SmootherProposal propose_by_smoothing(const JointIterate& it, const Vector& y,
                                      const GaussianDensity& prior_prev,
                                      const StateSpaceModel& model,
                                      bool statistical, const Matrix& f_cov,
                                      const Matrix& h_cov,
                                      const UnscentedConfig& ut) {
  SmootherProposal out;
  out.f_aff = statistical
                  ? linearize_statistical(model.transition,
                                          GaussianDensity(it.x_prev, f_cov), ut)
                  : linearize_analytical(model.transition, it.x_prev);
  out.predictive = time_update(prior_prev, out.f_aff, model.Q);
  out.h_aff = statistical
                  ? linearize_statistical(model.measurement,
                                          GaussianDensity(it.x_curr, h_cov), ut)
                  : linearize_analytical(model.measurement, it.x_curr);
  out.posterior = measurement_update(out.predictive, y, out.h_aff, model.R).first;
  out.smoothed = smoothing_step(prior_prev, out.predictive, out.posterior,
                                out.f_aff, model.Q);
  out.proposal.x_prev = out.smoothed.mean;
  out.proposal.x_curr = out.posterior.mean;
  return out;
}

std::pair<LagOneBelief, StepTrace> damped_dif_step(
    const GaussianDensity& prior_prev, const Vector& y,
    const StateSpaceModel& model, const IterationConfig& cfg,
    const LineSearchConfig& ls) {
  if (!is_dynamic(cfg.variant)) {
    throw std::invalid_argument(
        "damped_dif_step: damping applies to DIEKF, DIUKF and DIPLF only");
  }
  const bool statistical = uses_statistical(cfg.variant);

  // Pass 0: the classical single-pass recursion, as in the undamped loop.
  IterationConfig base = cfg;
  base.variant = statistical ? Variant::UKF : Variant::EKF;
  auto [belief0, trace0] = dif_step(prior_prev, y, model, base);
  StepTrace trace = trace0;
  if (trace.diverged) {
    return {belief0, trace};
  }

  JointIterate s{belief0.smoothed_prev.mean, belief0.posterior.mean};
  LagOneBelief belief = belief0;

  // Frozen covariance inputs of the inner loop: the smoothed density keeps
  // the prior covariance, the posterior keeps the predictive covariance.
  Matrix f_cov = prior_prev.cov;
  Matrix h_cov = belief0.predictive.cov;

  const int outer_rounds = cfg.variant == Variant::DIPLF ? ls.outer_max : 1;
  GaussianDensity prev_outer_post = belief0.posterior;
  int inner_count = 0;

  for (int outer = 0; outer < outer_rounds; ++outer) {
    for (int i = 1; i <= cfg.max_iters; ++i) {
      SmootherProposal prop;
      try {
        prop = propose_by_smoothing(s, y, prior_prev, model, statistical, f_cov,
                                    h_cov, cfg.ut);
      } catch (const std::runtime_error&) {
        trace.diverged = true;
        return {belief, trace};
      }
      if (!prop.posterior.finite() || !prop.smoothed.finite()) {
        trace.diverged = true;
        return {belief, trace};
      }

      const Vector p = prop.proposal.stacked() - s.stacked();
      LossWeights w{prior_prev.cov, symmetrized(model.R + prop.h_aff.Omega),
                    symmetrized(model.Q + prop.f_aff.Omega)};
      const JointIterate linearized_at = s;
      auto [alpha, s_new] = line_search(s, p, y, prior_prev, model, w, ls);
      if (alpha == 0.0) {
        break;  // rejected step ends the inner loop at the current iterate
      }

      const double kl = kl_divergence(
          GaussianDensity(s.x_curr, prop.posterior.cov),
          GaussianDensity(s_new.x_curr, prop.posterior.cov));
      s = s_new;
      ++inner_count;

      belief.predictive = prop.predictive;
      belief.posterior = GaussianDensity(s.x_curr, prop.posterior.cov);
      belief.smoothed_prev = GaussianDensity(s.x_prev, prop.smoothed.cov);
      IterationRecord rec;
      rec.belief = belief;
      rec.f_aff = prop.f_aff;
      rec.h_aff = prop.h_aff;
      rec.f_lin_density = GaussianDensity(linearized_at.x_prev, f_cov);
      rec.h_lin_density = GaussianDensity(linearized_at.x_curr, h_cov);
      trace.iterates.push_back(rec);

      if (kl < cfg.gamma) {
        trace.converged_at = inner_count;
        break;
      }
    }

    // Covariance refresh at the accepted iterate.
    SmootherProposal refresh;
    try {
      refresh = propose_by_smoothing(s, y, prior_prev, model, statistical,
                                     f_cov, h_cov, cfg.ut);
    } catch (const std::runtime_error&) {
      trace.diverged = true;
      return {belief, trace};
    }
    belief.predictive = refresh.predictive;
    belief.posterior = GaussianDensity(s.x_curr, refresh.posterior.cov);
    belief.smoothed_prev = GaussianDensity(s.x_prev, refresh.smoothed.cov);
    if (!belief.posterior.finite() || !belief.smoothed_prev.finite()) {
      trace.diverged = true;
      return {belief, trace};
    }

    if (cfg.variant == Variant::DIPLF) {
      double outer_kl;
      try {
        outer_kl = kl_divergence(prev_outer_post, belief.posterior);
      } catch (const std::runtime_error&) {
        trace.diverged = true;
        return {belief, trace};
      }
      prev_outer_post = belief.posterior;
      f_cov = belief.smoothed_prev.cov;
      h_cov = belief.posterior.cov;
      if (outer_kl < cfg.gamma) {
        break;
      }
    }
  }
  return {belief, trace};
}

FilterRun run_damped_filter(const GaussianDensity& prior0,
                            const std::vector<Vector>& ys,
                            const StateSpaceModel& model,
                            const IterationConfig& cfg,
                            const LineSearchConfig& ls) {
  if (ys.empty()) {
    throw std::invalid_argument("run_damped_filter: measurement sequence is empty");
  }
  FilterRun run;
  run.beliefs.reserve(ys.size());
  GaussianDensity prior = prior0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    std::pair<LagOneBelief, StepTrace> step;
    try {
      step = damped_dif_step(prior, ys[k], model, cfg, ls);
    } catch (const std::runtime_error&) {
      run.diverged_at = static_cast<int>(k);
      return run;
    }
    run.beliefs.push_back(step.first);
    if (step.second.diverged || !step.first.posterior.finite()) {
      run.diverged_at = static_cast<int>(k);
      return run;
    }
    prior = step.first.posterior;
  }
  return run;
}

}  // namespace dif
