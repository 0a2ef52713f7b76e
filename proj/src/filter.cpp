#include "dif/filter.hpp"

#include <cmath>
#include <stdexcept>

namespace dif {

namespace {
constexpr double kKlBlowup = 1e12;
}

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::EKF: return "EKF";
    case Variant::UKF: return "UKF";
    case Variant::IEKF: return "IEKF";
    case Variant::IUKF: return "IUKF";
    case Variant::IPLF: return "IPLF";
    case Variant::DIEKF: return "DIEKF";
    case Variant::DIUKF: return "DIUKF";
    case Variant::DIPLF: return "DIPLF";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::EKF, Variant::UKF, Variant::IEKF, Variant::IUKF,
                    Variant::IPLF, Variant::DIEKF, Variant::DIUKF,
                    Variant::DIPLF}) {
    if (variant_name(v) == name) {
      return v;
    }
  }
  throw std::invalid_argument("unknown filter variant: " + name);
}

bool is_iterated(Variant v) {
  return v != Variant::EKF && v != Variant::UKF;
}

bool is_dynamic(Variant v) {
  return v == Variant::DIEKF || v == Variant::DIUKF || v == Variant::DIPLF;
}

bool uses_statistical(Variant v) {
  switch (v) {
    case Variant::UKF:
    case Variant::IUKF:
    case Variant::IPLF:
    case Variant::DIUKF:
    case Variant::DIPLF:
      return true;
    default:
      return false;
  }
}

LinearizationInputs select_linearizer(Variant v, const LagOneBelief& prev,
                                      const Matrix& prior_cov,
                                      const Matrix& prev_pred_cov) {
  LinearizationInputs in;
  switch (v) {
    case Variant::EKF:
    case Variant::UKF:
      throw std::invalid_argument(
          "select_linearizer: single-pass variants do not iterate");
    case Variant::IEKF:
    case Variant::IPLF:
      in.f_frozen = true;
      in.f_about = prev.prior_prev;
      in.h_about = prev.posterior;
      break;
    case Variant::IUKF:
      // sigma points about the iterate mean with the predictive covariance
      in.f_frozen = true;
      in.f_about = prev.prior_prev;
      in.h_about = GaussianDensity(prev.posterior.mean, prev_pred_cov);
      break;
    case Variant::DIEKF:
      in.f_frozen = false;
      in.f_about = prev.smoothed_prev;
      in.h_about = prev.posterior;
      break;
    case Variant::DIPLF:
      in.f_frozen = false;
      in.f_about = prev.smoothed_prev;
      in.h_about = prev.posterior;
      break;
    case Variant::DIUKF:
      // frozen covariances: smoothed ≡ prior, posterior ≡ same-pass predictive
      in.f_frozen = false;
      in.f_about = GaussianDensity(prev.smoothed_prev.mean, prior_cov);
      in.h_about = GaussianDensity(prev.posterior.mean, prev_pred_cov);
      break;
  }
  return in;
}

namespace {

AffineApproximation linearize(const DifferentiableMap& map,
                              const GaussianDensity& about, bool statistical,
                              const UnscentedConfig& ut) {
  if (statistical) {
    return linearize_statistical(map, about, ut);
  }
  return linearize_analytical(map, about.mean);
}

LagOneBelief run_pass(const GaussianDensity& prior_prev, const Vector& y,
                      const StateSpaceModel& model,
                      const AffineApproximation& f_aff,
                      const AffineApproximation& h_aff) {
  LagOneBelief b;
  b.prior_prev = prior_prev;
  b.predictive = time_update(prior_prev, f_aff, model.Q);
  b.posterior = measurement_update(b.predictive, y, h_aff, model.R).first;
  b.smoothed_prev =
      smoothing_step(prior_prev, b.predictive, b.posterior, f_aff, model.Q);
  return b;
}

bool belief_finite(const LagOneBelief& b) {
  return b.predictive.finite() && b.posterior.finite() &&
         b.smoothed_prev.finite();
}

}  // namespace

std::pair<LagOneBelief, StepTrace> dif_step(const GaussianDensity& prior_prev,
                                            const Vector& y,
                                            const StateSpaceModel& model,
                                            const IterationConfig& cfg) {
  if (prior_prev.dim() != model.state_dim()) {
    throw std::invalid_argument("dif_step: prior dimension does not match model");
  }
  if (y.size() != model.meas_dim()) {
    throw std::invalid_argument("dif_step: measurement dimension mismatch");
  }
  const bool statistical = uses_statistical(cfg.variant);

  StepTrace trace;

  // Pass 0: the classical single-pass recursion. The transition is
  // linearized about the prior, the measurement about the predictive.
  IterationRecord rec;
  rec.f_lin_density = prior_prev;
  rec.f_aff = linearize(model.transition, prior_prev, statistical, cfg.ut);
  GaussianDensity pred0 = time_update(prior_prev, rec.f_aff, model.Q);
  rec.h_lin_density = pred0;
  rec.h_aff = linearize(model.measurement, pred0, statistical, cfg.ut);
  rec.belief.prior_prev = prior_prev;
  rec.belief.predictive = pred0;
  rec.belief.posterior =
      measurement_update(pred0, y, rec.h_aff, model.R).first;
  rec.belief.smoothed_prev = smoothing_step(prior_prev, pred0,
                                            rec.belief.posterior, rec.f_aff,
                                            model.Q);
  if (!belief_finite(rec.belief)) {
    trace.diverged = true;
    trace.iterates.push_back(rec);
    return {rec.belief, trace};
  }
  trace.iterates.push_back(rec);

  if (!is_iterated(cfg.variant)) {
    return {rec.belief, trace};
  }

  for (int i = 1; i <= cfg.max_iters; ++i) {
    const IterationRecord& prev = trace.iterates.back();
    const Matrix& prev_pred_cov = prev.belief.predictive.cov;
    LinearizationInputs lin = select_linearizer(cfg.variant, prev.belief,
                                                prior_prev.cov, prev_pred_cov);
    IterationRecord next;
    next.f_lin_density = lin.f_about;
    next.h_lin_density = lin.h_about;
    try {
      next.f_aff = lin.f_frozen
                       ? trace.iterates.front().f_aff
                       : linearize(model.transition, lin.f_about, statistical,
                                   cfg.ut);
      next.h_aff = linearize(model.measurement, lin.h_about, statistical,
                             cfg.ut);
      next.belief = run_pass(prior_prev, y, model, next.f_aff, next.h_aff);
    } catch (const std::runtime_error&) {
      trace.diverged = true;
      return {prev.belief, trace};
    }
    if (!belief_finite(next.belief)) {
      trace.diverged = true;
      return {prev.belief, trace};
    }

    double kl;
    try {
      kl = kl_divergence(prev.belief.posterior, next.belief.posterior);
    } catch (const std::runtime_error&) {
      trace.diverged = true;
      return {prev.belief, trace};
    }
    if (!std::isfinite(kl) || kl > kKlBlowup) {
      trace.diverged = true;
      return {prev.belief, trace};
    }
    trace.iterates.push_back(next);
    if (kl < cfg.gamma) {
      trace.converged_at = i;
      break;
    }
  }
  return {trace.iterates.back().belief, trace};
}

FilterRun run_filter(const GaussianDensity& prior0,
                     const std::vector<Vector>& ys,
                     const StateSpaceModel& model, const IterationConfig& cfg) {
  if (ys.empty()) {
    throw std::invalid_argument("run_filter: measurement sequence is empty");
  }
  FilterRun run;
  run.beliefs.reserve(ys.size());
  GaussianDensity prior = prior0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    std::pair<LagOneBelief, StepTrace> step;
    try {
      step = dif_step(prior, ys[k], model, cfg);
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
