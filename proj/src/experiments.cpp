#include "dif/experiments.hpp"

#include <cmath>
#include <stdexcept>

namespace dif::experiments {

IllustrationResult run_illustration(const IllustrationSpec& spec) {
  const StateSpaceModel model = make_illustration_model();
  const GaussianDensity prior(Vector::Constant(1, spec.prior_mean),
                              Matrix::Constant(1, 1, spec.prior_var));
  IllustrationResult out;
  out.grid = grid_posterior_1d(model, prior, spec.y, spec.grid_lo, spec.grid_hi,
                               spec.grid_points);

  IterationConfig cfg;
  cfg.variant = Variant::DIEKF;
  cfg.max_iters = spec.max_iters;
  cfg.gamma = spec.gamma;
  Vector y(1);
  y[0] = spec.y;
  auto [belief, trace] = dif_step(prior, y, model, cfg);
  out.trace = trace;
  for (const IterationRecord& rec : trace.iterates) {
    out.kl_grid_to_posterior.push_back(grid_kl_to_gaussian(
        out.grid, rec.belief.posterior.mean[0], rec.belief.posterior.cov(0, 0)));
  }
  return out;
}

namespace {

AlgPath path_from_trace(const std::string& name, const StepTrace& trace,
                        const Vector& y, const GaussianDensity& prior,
                        const StateSpaceModel& model, const LossWeights& w) {
  AlgPath path;
  path.name = name;
  for (const IterationRecord& rec : trace.iterates) {
    JointIterate it;
    it.x_prev = rec.belief.smoothed_prev.mean;
    it.x_curr = rec.belief.posterior.mean;
    path.x0.push_back(it.x_prev[0]);
    path.x1.push_back(it.x_curr[0]);
    path.loss.push_back(evaluate_loss(it, y, prior, model, w));
  }
  return path;
}

}  // namespace

Example1dResult run_example1d(const Example1dSpec& spec) {
  const StateSpaceModel model = make_trig_model();
  const GaussianDensity prior(Vector::Constant(1, spec.prior_mean),
                              Matrix::Constant(1, 1, spec.prior_var));

  Example1dResult out;
  if (spec.y_override) {
    out.y = *spec.y_override;
  } else {
    Scenario sc;
    sc.model = model;
    sc.prior = prior;
    sc.true_x0 = Vector::Constant(1, spec.true_x0);
    sc.steps = 1;
    sc.seed = spec.seed;
    out.y = simulate(sc).measurements[0][0];
  }
  Vector y(1);
  y[0] = out.y;

  const LossWeights w{prior.cov, model.R, model.Q};
  out.landscape = loss_landscape_1d(model, prior, y, w, spec.grid_lo,
                                    spec.grid_hi, spec.grid_points);

  IterationConfig cfg;
  cfg.max_iters = spec.iters;
  cfg.gamma = 1e-300;  // effectively iterate to the fixed count

  cfg.variant = Variant::IEKF;
  out.iekf = path_from_trace("IEKF", dif_step(prior, y, model, cfg).second, y,
                             prior, model, w);
  cfg.variant = Variant::DIEKF;
  out.diekf = path_from_trace("DIEKF", dif_step(prior, y, model, cfg).second, y,
                              prior, model, w);
  LineSearchConfig ls;
  out.lsdiekf =
      path_from_trace("LS-DIEKF", damped_dif_step(prior, y, model, cfg, ls).second,
                      y, prior, model, w);
  return out;
}

bool path_diverged(const AlgPath& path, double lo, double hi) {
  if (path.x0.empty()) {
    return true;
  }
  const double initial = path.loss.front();
  for (std::size_t i = 0; i < path.x0.size(); ++i) {
    if (path.x0[i] < lo || path.x0[i] > hi || path.x1[i] < lo ||
        path.x1[i] > hi) {
      return true;
    }
    if (!std::isfinite(path.loss[i]) || path.loss[i] > 10.0 * initial) {
      return true;
    }
  }
  return false;
}

TrackingScenario::TrackingScenario() {
  x0.resize(5);
  x0 << 0.0, 10.0, 0.0, 10.0, 0.1;
  prior_mean.resize(5);
  prior_mean << 0.0, 10.0, 0.0, 10.0, 0.0;
  prior_diag.resize(5);
  prior_diag << 1.0, 1.0, 1.0, 1.0, 0.04;
}

ProblemFactory tracking_problem_factory(const TrackingScenario& sc) {
  return [sc](double q1, double sigma_sq) {
    ConfigProblem problem;
    const CoordinatedTurnConfig ct{sc.T, q1, sc.q2};
    problem.filter_model = make_tracking_model(ct, sigma_sq);
    problem.prior =
        GaussianDensity(sc.prior_mean, Matrix(sc.prior_diag.asDiagonal()));
    problem.divergence_threshold = std::sqrt(sigma_sq);
    problem.pos_selector = {0, 2};
    problem.vel_selector = {1, 3};
    const StateSpaceModel sim_model = problem.filter_model;
    const Vector x0 = sc.x0;
    const int steps = sc.steps;
    problem.simulate = [sim_model, x0, steps](std::uint64_t seed) {
      Scenario scenario;
      scenario.model = sim_model;
      scenario.prior = GaussianDensity(x0, Matrix::Identity(5, 5));
      scenario.true_x0 = x0;
      scenario.steps = steps;
      scenario.seed = seed;
      return simulate(scenario);
    };
    return problem;
  };
}

TdoaScenario::TdoaScenario() {
  geometry.mic_positions = {Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 0),
                            Eigen::Vector2d(0, 4), Eigen::Vector2d(4, 4)};
  geometry.sigma_sq = {1e-2, 1e-2, 1e-2, 1e-2};
  x0.resize(5);
  x0 << 1.2, 1.0, 1.2, 0.0, 0.6;
  prior_mean.resize(5);
  prior_mean << 1.2, 1.0, 1.2, 0.0, 0.0;
  prior_diag.resize(5);
  prior_diag << 0.25, 0.25, 0.25, 0.25, 0.25;
}

ProblemFactory tdoa_problem_factory(const TdoaScenario& sc) {
  return [sc](double q1, double q2) {
    ConfigProblem problem;
    const CoordinatedTurnConfig filter_ct{sc.T, q1, q2};
    problem.filter_model = make_tdoa_model(filter_ct, sc.geometry);
    problem.prior =
        GaussianDensity(sc.prior_mean, Matrix(sc.prior_diag.asDiagonal()));
    problem.divergence_threshold = sc.divergence_threshold;
    problem.pos_selector = {0, 2};
    problem.vel_selector = {1, 3};

    // The cart follows a fixed figure-eight: coordinated-turn dynamics with
    // an alternating turn rate and small fixed process noise, independent of
    // the swept filter tuning.
    const TdoaScenario scen = sc;
    problem.simulate = [scen](std::uint64_t seed) {
      const CoordinatedTurnConfig sim_ct{scen.T, scen.sim_q1, 0.0};
      const Matrix q_root = psd_sqrt(ct_process_noise(sim_ct));
      const Matrix r_root = psd_sqrt(tdoa_noise(scen.geometry));
      RandomStream rng(seed);
      SimResult out;
      out.states.reserve(scen.steps + 1);
      out.measurements.reserve(scen.steps);
      Vector x = scen.x0;
      out.states.push_back(x);
      for (int k = 0; k < scen.steps; ++k) {
        const int phase = (k / scen.omega_switch_every) % 2;
        x[4] = phase == 0 ? scen.omega_mag : -scen.omega_mag;
        Vector next = ct_transition(x, sim_ct) + Vector(q_root * rng.gauss_vector(5));
        next[4] = x[4];
        const Vector v = r_root * rng.gauss_vector(3);
        out.measurements.push_back(tdoa_measure(next, scen.geometry) + v);
        out.states.push_back(next);
        x = next;
      }
      return out;
    };
    return problem;
  };
}

}  // namespace dif::experiments
