#include "dif/verify.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "dif/reference_kf.hpp"

namespace dif::verify {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix random_matrix(RandomStream& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      m(i, j) = rng.gauss();
    }
  }
  return m;
}

Vector random_vector(RandomStream& rng, int n) {
  return rng.gauss_vector(n);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

double max_abs_diff(const Vector& a, const Vector& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

DifferentiableMap affine_map(const Matrix& a, const Vector& b) {
  DifferentiableMap map;
  map.in_dim = static_cast<int>(a.cols());
  map.out_dim = static_cast<int>(a.rows());
  map.eval = [a, b](const Vector& x) { return Vector(a * x + b); };
  map.jac = [a](const Vector&) { return a; };
  return map;
}

// One nonlinear benchmark problem for the GN and gradient suites.
struct NonlinearCase {
  std::string name;
  StateSpaceModel model;
  GaussianDensity prior;
  Vector perturb_prev;  // iterate spread around the prior mean
  Vector perturb_curr;  // iterate spread around f(x_prev)
};

std::vector<NonlinearCase> nonlinear_cases() {
  std::vector<NonlinearCase> cases;
  {
    NonlinearCase c;
    c.name = "cubic";
    c.model = make_illustration_model();
    c.prior = GaussianDensity(Vector::Constant(1, 3.0),
                              Matrix::Constant(1, 1, 4.0));
    c.perturb_prev = Vector::Constant(1, 2.0);
    c.perturb_curr = Vector::Constant(1, 1.0);
    cases.push_back(std::move(c));
  }
  {
    NonlinearCase c;
    c.name = "trig";
    c.model = make_trig_model();
    c.prior = GaussianDensity(Vector::Constant(1, -2.9),
                              Matrix::Constant(1, 1, 1.0));
    c.perturb_prev = Vector::Constant(1, 1.5);
    c.perturb_curr = Vector::Constant(1, 1.0);
    cases.push_back(std::move(c));
  }
  {
    NonlinearCase c;
    c.name = "coordinated-turn";
    c.model = make_tracking_model(CoordinatedTurnConfig{1.0, 1e-2, 1e-2}, 1.0);
    Vector mean(5);
    mean << 0.0, 10.0, 0.0, 10.0, 0.1;
    Vector diag(5);
    diag << 1.0, 1.0, 1.0, 1.0, 0.04;
    c.prior = GaussianDensity(mean, Matrix(diag.asDiagonal()));
    c.perturb_prev = diag.cwiseSqrt();
    c.perturb_curr = 0.5 * diag.cwiseSqrt();
    cases.push_back(std::move(c));
  }
  {
    NonlinearCase c;
    c.name = "tdoa";
    TdoaConfig geom;
    geom.mic_positions = {Eigen::Vector2d(0, 0), Eigen::Vector2d(4, 0),
                          Eigen::Vector2d(0, 4), Eigen::Vector2d(4, 4)};
    c.model = make_tdoa_model(CoordinatedTurnConfig{0.5, 1e-2, 1e-3}, geom);
    Vector mean(5);
    mean << 1.2, 1.0, 1.2, 0.0, 0.3;
    Vector diag(5);
    diag << 0.25, 0.25, 0.25, 0.25, 0.09;
    c.prior = GaussianDensity(mean, Matrix(diag.asDiagonal()));
    c.perturb_prev = 0.5 * diag.cwiseSqrt();
    c.perturb_curr = 0.25 * diag.cwiseSqrt();
    cases.push_back(std::move(c));
  }
  return cases;
}

JointIterate random_iterate(RandomStream& rng, const NonlinearCase& c) {
  const int n = c.model.state_dim();
  JointIterate it;
  it.x_prev = c.prior.mean;
  for (int i = 0; i < n; ++i) {
    it.x_prev[i] += c.perturb_prev[i] * (2.0 * rng.uniform() - 1.0);
  }
  it.x_curr = c.model.transition(it.x_prev);
  for (int i = 0; i < n; ++i) {
    it.x_curr[i] += c.perturb_curr[i] * (2.0 * rng.uniform() - 1.0);
  }
  return it;
}

Vector draw_measurement(RandomStream& rng, const NonlinearCase& c) {
  const Vector x1 = c.model.transition(c.prior.mean);
  return c.model.measurement(x1) +
         Vector(psd_sqrt(c.model.R) * rng.gauss_vector(c.model.meas_dim()));
}

const std::vector<Variant> kAllVariants = {
    Variant::EKF,  Variant::UKF,  Variant::IEKF,  Variant::IUKF,
    Variant::IPLF, Variant::DIEKF, Variant::DIUKF, Variant::DIPLF};

}  // namespace

Matrix random_spd(RandomStream& rng, int n, double ridge) {
  const Matrix m = random_matrix(rng, n, n);
  return Matrix(m * m.transpose() + ridge * Matrix::Identity(n, n));
}

RandomAffine random_affine_model(RandomStream& rng, int n, int m,
                                 double spectral) {
  RandomAffine out;
  out.F = random_matrix(rng, n, n);
  const double norm = out.F.jacobiSvd().singularValues()[0];
  if (norm > 0) {
    out.F *= spectral / norm;
  }
  out.bf = 0.5 * random_vector(rng, n);
  out.H = random_matrix(rng, m, n);
  out.bh = 0.5 * random_vector(rng, m);
  out.model.transition = affine_map(out.F, out.bf);
  out.model.measurement = affine_map(out.H, out.bh);
  out.model.Q = random_spd(rng, n);
  out.model.R = random_spd(rng, m);
  out.prior = GaussianDensity(random_vector(rng, n), random_spd(rng, n));
  return out;
}

SuiteResult kf_equivalence(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult res;
  res.name = "kf-equivalence";
  double worst = 0.0;
  RandomStream rng(mix_seed(seed, 11));
  for (int n : {1, 2, 5}) {
    for (int m : {1, 3}) {
      const RandomAffine sys = random_affine_model(rng, n, m);
      Scenario sc;
      sc.model = sys.model;
      sc.prior = sys.prior;
      sc.true_x0 = sys.prior.mean;
      sc.steps = 50;
      sc.seed = mix_seed(seed, 100 + 10 * n + m);
      const SimResult sim = simulate(sc);

      reference::AffineModel ref{sys.F,  sys.bf, sys.model.Q,
                                 sys.H,  sys.bh, sys.model.R};
      const reference::Trajectory expected =
          reference::run(ref, sys.prior.mean, sys.prior.cov, sim.measurements);

      for (Variant v : kAllVariants) {
        IterationConfig cfg;
        cfg.variant = v;
        const FilterRun run =
            run_filter(sys.prior, sim.measurements, sys.model, cfg);
        if (run.diverged_at.has_value()) {
          res.detail = variant_name(v) + " diverged on an affine model";
          res.seconds = elapsed(start);
          return res;
        }
        for (std::size_t k = 0; k < run.beliefs.size(); ++k) {
          worst = std::max(worst, max_abs_diff(run.beliefs[k].posterior.mean,
                                               expected.post_mean[k]));
          worst = std::max(worst, max_abs_diff(run.beliefs[k].posterior.cov,
                                               expected.post_cov[k]));
          worst = std::max(worst,
                           max_abs_diff(run.beliefs[k].smoothed_prev.mean,
                                        expected.smoothed_mean[k]));
          worst = std::max(worst, max_abs_diff(run.beliefs[k].smoothed_prev.cov,
                                               expected.smoothed_cov[k]));
        }
      }
    }
  }
  res.pass = worst <= 1e-9;
  std::ostringstream oss;
  oss << "max |Δ| vs reference filter/smoother = " << worst << " (tol 1e-9)";
  res.detail = oss.str();
  res.seconds = elapsed(start);
  return res;
}

SuiteResult gn_equivalence(std::uint64_t seed, int iterates_per_model) {
  const auto start = Clock::now();
  SuiteResult res;
  res.name = "gn-equivalence";
  double worst = 0.0;
  RandomStream rng(mix_seed(seed, 22));
  for (const NonlinearCase& c : nonlinear_cases()) {
    const Vector y = draw_measurement(rng, c);
    const LossWeights w{c.prior.cov, c.model.R, c.model.Q};
    for (int t = 0; t < iterates_per_model; ++t) {
      const JointIterate it = random_iterate(rng, c);
      const Vector p_gn = gn_step(it, y, c.prior, c.model, w);
      const SmootherProposal prop = propose_by_smoothing(
          it, y, c.prior, c.model, /*statistical=*/false, c.prior.cov,
          c.prior.cov, UnscentedConfig{});
      const Vector p_sm = prop.proposal.stacked() - it.stacked();
      const double denom = std::max({p_gn.norm(), p_sm.norm(), 1e-9});
      worst = std::max(worst, (p_gn - p_sm).norm() / denom);
    }
  }
  res.pass = worst <= 1e-6;
  std::ostringstream oss;
  oss << "max relative |GN step - smoother step| = " << worst << " (tol 1e-6)";
  res.detail = oss.str();
  res.seconds = elapsed(start);
  return res;
}

SuiteResult sl_exactness(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult res;
  res.name = "sl-exactness";
  RandomStream rng(mix_seed(seed, 33));
  double worst_coeff = 0.0;
  double worst_omega = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform() * 4) % 4;
    const int m = 1 + static_cast<int>(rng.uniform() * 4) % 4;
    const Matrix a0 = random_matrix(rng, m, n);
    const Vector b0 = random_vector(rng, m);
    const GaussianDensity density(random_vector(rng, n), random_spd(rng, n));
    const AffineApproximation aff =
        linearize_statistical(affine_map(a0, b0), density);
    worst_coeff = std::max(worst_coeff,
                           max_abs_diff(aff.A, a0) / (1.0 + a0.cwiseAbs().maxCoeff()));
    worst_coeff = std::max(worst_coeff,
                           max_abs_diff(aff.b, b0) / (1.0 + b0.cwiseAbs().maxCoeff()));
    worst_omega = std::max(worst_omega, aff.Omega.norm());
  }

  // Hand case: g(x) = x² under N(0,1) with κ = 2 gives (A, b, Ω) = (0, 1, 2).
  DifferentiableMap square;
  square.in_dim = 1;
  square.out_dim = 1;
  square.eval = [](const Vector& x) {
    Vector y(1);
    y[0] = x[0] * x[0];
    return y;
  };
  UnscentedConfig ut;
  ut.kappa_override = 2.0;
  const AffineApproximation aff = linearize_statistical(
      square, GaussianDensity(Vector::Zero(1), Matrix::Identity(1, 1)), ut);
  const double hand_err =
      std::max({std::abs(aff.A(0, 0)), std::abs(aff.b[0] - 1.0),
                std::abs(aff.Omega(0, 0) - 2.0)});

  res.pass = worst_coeff <= 1e-9 && worst_omega <= 1e-9 && hand_err <= 1e-10;
  std::ostringstream oss;
  oss << "affine recovery max rel err = " << worst_coeff << ", max ‖Ω‖ = "
      << worst_omega << " (tol 1e-9); quadratic hand case err = " << hand_err
      << " (tol 1e-10)";
  res.detail = oss.str();
  res.seconds = elapsed(start);
  return res;
}

SuiteResult gradient_check(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult res;
  res.name = "gradient-check";
  RandomStream rng(mix_seed(seed, 44));
  // cube-root step balances truncation against cancellation for a
  // second-difference of the loss
  const double fd_step = std::cbrt(std::numeric_limits<double>::epsilon());
  double worst = 0.0;
  for (const NonlinearCase& c : nonlinear_cases()) {
    const Vector y = draw_measurement(rng, c);
    const LossWeights w{c.prior.cov, c.model.R, c.model.Q};
    const int n = c.model.state_dim();
    for (int t = 0; t < 25; ++t) {
      const JointIterate it = random_iterate(rng, c);
      const Vector grad = gn_gradient(it, y, c.prior, c.model, w);
      Vector s = it.stacked();
      for (int i = 0; i < s.size(); ++i) {
        const double h = fd_step * std::max(1.0, std::abs(s[i]));
        Vector sp = s, sm = s;
        sp[i] += h;
        sm[i] -= h;
        const double fd =
            (evaluate_loss(JointIterate::from_stacked(sp, n), y, c.prior,
                           c.model, w) -
             evaluate_loss(JointIterate::from_stacked(sm, n), y, c.prior,
                           c.model, w)) /
            (sp[i] - sm[i]);
        worst = std::max(worst,
                         std::abs(grad[i] - fd) / std::max(1.0, std::abs(grad[i])));
      }
    }
  }
  res.pass = worst <= 1e-5;
  std::ostringstream oss;
  oss << "max relative |∇L - finite difference| = " << worst << " (tol 1e-5)";
  res.detail = oss.str();
  res.seconds = elapsed(start);
  return res;
}

SuiteResult psd_symmetry(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult res;
  res.name = "psd-symmetry";
  RandomStream rng(mix_seed(seed, 55));
  int checked = 0;
  int bad = 0;
  auto check = [&](const Matrix& cov) {
    ++checked;
    if (!is_valid_covariance(cov)) {
      ++bad;
    }
  };
  const auto cases = nonlinear_cases();
  const std::vector<Variant> variants = {Variant::DIEKF, Variant::DIUKF,
                                         Variant::DIPLF, Variant::IPLF};
  for (const NonlinearCase& c : cases) {
    Scenario sc;
    sc.model = c.model;
    sc.prior = c.prior;
    sc.true_x0 = c.prior.mean;
    sc.steps = 20;
    sc.seed = mix_seed(seed, 700 + checked);
    const SimResult sim = simulate(sc);
    for (Variant v : variants) {
      IterationConfig cfg;
      cfg.variant = v;
      GaussianDensity prior = c.prior;
      for (const Vector& y : sim.measurements) {
        std::pair<LagOneBelief, StepTrace> step;
        try {
          step = dif_step(prior, y, c.model, cfg);
        } catch (const std::exception&) {
          break;
        }
        for (const IterationRecord& rec : step.second.iterates) {
          check(rec.belief.predictive.cov);
          check(rec.belief.posterior.cov);
          check(rec.belief.smoothed_prev.cov);
        }
        if (step.second.diverged || !step.first.posterior.finite()) {
          break;
        }
        prior = step.first.posterior;
      }
    }
  }
  res.pass = bad == 0 && checked > 0;
  std::ostringstream oss;
  oss << bad << " of " << checked
      << " emitted covariances failed symmetry/PSD validation";
  res.detail = oss.str();
  res.seconds = elapsed(start);
  return res;
}

SuiteResult kl_nonnegativity(std::uint64_t seed) {
  const auto start = Clock::now();
  SuiteResult res;
  res.name = "kl-nonnegativity";
  RandomStream rng(mix_seed(seed, 66));
  double min_kl = 0.0;
  double worst_self = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 5;
    const GaussianDensity p(random_vector(rng, n), random_spd(rng, n));
    const GaussianDensity q(random_vector(rng, n), random_spd(rng, n));
    min_kl = std::min(min_kl, kl_divergence(p, q));
    worst_self = std::max(worst_self, std::abs(kl_divergence(p, p)));
  }
  res.pass = min_kl >= -1e-12 && worst_self <= 1e-12;
  std::ostringstream oss;
  oss << "min KL = " << min_kl << " (tol -1e-12), max |KL(p,p)| = "
      << worst_self << " (tol 1e-12)";
  res.detail = oss.str();
  res.seconds = elapsed(start);
  return res;
}

std::vector<SuiteResult> run_all(std::uint64_t seed) {
  return {kf_equivalence(seed),  gn_equivalence(seed, 50),
          sl_exactness(seed),    gradient_check(seed),
          psd_symmetry(seed),    kl_nonnegativity(seed)};
}

}  // namespace dif::verify
