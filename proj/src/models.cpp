#include "dif/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dif {

namespace {
constexpr double kOmegaEps = 1e-9;  // below this, use the ω→0 limits
}

Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                  const Vector& x, int out_dim) {
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Matrix j(out_dim, x.size());
  Vector xp = x;
  Vector xm = x;
  for (int i = 0; i < x.size(); ++i) {
    const double h = sqrt_eps * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    j.col(i) = (f(xp) - f(xm)) / (xp[i] - xm[i]);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return j;
}

Matrix DifferentiableMap::jacobian(const Vector& x) const {
  if (jac) {
    return jac(x);
  }
  return finite_difference_jacobian(eval, x, out_dim);
}

void StateSpaceModel::validate() const {
  const int n = transition.in_dim;
  const int m = measurement.out_dim;
  if (transition.out_dim != n || measurement.in_dim != n) {
    throw std::invalid_argument("StateSpaceModel: inconsistent map dimensions");
  }
  if (Q.rows() != n || Q.cols() != n || R.rows() != m || R.cols() != m) {
    throw std::invalid_argument("StateSpaceModel: noise covariance dimensions "
                                "do not match the maps");
  }
  if (Eigen::LLT<Matrix>(R).info() != Eigen::Success) {
    throw std::invalid_argument("StateSpaceModel: R must be positive definite");
  }
}

Vector ct_transition(const Vector& x, const CoordinatedTurnConfig& cfg) {
  const double T = cfg.T;
  const double w = x[4];
  double swt_w;   // sin(Tω)/ω
  double cwt1_w;  // (1−cos(Tω))/ω
  double cwt, swt;
  if (std::abs(w) < kOmegaEps) {
    swt_w = T;
    cwt1_w = 0.0;
    cwt = 1.0;
    swt = 0.0;
  } else {
    cwt = std::cos(T * w);
    swt = std::sin(T * w);
    swt_w = swt / w;
    cwt1_w = (1.0 - cwt) / w;
  }
  Vector out(5);
  out[0] = x[0] + swt_w * x[1] - cwt1_w * x[3];
  out[1] = cwt * x[1] - swt * x[3];
  out[2] = cwt1_w * x[1] + x[2] + swt_w * x[3];
  out[3] = swt * x[1] + cwt * x[3];
  out[4] = w;
  return out;
}

Matrix ct_jacobian(const Vector& x, const CoordinatedTurnConfig& cfg) {
  const double T = cfg.T;
  const double w = x[4];
  const double vx = x[1];
  const double vy = x[3];
  double swt_w, cwt1_w, cwt, swt;
  double d_swt_w, d_cwt1_w;  // d/dω of sin(Tω)/ω and (1−cos(Tω))/ω
  if (std::abs(w) < kOmegaEps) {
    cwt = 1.0;
    swt = 0.0;
    swt_w = T;
    cwt1_w = 0.0;
    d_swt_w = 0.0;        // limit −T³ω/3 → 0
    d_cwt1_w = T * T / 2;  // limit T²/2
  } else {
    cwt = std::cos(T * w);
    swt = std::sin(T * w);
    swt_w = swt / w;
    cwt1_w = (1.0 - cwt) / w;
    d_swt_w = (T * w * cwt - swt) / (w * w);
    d_cwt1_w = (T * w * swt - (1.0 - cwt)) / (w * w);
  }
  Matrix j = Matrix::Zero(5, 5);
  j(0, 0) = 1.0;
  j(0, 1) = swt_w;
  j(0, 3) = -cwt1_w;
  j(0, 4) = d_swt_w * vx - d_cwt1_w * vy;
  j(1, 1) = cwt;
  j(1, 3) = -swt;
  j(1, 4) = -T * swt * vx - T * cwt * vy;
  j(2, 1) = cwt1_w;
  j(2, 2) = 1.0;
  j(2, 3) = swt_w;
  j(2, 4) = d_cwt1_w * vx + d_swt_w * vy;
  j(3, 1) = swt;
  j(3, 3) = cwt;
  j(3, 4) = T * cwt * vx - T * swt * vy;
  j(4, 4) = 1.0;
  return j;
}

Matrix ct_process_noise(const CoordinatedTurnConfig& cfg) {
  const double T = cfg.T;
  Matrix block(2, 2);
  block << cfg.q1 * T * T * T / 3.0, cfg.q1 * T * T / 2.0,
           cfg.q1 * T * T / 2.0,     cfg.q1 * T;
  Matrix q = Matrix::Zero(5, 5);
  q.block<2, 2>(0, 0) = block;
  q.block<2, 2>(2, 2) = block;
  q(4, 4) = cfg.q2;
  return q;
}

DifferentiableMap make_ct_map(const CoordinatedTurnConfig& cfg) {
  DifferentiableMap m;
  m.in_dim = 5;
  m.out_dim = 5;
  m.eval = [cfg](const Vector& x) { return ct_transition(x, cfg); };
  m.jac = [cfg](const Vector& x) { return ct_jacobian(x, cfg); };
  return m;
}

namespace {

Eigen::Vector2d ct_position(const Vector& x) {
  return Eigen::Vector2d(x[0], x[2]);
}

}  // namespace

Vector tdoa_measure(const Vector& x, const TdoaConfig& cfg) {
  const Eigen::Vector2d p = ct_position(x);
  std::array<double, 4> r;
  for (int j = 0; j < 4; ++j) {
    r[j] = (p - cfg.mic_positions[j]).norm();
    if (r[j] == 0.0) {
      throw std::runtime_error(
          "tdoa_measure: target coincides with receiver " + std::to_string(j + 1) +
          "; range gradient is singular");
    }
  }
  Vector y(3);
  y << r[0] - r[1], r[0] - r[2], r[0] - r[3];
  return y;
}

Matrix tdoa_jacobian(const Vector& x, const TdoaConfig& cfg) {
  const Eigen::Vector2d p = ct_position(x);
  std::array<Eigen::Vector2d, 4> grad;
  for (int j = 0; j < 4; ++j) {
    const Eigen::Vector2d d = p - cfg.mic_positions[j];
    const double r = d.norm();
    if (r == 0.0) {
      throw std::runtime_error(
          "tdoa_jacobian: target coincides with receiver " + std::to_string(j + 1) +
          "; range gradient is singular");
    }
    grad[j] = d / r;
  }
  Matrix jac = Matrix::Zero(3, 5);
  for (int row = 0; row < 3; ++row) {
    const Eigen::Vector2d g = grad[0] - grad[row + 1];
    jac(row, 0) = g[0];
    jac(row, 2) = g[1];
  }
  return jac;
}

Matrix tdoa_noise(const TdoaConfig& cfg) {
  Matrix r = Matrix::Constant(3, 3, cfg.sigma_sq[0]);
  r(0, 0) += cfg.sigma_sq[1];
  r(1, 1) += cfg.sigma_sq[2];
  r(2, 2) += cfg.sigma_sq[3];
  return r;
}

DifferentiableMap make_tdoa_map(const TdoaConfig& cfg) {
  DifferentiableMap m;
  m.in_dim = 5;
  m.out_dim = 3;
  m.eval = [cfg](const Vector& x) { return tdoa_measure(x, cfg); };
  m.jac = [cfg](const Vector& x) { return tdoa_jacobian(x, cfg); };
  return m;
}

StateSpaceModel make_illustration_model() {
  StateSpaceModel model;
  model.transition.in_dim = 1;
  model.transition.out_dim = 1;
  model.transition.eval = [](const Vector& x) {
    Vector y(1);
    y[0] = 0.01 * x[0] * x[0] * x[0];
    return y;
  };
  model.transition.jac = [](const Vector& x) {
    Matrix j(1, 1);
    j(0, 0) = 0.03 * x[0] * x[0];
    return j;
  };
  model.measurement.in_dim = 1;
  model.measurement.out_dim = 1;
  model.measurement.eval = [](const Vector& x) { return x; };
  model.measurement.jac = [](const Vector&) { return Matrix::Identity(1, 1); };
  model.Q = Matrix::Constant(1, 1, 0.1);
  model.R = Matrix::Constant(1, 1, 0.1);
  return model;
}

StateSpaceModel make_trig_model() {
  StateSpaceModel model;
  model.transition.in_dim = 1;
  model.transition.out_dim = 1;
  model.transition.eval = [](const Vector& x) {
    Vector y(1);
    y[0] = std::cos(x[0]) * std::sin(x[0]) * x[0] * x[0];
    return y;
  };
  model.transition.jac = [](const Vector& x) {
    // d/dx [½sin(2x)x²] = cos(2x)x² + x sin(2x)
    Matrix j(1, 1);
    j(0, 0) = std::cos(2.0 * x[0]) * x[0] * x[0] + x[0] * std::sin(2.0 * x[0]);
    return j;
  };
  model.measurement.in_dim = 1;
  model.measurement.out_dim = 1;
  model.measurement.eval = [](const Vector& x) {
    Vector y(1);
    y[0] = std::atan(x[0]);
    return y;
  };
  model.measurement.jac = [](const Vector& x) {
    Matrix j(1, 1);
    j(0, 0) = 1.0 / (1.0 + x[0] * x[0]);
    return j;
  };
  model.Q = Matrix::Constant(1, 1, 0.1);
  model.R = Matrix::Constant(1, 1, 1.0);
  return model;
}

StateSpaceModel make_tracking_model(const CoordinatedTurnConfig& cfg,
                                    double sigma_sq) {
  StateSpaceModel model;
  model.transition = make_ct_map(cfg);
  Matrix h(2, 5);
  h << 1, 0, 0, 0, 0,
       0, 0, 1, 0, 0;
  model.measurement.in_dim = 5;
  model.measurement.out_dim = 2;
  model.measurement.eval = [h](const Vector& x) { return Vector(h * x); };
  model.measurement.jac = [h](const Vector&) { return h; };
  model.Q = ct_process_noise(cfg);
  model.R = sigma_sq * Matrix::Identity(2, 2);
  return model;
}

StateSpaceModel make_tdoa_model(const CoordinatedTurnConfig& ct,
                                const TdoaConfig& tdoa) {
  StateSpaceModel model;
  model.transition = make_ct_map(ct);
  model.measurement = make_tdoa_map(tdoa);
  model.Q = ct_process_noise(ct);
  model.R = tdoa_noise(tdoa);
  return model;
}

}  // namespace dif
