#pragma once

#include <array>
#include <functional>

#include "dif/gaussian.hpp"

namespace dif {

/// Central finite-difference Jacobian with step h = √ε·max(1, |xᵢ|) per axis.
Matrix finite_difference_jacobian(const std::function<Vector(const Vector&)>& f,
                                  const Vector& x, int out_dim);

/**
 * A vector-valued map with Jacobian access. If no analytical Jacobian is
 * supplied, jacobian() falls back to central finite differences.
 */
struct DifferentiableMap {
  int in_dim = 0;
  int out_dim = 0;
  std::function<Vector(const Vector&)> eval;
  std::function<Matrix(const Vector&)> jac;  // optional

  Vector operator()(const Vector& x) const { return eval(x); }
  Matrix jacobian(const Vector& x) const;
  bool has_analytical_jacobian() const { return static_cast<bool>(jac); }
};

/**
 * Discrete-time model x_{k+1} = f(x_k) + w_k, y_k = h(x_k) + v_k with
 * w ~ N(0, Q) and v ~ N(0, R). Immutable after construction.
 */
struct StateSpaceModel {
  DifferentiableMap transition;
  DifferentiableMap measurement;
  Matrix Q;
  Matrix R;

  int state_dim() const { return transition.in_dim; }
  int meas_dim() const { return measurement.out_dim; }
  void validate() const;
};

/// Planar coordinated-turn model parameters: sampling period and the two
/// process-noise intensities (position/velocity and turn rate).
struct CoordinatedTurnConfig {
  double T = 1.0;
  double q1 = 1.0;
  double q2 = 1.0;
};

/// State convention: x = [pˣ, vˣ, pʸ, vʸ, ω].
Vector ct_transition(const Vector& x, const CoordinatedTurnConfig& cfg);
Matrix ct_jacobian(const Vector& x, const CoordinatedTurnConfig& cfg);
Matrix ct_process_noise(const CoordinatedTurnConfig& cfg);
DifferentiableMap make_ct_map(const CoordinatedTurnConfig& cfg);

/// Range-difference (TDOA) measurement geometry: four receiver positions and
/// their variances. R = σ₁²𝟙𝟙ᵀ + diag(σ₂², σ₃², σ₄²).
struct TdoaConfig {
  std::array<Eigen::Vector2d, 4> mic_positions;
  std::array<double, 4> sigma_sq = {1e-2, 1e-2, 1e-2, 1e-2};
};

/// Three range differences r¹−r², r¹−r³, r¹−r⁴ for the position components
/// (x[0], x[2]) of a coordinated-turn state. Throws if the position coincides
/// with a receiver (the range gradient is singular there).
Vector tdoa_measure(const Vector& x, const TdoaConfig& cfg);
Matrix tdoa_jacobian(const Vector& x, const TdoaConfig& cfg);
Matrix tdoa_noise(const TdoaConfig& cfg);
DifferentiableMap make_tdoa_map(const TdoaConfig& cfg);

/// 1D cubic system: f(x) = 0.01x³, h(x) = x, Q = R = 0.1.
StateSpaceModel make_illustration_model();

/// 1D trigonometric system: f(x) = cos(x)sin(x)x², h(x) = arctan(x),
/// Q = 0.1, R = 1.
StateSpaceModel make_trig_model();

/// Coordinated-turn dynamics with a linear measurement of position,
/// R = sigma_sq·I₂.
StateSpaceModel make_tracking_model(const CoordinatedTurnConfig& cfg,
                                    double sigma_sq);

/// Coordinated-turn dynamics with the range-difference measurement.
StateSpaceModel make_tdoa_model(const CoordinatedTurnConfig& ct,
                                const TdoaConfig& tdoa);

}  // namespace dif
