#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dif/bench.hpp"

namespace dif::verify {

/// Random SPD matrix M·Mᵀ + ridge·I.
Matrix random_spd(RandomStream& rng, int n, double ridge = 0.5);

/// Random affine state-space model with the transition slope scaled to
/// spectral norm `spectral` (keeps 50-step trajectories bounded).
struct RandomAffine {
  StateSpaceModel model;
  Matrix F;
  Vector bf;
  Matrix H;
  Vector bh;
  GaussianDensity prior;
};
RandomAffine random_affine_model(RandomStream& rng, int n, int m,
                                 double spectral = 0.9);

struct SuiteResult {
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

/// Every variant against the textbook filter/smoother on random affine
/// models (n ∈ {1,2,5}, m ∈ {1,3}), 50 steps, max-abs tolerance 1e-9.
SuiteResult kf_equivalence(std::uint64_t seed);

/// Normal-equations Gauss-Newton step against (one analytically linearized
/// smoother pass − iterate) on the four shipped nonlinear models,
/// `iterates_per_model` random iterates each, 1e-6 relative.
SuiteResult gn_equivalence(std::uint64_t seed, int iterates_per_model = 200);

/// Statistical linearization recovers random affine maps exactly
/// (‖Ω‖ ≤ 1e-9) and reproduces the quadratic-map hand case (0, 1, 2).
SuiteResult sl_exactness(std::uint64_t seed);

/// Analytic loss gradient against central finite differences, 1e-5 relative.
SuiteResult gradient_check(std::uint64_t seed);

/// Exact symmetry and PSD of every covariance emitted by nonlinear filter
/// runs across the variants.
SuiteResult psd_symmetry(std::uint64_t seed);

/// KL ≥ 0 and KL(p‖p) = 0 on random density pairs.
SuiteResult kl_nonnegativity(std::uint64_t seed);

std::vector<SuiteResult> run_all(std::uint64_t seed);

}  // namespace dif::verify
