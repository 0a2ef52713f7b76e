#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dif/damped.hpp"
#include "dif/filter.hpp"

namespace dif {

/// splitmix64-style mixing for derived seeds; identical on every platform.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

/**
 * Deterministic Gaussian stream: std::mt19937_64 (bit-exact per the C++
 * standard) driving a Box-Muller transform. Avoids std::normal_distribution,
 * whose output is implementation-defined.
 */
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform();  // (0, 1]
  double gauss();
  Vector gauss_vector(int n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// One simulated experiment: model, filter prior, true initial state.
struct Scenario {
  StateSpaceModel model;
  GaussianDensity prior;
  Vector true_x0;
  int steps = 1;
  std::uint64_t seed = 0;
};

/// states[k] is the true state at time k (states[0] = true_x0);
/// measurements[k] is y_{k+1}, the measurement of states[k+1].
struct SimResult {
  std::vector<Vector> states;
  std::vector<Vector> measurements;
};

/// Rolls x_{k+1} = f(x_k) + w_k, y_k = h(x_k) + v_k with w ~ N(0,Q),
/// v ~ N(0,R). Identical seeds give bit-identical output.
SimResult simulate(const Scenario& scenario);

/// Root mean (over time) of the squared Euclidean error on the selected
/// state components.
double rmse(const std::vector<Vector>& estimates,
            const std::vector<Vector>& truths,
            const std::vector<int>& selector);

/// A named filter configuration entered into a sweep.
struct VariantSpec {
  std::string name;
  IterationConfig cfg;
  bool damped = false;
  LineSearchConfig ls;
};
VariantSpec make_variant_spec(const std::string& name, int max_iters = 10,
                              double gamma = 1e-6);

struct SweepGrid {
  std::vector<double> q1_values;
  std::vector<double> second_values;  // σ² or q₂ depending on the experiment
  int mc_runs = 20;
};

/// Everything the harness needs for one noise configuration.
struct ConfigProblem {
  StateSpaceModel filter_model;
  GaussianDensity prior;
  std::function<SimResult(std::uint64_t seed)> simulate;
  double divergence_threshold = 0.0;  // position RMSE above this = diverged
  std::vector<int> pos_selector;
  std::vector<int> vel_selector;
};

using ProblemFactory = std::function<ConfigProblem(double q1, double second)>;

struct SweepCell {
  int config_id = 0;
  double q1 = 0.0;
  double second = 0.0;
  std::string variant;
  double pos_rmse = 0.0;  // pooled over non-diverged runs; NaN if none
  double vel_rmse = 0.0;
  int diverged = 0;
  int total = 0;
};

struct SweepResult {
  std::string second_axis;  // "sigma_sq" or "q2"
  std::vector<SweepCell> cells;
};

/**
 * Runs mc_runs seeded simulations per grid point with common random numbers
 * across variants, filters each, classifies divergence (non-finite estimates
 * or per-run position RMSE above the threshold), and pools RMSE over the
 * non-diverged runs. (config, run) cells run in parallel across `jobs`
 * threads; the aggregation order is fixed, so the result is
 * parallelism-invariant.
 */
SweepResult run_sweep(const ProblemFactory& factory, const SweepGrid& grid,
                      const std::vector<VariantSpec>& variants,
                      std::uint64_t master_seed, const std::string& second_axis,
                      int jobs = 1);

/// A config counts as diverged for a variant when most of its runs diverged.
bool config_diverged(const SweepCell& cell);
int diverged_config_count(const SweepResult& result, const std::string& variant);

std::string sweep_to_csv(const SweepResult& result);
std::string sweep_to_json(const SweepResult& result);
SweepResult sweep_from_json(const std::string& text);

}  // namespace dif
