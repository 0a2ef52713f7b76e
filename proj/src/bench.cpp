#include "dif/bench.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace dif {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double RandomStream::uniform() {
  // 53-bit mantissa in (0, 1]
  return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
}

double RandomStream::gauss() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Vector RandomStream::gauss_vector(int n) {
  Vector v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = gauss();
  }
  return v;
}

SimResult simulate(const Scenario& scenario) {
  if (scenario.steps < 1) {
    throw std::invalid_argument("simulate: steps must be at least 1");
  }
  const Matrix q_root = psd_sqrt(scenario.model.Q);
  const Matrix r_root = psd_sqrt(scenario.model.R);
  RandomStream rng(scenario.seed);

  SimResult out;
  out.states.reserve(scenario.steps + 1);
  out.measurements.reserve(scenario.steps);
  out.states.push_back(scenario.true_x0);
  for (int k = 0; k < scenario.steps; ++k) {
    const Vector w = q_root * rng.gauss_vector(scenario.model.state_dim());
    Vector next = scenario.model.transition(out.states.back()) + w;
    const Vector v = r_root * rng.gauss_vector(scenario.model.meas_dim());
    Vector y = scenario.model.measurement(next) + v;
    out.states.push_back(std::move(next));
    out.measurements.push_back(std::move(y));
  }
  return out;
}

double rmse(const std::vector<Vector>& estimates,
            const std::vector<Vector>& truths,
            const std::vector<int>& selector) {
  if (estimates.size() != truths.size()) {
    throw std::invalid_argument("rmse: estimate and truth lengths differ");
  }
  if (estimates.empty()) {
    throw std::invalid_argument("rmse: empty sequences");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < estimates.size(); ++k) {
    for (int idx : selector) {
      const double e = estimates[k][idx] - truths[k][idx];
      sum += e * e;
    }
  }
  return std::sqrt(sum / static_cast<double>(estimates.size()));
}

VariantSpec make_variant_spec(const std::string& name, int max_iters,
                              double gamma) {
  VariantSpec spec;
  spec.name = name;
  spec.cfg.max_iters = max_iters;
  spec.cfg.gamma = gamma;
  if (name.rfind("LS-", 0) == 0) {
    spec.damped = true;
    spec.cfg.variant = parse_variant(name.substr(3));
  } else {
    spec.cfg.variant = parse_variant(name);
  }
  return spec;
}

namespace {

struct RunRecord {
  bool diverged = false;
  double ss_pos = 0.0;  // summed squared position errors over time
  double ss_vel = 0.0;
  int steps = 0;
};

RunRecord evaluate_run(const ConfigProblem& problem, const VariantSpec& spec,
                       const SimResult& sim) {
  RunRecord rec;
  FilterRun run;
  try {
    if (spec.damped) {
      run = run_damped_filter(problem.prior, sim.measurements,
                              problem.filter_model, spec.cfg, spec.ls);
    } else {
      run = run_filter(problem.prior, sim.measurements, problem.filter_model,
                       spec.cfg);
    }
  } catch (const std::exception&) {
    rec.diverged = true;
    return rec;
  }
  if (run.diverged_at.has_value() ||
      run.beliefs.size() != sim.measurements.size()) {
    rec.diverged = true;
    return rec;
  }
  rec.steps = static_cast<int>(run.beliefs.size());
  for (std::size_t k = 0; k < run.beliefs.size(); ++k) {
    const Vector& est = run.beliefs[k].posterior.mean;
    const Vector& truth = sim.states[k + 1];
    if (!est.allFinite()) {
      rec.diverged = true;
      return rec;
    }
    for (int idx : problem.pos_selector) {
      const double e = est[idx] - truth[idx];
      rec.ss_pos += e * e;
    }
    for (int idx : problem.vel_selector) {
      const double e = est[idx] - truth[idx];
      rec.ss_vel += e * e;
    }
  }
  const double run_pos_rmse = std::sqrt(rec.ss_pos / rec.steps);
  if (!std::isfinite(run_pos_rmse) ||
      run_pos_rmse > problem.divergence_threshold) {
    rec.diverged = true;
  }
  return rec;
}

}  // namespace

SweepResult run_sweep(const ProblemFactory& factory, const SweepGrid& grid,
                      const std::vector<VariantSpec>& variants,
                      std::uint64_t master_seed, const std::string& second_axis,
                      int jobs) {
  if (grid.q1_values.empty() || grid.second_values.empty()) {
    throw std::invalid_argument("run_sweep: grid axes must be non-empty");
  }
  if (grid.mc_runs < 1 || variants.empty()) {
    throw std::invalid_argument("run_sweep: need at least one run and variant");
  }
  const int n_second = static_cast<int>(grid.second_values.size());
  const int n_configs = static_cast<int>(grid.q1_values.size()) * n_second;
  const int n_variants = static_cast<int>(variants.size());
  const int n_tasks = n_configs * grid.mc_runs;

  std::vector<RunRecord> records(
      static_cast<std::size_t>(n_tasks) * n_variants);

  std::atomic<int> next_task{0};
  auto worker = [&]() {
    for (;;) {
      const int task = next_task.fetch_add(1);
      if (task >= n_tasks) {
        return;
      }
      const int config_id = task / grid.mc_runs;
      const int run_idx = task % grid.mc_runs;
      const double q1 = grid.q1_values[config_id / n_second];
      const double second = grid.second_values[config_id % n_second];
      const ConfigProblem problem = factory(q1, second);
      const std::uint64_t seed =
          mix_seed(mix_seed(master_seed, static_cast<std::uint64_t>(config_id)),
                   static_cast<std::uint64_t>(run_idx));
      const SimResult sim = problem.simulate(seed);
      for (int vi = 0; vi < n_variants; ++vi) {
        records[static_cast<std::size_t>(task) * n_variants + vi] =
            evaluate_run(problem, variants[vi], sim);
      }
    }
  };

  const int thread_count = std::max(1, std::min(jobs, n_tasks));
  if (thread_count == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }

  SweepResult result;
  result.second_axis = second_axis;
  result.cells.reserve(static_cast<std::size_t>(n_configs) * n_variants);
  for (int config_id = 0; config_id < n_configs; ++config_id) {
    for (int vi = 0; vi < n_variants; ++vi) {
      SweepCell cell;
      cell.config_id = config_id;
      cell.q1 = grid.q1_values[config_id / n_second];
      cell.second = grid.second_values[config_id % n_second];
      cell.variant = variants[vi].name;
      cell.total = grid.mc_runs;
      double ss_pos = 0.0;
      double ss_vel = 0.0;
      long total_steps = 0;
      for (int run_idx = 0; run_idx < grid.mc_runs; ++run_idx) {
        const RunRecord& rec =
            records[(static_cast<std::size_t>(config_id) * grid.mc_runs +
                     run_idx) *
                        n_variants +
                    vi];
        if (rec.diverged) {
          ++cell.diverged;
        } else {
          ss_pos += rec.ss_pos;
          ss_vel += rec.ss_vel;
          total_steps += rec.steps;
        }
      }
      if (total_steps > 0) {
        cell.pos_rmse = std::sqrt(ss_pos / static_cast<double>(total_steps));
        cell.vel_rmse = std::sqrt(ss_vel / static_cast<double>(total_steps));
      } else {
        cell.pos_rmse = std::numeric_limits<double>::quiet_NaN();
        cell.vel_rmse = std::numeric_limits<double>::quiet_NaN();
      }
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

bool config_diverged(const SweepCell& cell) {
  return 2 * cell.diverged > cell.total;
}

int diverged_config_count(const SweepResult& result,
                          const std::string& variant) {
  int count = 0;
  for (const SweepCell& cell : result.cells) {
    if (cell.variant == variant && config_diverged(cell)) {
      ++count;
    }
  }
  return count;
}

namespace {

std::string format_double(double v) {
  std::ostringstream oss;
  oss.precision(17);
  oss << v;
  return oss.str();
}

}  // namespace

std::string sweep_to_csv(const SweepResult& result) {
  std::ostringstream oss;
  oss << "config_id,q1,q2_or_sigma_sq,variant,pos_rmse,vel_rmse,diverged,total\n";
  for (const SweepCell& c : result.cells) {
    oss << c.config_id << ',' << format_double(c.q1) << ','
        << format_double(c.second) << ',' << c.variant << ','
        << format_double(c.pos_rmse) << ',' << format_double(c.vel_rmse) << ','
        << c.diverged << ',' << c.total << '\n';
  }
  return oss.str();
}

std::string sweep_to_json(const SweepResult& result) {
  nlohmann::ordered_json root;
  root["second_axis"] = result.second_axis;
  nlohmann::ordered_json configs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < result.cells.size();) {
    const int config_id = result.cells[i].config_id;
    nlohmann::ordered_json cfg;
    cfg["config_id"] = config_id;
    cfg["q1"] = result.cells[i].q1;
    cfg["q2_or_sigma_sq"] = result.cells[i].second;
    nlohmann::ordered_json vars = nlohmann::ordered_json::array();
    for (; i < result.cells.size() && result.cells[i].config_id == config_id;
         ++i) {
      const SweepCell& c = result.cells[i];
      nlohmann::ordered_json v;
      v["variant"] = c.variant;
      v["pos_rmse"] = c.pos_rmse;  // NaN serializes as null
      v["vel_rmse"] = c.vel_rmse;
      v["diverged"] = c.diverged;
      v["total"] = c.total;
      vars.push_back(std::move(v));
    }
    cfg["variants"] = std::move(vars);
    configs.push_back(std::move(cfg));
  }
  root["configs"] = std::move(configs);
  return root.dump(2) + "\n";
}

SweepResult sweep_from_json(const std::string& text) {
  const nlohmann::json root = nlohmann::json::parse(text);
  SweepResult result;
  result.second_axis = root.at("second_axis").get<std::string>();
  for (const auto& cfg : root.at("configs")) {
    for (const auto& v : cfg.at("variants")) {
      SweepCell cell;
      cell.config_id = cfg.at("config_id").get<int>();
      cell.q1 = cfg.at("q1").get<double>();
      cell.second = cfg.at("q2_or_sigma_sq").get<double>();
      cell.variant = v.at("variant").get<std::string>();
      cell.pos_rmse = v.at("pos_rmse").is_null()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : v.at("pos_rmse").get<double>();
      cell.vel_rmse = v.at("vel_rmse").is_null()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : v.at("vel_rmse").get<double>();
      cell.diverged = v.at("diverged").get<int>();
      cell.total = v.at("total").get<int>();
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

}  // namespace dif
