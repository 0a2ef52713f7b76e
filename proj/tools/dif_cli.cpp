// Command-line front end for the filtering experiments: grid-oracle
// illustration, damping demo, the two Monte-Carlo sweeps, and the
// self-verification suites. Commands emit plot-ready CSV/JSON; outputs are
// byte-identical for identical (config, seed).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dif/config.hpp"
#include "dif/experiments.hpp"
#include "dif/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailed = 2;
constexpr int kExitIo = 3;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";
  std::int64_t seed = -1;  // -1: use config/default
  int jobs = 1;
  std::string variants;
  int mc_runs = -1;
};

dif::KeyValueConfig load_config(const CommonOpts& opts) {
  dif::KeyValueConfig cfg;
  if (!opts.config_path.empty()) {
    cfg = dif::KeyValueConfig::from_file(opts.config_path);
  }
  for (const std::string& kv : opts.overrides) {
    cfg.set(kv);
  }
  if (opts.seed >= 0) {
    cfg.set("seed", std::to_string(opts.seed));
  }
  if (opts.mc_runs > 0) {
    cfg.set("mc_runs", std::to_string(opts.mc_runs));
  }
  return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::ios_base::failure("cannot open for writing: " + path.string());
  }
  out << content;
  if (!out) {
    throw std::ios_base::failure("write failed: " + path.string());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

dif::Vector to_eigen(const std::vector<double>& v) {
  dif::Vector out(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[static_cast<int>(i)] = v[i];
  }
  return out;
}

// Covariance from a config value: n diagonal entries or n*n row-major.
dif::Matrix cov_from_config(const std::vector<double>& v, int n) {
  if (static_cast<int>(v.size()) == n) {
    return dif::Matrix(to_eigen(v).asDiagonal());
  }
  if (static_cast<int>(v.size()) == n * n) {
    dif::Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        m(i, j) = v[i * n + j];
      }
    }
    return m;
  }
  throw std::runtime_error("prior_cov must list " + std::to_string(n) +
                           " diagonal or " + std::to_string(n * n) +
                           " row-major entries");
}

std::string role_rows(int iteration, const dif::IterationRecord& rec) {
  std::ostringstream oss;
  oss << iteration << ",smoothed," << fmt(rec.belief.smoothed_prev.mean[0])
      << ',' << fmt(rec.belief.smoothed_prev.cov(0, 0)) << '\n'
      << iteration << ",predictive," << fmt(rec.belief.predictive.mean[0])
      << ',' << fmt(rec.belief.predictive.cov(0, 0)) << '\n'
      << iteration << ",posterior," << fmt(rec.belief.posterior.mean[0]) << ','
      << fmt(rec.belief.posterior.cov(0, 0)) << '\n';
  return oss.str();
}

int cmd_illustrate(const CommonOpts& opts) {
  dif::KeyValueConfig cfg = load_config(opts);
  cfg.require_known_keys({"prior_mean", "prior_cov", "y", "grid_lo", "grid_hi",
                          "grid_points", "max_iters", "gamma", "seed",
                          "mc_runs"});
  dif::experiments::IllustrationSpec spec;
  spec.prior_mean = cfg.get_double("prior_mean", spec.prior_mean);
  spec.prior_var = cfg.get_double("prior_cov", spec.prior_var);
  spec.y = cfg.get_double("y", spec.y);
  spec.grid_lo = cfg.get_double("grid_lo", spec.grid_lo);
  spec.grid_hi = cfg.get_double("grid_hi", spec.grid_hi);
  spec.grid_points = cfg.get_int("grid_points", spec.grid_points);
  spec.max_iters = cfg.get_int("max_iters", spec.max_iters);
  spec.gamma = cfg.get_double("gamma", spec.gamma);

  const auto res = dif::experiments::run_illustration(spec);

  std::ostringstream grid;
  grid << "x,true_posterior\n";
  for (int i = 0; i < res.grid.x.size(); ++i) {
    grid << fmt(res.grid.x[i]) << ',' << fmt(res.grid.density[i]) << '\n';
  }
  std::ostringstream iterates;
  iterates << "iteration,role,mean,var\n";
  for (std::size_t i = 0; i < res.trace.iterates.size(); ++i) {
    iterates << role_rows(static_cast<int>(i), res.trace.iterates[i]);
  }

  const std::filesystem::path out(opts.out_dir);
  std::filesystem::create_directories(out);
  write_file(out / "grid.csv", grid.str());
  write_file(out / "iterates.csv", iterates.str());

  std::cout << "illustrate: y = " << spec.y << "\n";
  for (std::size_t i = 0; i < res.kl_grid_to_posterior.size(); ++i) {
    std::cout << "  iteration " << i << ": KL(grid || posterior) = "
              << res.kl_grid_to_posterior[i] << "\n";
  }
  std::cout << "wrote " << (out / "grid.csv").string() << ", "
            << (out / "iterates.csv").string() << "\n";
  return kExitOk;
}

std::string path_csv(const dif::experiments::AlgPath& path) {
  std::ostringstream oss;
  oss << "iteration,x0,x1,loss\n";
  for (std::size_t i = 0; i < path.x0.size(); ++i) {
    oss << i << ',' << fmt(path.x0[i]) << ',' << fmt(path.x1[i]) << ','
        << fmt(path.loss[i]) << '\n';
  }
  return oss.str();
}

int cmd_example1d(const CommonOpts& opts) {
  dif::KeyValueConfig cfg = load_config(opts);
  cfg.require_known_keys({"true_x0", "prior_mean", "prior_cov", "y", "iters",
                          "grid_lo", "grid_hi", "grid_points", "seed",
                          "mc_runs"});
  dif::experiments::Example1dSpec spec;
  spec.true_x0 = cfg.get_double("true_x0", spec.true_x0);
  spec.prior_mean = cfg.get_double("prior_mean", spec.prior_mean);
  spec.prior_var = cfg.get_double("prior_cov", spec.prior_var);
  spec.iters = cfg.get_int("iters", spec.iters);
  spec.grid_lo = cfg.get_double("grid_lo", spec.grid_lo);
  spec.grid_hi = cfg.get_double("grid_hi", spec.grid_hi);
  spec.grid_points = cfg.get_int("grid_points", spec.grid_points);
  spec.seed = cfg.get_uint64("seed", spec.seed);
  if (cfg.has("y")) {
    spec.y_override = cfg.get_double("y", 0.0);
  }

  const auto res = dif::experiments::run_example1d(spec);

  std::ostringstream landscape;
  landscape << "x0,x1,loss\n";
  for (int i = 0; i < res.landscape.x0.size(); ++i) {
    for (int j = 0; j < res.landscape.x1.size(); ++j) {
      landscape << fmt(res.landscape.x0[i]) << ',' << fmt(res.landscape.x1[j])
                << ',' << fmt(res.landscape.loss(i, j)) << '\n';
    }
  }

  const std::filesystem::path out(opts.out_dir);
  std::filesystem::create_directories(out);
  write_file(out / "landscape.csv", landscape.str());
  write_file(out / "iterates_iekf.csv", path_csv(res.iekf));
  write_file(out / "iterates_diekf.csv", path_csv(res.diekf));
  write_file(out / "iterates_lsdiekf.csv", path_csv(res.lsdiekf));

  std::cout << "example1d: y = " << res.y << ", grid min loss = "
            << res.landscape.min_loss << " at (" << res.landscape.min_x0 << ", "
            << res.landscape.min_x1 << ")\n";
  auto report = [&](const dif::experiments::AlgPath& p) {
    std::cout << "  " << p.name << ": final iterate (" << p.x0.back() << ", "
              << p.x1.back() << "), final loss " << p.loss.back()
              << (dif::experiments::path_diverged(p, spec.grid_lo, spec.grid_hi)
                      ? "  [diverged]"
                      : "")
              << "\n";
  };
  report(res.iekf);
  report(res.diekf);
  report(res.lsdiekf);
  return kExitOk;
}

std::string baseline_of(const std::string& variant) {
  if (variant == "DIEKF" || variant == "IEKF" || variant == "LS-DIEKF") {
    return "EKF";
  }
  if (variant == "DIUKF" || variant == "IUKF" || variant == "DIPLF" ||
      variant == "IPLF" || variant == "LS-DIUKF" || variant == "LS-DIPLF") {
    return "UKF";
  }
  return "";
}

const dif::SweepCell* find_cell(const dif::SweepResult& res, int config_id,
                                const std::string& variant) {
  for (const auto& c : res.cells) {
    if (c.config_id == config_id && c.variant == variant) {
      return &c;
    }
  }
  return nullptr;
}

// Paper-style matrices: one table per (iterated, baseline) pair, iterated
// RMSE over baseline RMSE per noise configuration, '-' when diverged.
std::string sweep_summary_md(const dif::SweepResult& res,
                             const dif::SweepGrid& grid,
                             const std::vector<std::string>& variant_names,
                             const std::string& second_label) {
  std::ostringstream md;
  md << "# Sweep summary\n";
  const int n_second = static_cast<int>(grid.second_values.size());
  for (const std::string& name : variant_names) {
    const std::string base = baseline_of(name);
    if (base.empty() ||
        std::find(variant_names.begin(), variant_names.end(), base) ==
            variant_names.end()) {
      continue;
    }
    for (const char* kind : {"position", "velocity"}) {
      md << "\n## " << name << " / " << base << " " << kind << " RMSE\n\n";
      md << "| q1 \\ " << second_label << " |";
      for (double s : grid.second_values) {
        md << ' ' << s << " |";
      }
      md << "\n|---|";
      for (int j = 0; j < n_second; ++j) {
        md << "---|";
      }
      md << '\n';
      for (std::size_t i = 0; i < grid.q1_values.size(); ++i) {
        md << "| " << grid.q1_values[i] << " |";
        for (int j = 0; j < n_second; ++j) {
          const int config_id = static_cast<int>(i) * n_second + j;
          const auto* it_cell = find_cell(res, config_id, name);
          const auto* base_cell = find_cell(res, config_id, base);
          auto show = [&](const dif::SweepCell* c) -> std::string {
            if (c == nullptr || dif::config_diverged(*c)) {
              return "-";
            }
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3g",
                          std::string(kind) == "position" ? c->pos_rmse
                                                          : c->vel_rmse);
            return buf;
          };
          md << ' ' << show(it_cell) << " / " << show(base_cell) << " |";
        }
        md << '\n';
      }
    }
  }
  return md.str();
}

int cmd_track_sweep(const CommonOpts& opts) {
  dif::KeyValueConfig cfg = load_config(opts);
  cfg.require_known_keys({"T", "q2", "steps", "mc_runs", "seed", "max_iters",
                          "gamma", "q1_values", "sigma_sq_values", "x0",
                          "prior_mean", "prior_cov"});
  dif::experiments::TrackingScenario sc;
  sc.T = cfg.get_double("T", sc.T);
  sc.q2 = cfg.get_double("q2", sc.q2);
  sc.steps = cfg.get_int("steps", sc.steps);
  if (cfg.has("x0")) {
    sc.x0 = to_eigen(cfg.get_vector("x0", {}));
  }
  if (cfg.has("prior_mean")) {
    sc.prior_mean = to_eigen(cfg.get_vector("prior_mean", {}));
  }
  if (cfg.has("prior_cov")) {
    const dif::Matrix full = cov_from_config(cfg.get_vector("prior_cov", {}), 5);
    sc.prior_diag = full.diagonal();
  }

  dif::SweepGrid grid;
  grid.q1_values =
      cfg.get_vector("q1_values", {1e-3, 1e-2, 1e-1, 1.0, 10.0});
  grid.second_values =
      cfg.get_vector("sigma_sq_values", {1e-2, 1e-1, 1.0, 10.0, 1e2});
  grid.mc_runs = cfg.get_int("mc_runs", 20);

  const int max_iters = cfg.get_int("max_iters", 10);
  const double gamma = cfg.get_double("gamma", 1e-6);
  std::vector<dif::VariantSpec> variants;
  std::vector<std::string> names =
      split_list(opts.variants.empty() ? "EKF,UKF,DIEKF,DIUKF,DIPLF"
                                       : opts.variants);
  for (const auto& n : names) {
    variants.push_back(dif::make_variant_spec(n, max_iters, gamma));
  }

  const auto res = dif::run_sweep(dif::experiments::tracking_problem_factory(sc),
                                  grid, variants, cfg.get_uint64("seed", 42),
                                  "sigma_sq", opts.jobs);

  const std::filesystem::path out(opts.out_dir);
  std::filesystem::create_directories(out);
  write_file(out / "track_sweep.csv", dif::sweep_to_csv(res));
  write_file(out / "track_sweep.json", dif::sweep_to_json(res));
  write_file(out / "track_sweep_summary.md",
             sweep_summary_md(res, grid, names, "sigma_sq"));
  for (const auto& n : names) {
    std::cout << n << ": " << dif::diverged_config_count(res, n) << "/"
              << grid.q1_values.size() * grid.second_values.size()
              << " configs diverged\n";
  }
  std::cout << "wrote " << (out / "track_sweep.csv").string() << " (+ .json, _summary.md)\n";
  return kExitOk;
}

int cmd_tdoa_sweep(const CommonOpts& opts) {
  dif::KeyValueConfig cfg = load_config(opts);
  cfg.require_known_keys(
      {"T", "steps", "mc_runs", "seed", "max_iters", "gamma", "q1_values",
       "q2_values", "x0", "prior_mean", "prior_cov", "sigma_sq_1", "sigma_sq_2",
       "sigma_sq_3", "sigma_sq_4", "mic_1_x", "mic_1_y", "mic_2_x", "mic_2_y",
       "mic_3_x", "mic_3_y", "mic_4_x", "mic_4_y", "omega_mag",
       "omega_switch_every", "sim_q1", "divergence_threshold"});
  dif::experiments::TdoaScenario sc;
  sc.T = cfg.get_double("T", sc.T);
  sc.steps = cfg.get_int("steps", sc.steps);
  sc.omega_mag = cfg.get_double("omega_mag", sc.omega_mag);
  sc.omega_switch_every =
      cfg.get_int("omega_switch_every", sc.omega_switch_every);
  sc.sim_q1 = cfg.get_double("sim_q1", sc.sim_q1);
  sc.divergence_threshold =
      cfg.get_double("divergence_threshold", sc.divergence_threshold);
  for (int j = 0; j < 4; ++j) {
    const std::string tag = std::to_string(j + 1);
    sc.geometry.sigma_sq[j] =
        cfg.get_double("sigma_sq_" + tag, sc.geometry.sigma_sq[j]);
    sc.geometry.mic_positions[j][0] =
        cfg.get_double("mic_" + tag + "_x", sc.geometry.mic_positions[j][0]);
    sc.geometry.mic_positions[j][1] =
        cfg.get_double("mic_" + tag + "_y", sc.geometry.mic_positions[j][1]);
  }
  if (cfg.has("x0")) {
    sc.x0 = to_eigen(cfg.get_vector("x0", {}));
  }
  if (cfg.has("prior_mean")) {
    sc.prior_mean = to_eigen(cfg.get_vector("prior_mean", {}));
  }
  if (cfg.has("prior_cov")) {
    sc.prior_diag =
        cov_from_config(cfg.get_vector("prior_cov", {}), 5).diagonal();
  }

  dif::SweepGrid grid;
  grid.q1_values =
      cfg.get_vector("q1_values", {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0});
  grid.second_values =
      cfg.get_vector("q2_values", {1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0});
  grid.mc_runs = cfg.get_int("mc_runs", 10);

  const int max_iters = cfg.get_int("max_iters", 10);
  const double gamma = cfg.get_double("gamma", 1e-6);
  std::vector<dif::VariantSpec> variants;
  std::vector<std::string> names = split_list(
      opts.variants.empty() ? "EKF,IEKF,DIEKF,LS-DIEKF" : opts.variants);
  for (const auto& n : names) {
    variants.push_back(dif::make_variant_spec(n, max_iters, gamma));
  }

  const auto res = dif::run_sweep(dif::experiments::tdoa_problem_factory(sc),
                                  grid, variants, cfg.get_uint64("seed", 42),
                                  "q2", opts.jobs);

  const std::filesystem::path out(opts.out_dir);
  std::filesystem::create_directories(out);
  write_file(out / "tdoa_sweep.csv", dif::sweep_to_csv(res));
  write_file(out / "tdoa_sweep.json", dif::sweep_to_json(res));
  write_file(out / "tdoa_sweep_summary.md",
             sweep_summary_md(res, grid, names, "q2"));
  for (const auto& n : names) {
    std::cout << n << ": " << dif::diverged_config_count(res, n) << "/"
              << grid.q1_values.size() * grid.second_values.size()
              << " configs diverged\n";
  }
  std::cout << "wrote " << (out / "tdoa_sweep.csv").string() << " (+ .json, _summary.md)\n";
  return kExitOk;
}

int cmd_verify(const CommonOpts& opts, const std::string& inject_fault) {
  dif::KeyValueConfig cfg = load_config(opts);
  cfg.require_known_keys({"seed", "mc_runs"});
  if (inject_fault == "skip-symmetrize") {
    dif::testing::skip_symmetrize = true;
  } else if (!inject_fault.empty()) {
    std::cerr << "unknown fault: " << inject_fault
              << " (known: skip-symmetrize)\n";
    return kExitUsage;
  }
  const auto results = dif::verify::run_all(cfg.get_uint64("seed", 1));
  bool all_pass = true;
  double total = 0.0;
  std::printf("%-18s %-6s %8s  detail\n", "suite", "status", "time");
  for (const auto& r : results) {
    std::printf("%-18s %-6s %7.2fs  %s\n", r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
    all_pass = all_pass && r.pass;
    total += r.seconds;
  }
  std::printf("total %.2fs\n", total);
  if (!all_pass) {
    for (const auto& r : results) {
      if (!r.pass) {
        std::printf("first failing suite: %s\n", r.name.c_str());
        break;
      }
    }
  }
  return all_pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterated nonlinear filtering experiments"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string inject_fault;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "key = value config file");
    sub->add_option("--set", opts.overrides, "override: key=value (repeatable)");
    sub->add_option("--out", opts.out_dir, "output directory");
    sub->add_option("--seed", opts.seed, "master seed");
    sub->add_option("--jobs", opts.jobs, "worker threads for sweeps");
    sub->add_option("--variants", opts.variants, "comma-separated variant list");
    sub->add_option("--mc-runs", opts.mc_runs, "Monte-Carlo runs per config");
  };

  CLI::App* illustrate =
      app.add_subcommand("illustrate", "cubic-model step vs dense-grid posterior");
  add_common(illustrate);
  CLI::App* example1d =
      app.add_subcommand("example1d", "trig-model loss landscape and iterate paths");
  add_common(example1d);
  CLI::App* track =
      app.add_subcommand("track-sweep", "coordinated-turn tracking Monte-Carlo sweep");
  add_common(track);
  CLI::App* tdoa =
      app.add_subcommand("tdoa-sweep", "range-difference localization Monte-Carlo sweep");
  add_common(tdoa);
  CLI::App* verify =
      app.add_subcommand("verify", "run the self-verification suites");
  add_common(verify);
  verify->add_option("--inject-fault", inject_fault,
                     "verification-only fault hook")
      ->group("");  // hidden

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (illustrate->parsed()) {
      return cmd_illustrate(opts);
    }
    if (example1d->parsed()) {
      return cmd_example1d(opts);
    }
    if (track->parsed()) {
      return cmd_track_sweep(opts);
    }
    if (tdoa->parsed()) {
      return cmd_tdoa_sweep(opts);
    }
    if (verify->parsed()) {
      return cmd_verify(opts, inject_fault);
    }
  } catch (const std::ios_base::failure& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
