// Copyright 2026 The smd Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <iostream>
#include <numeric>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "output.hpp"
#include "smd/diagnostics.hpp"
#include "smd/version.hpp"

namespace smd::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void apply(const GlobalOptions& opts, ExperimentConfig& cfg) {
  if (opts.out) cfg.output.dir = *opts.out;
  if (opts.seed_common) cfg.sim.seed_common = *opts.seed_common;
  if (opts.seed_private) cfg.sim.seed_private = *opts.seed_private;
}

struct Components {
  Observable obs;
  MomentDriver drv;
  BaselineDynamics dyn;
};

Components build(const ExperimentConfig& cfg) {
  validate(cfg);
  Observable obs = make_observable(cfg.observable);
  MomentDriver drv = make_driver(cfg.driver, obs.dim_p());
  BaselineDynamics dyn = make_dynamics(cfg.dynamics, obs.dim_d());
  return {std::move(obs), std::move(drv), std::move(dyn)};
}

json explosion_json(const Trajectory& traj) {
  return {{"exploded", traj.exploded},
          {"explosion_time", traj.explosion_time ? json(*traj.explosion_time) : json(nullptr)},
          {"explosion_cause", traj.explosion_cause
                                  ? json(std::string(to_string(*traj.explosion_cause)))
                                  : json(nullptr)}};
}

// Runs one configuration and writes <dir>/<stem>.csv and <dir>/<stem>.json.
Trajectory run_and_write(const ExperimentConfig& cfg, const fs::path& dir, const std::string& stem) {
  const Components c = build(cfg);
  const Stopwatch clock;
  Trajectory traj = run(cfg.sim, c.obs, c.drv, c.dyn);
  const double wall = clock.seconds();
  ensure_directory(dir);
  write_atomic(dir / (stem + ".csv"), trajectory_csv(traj));
  write_json(dir / (stem + ".json"), trajectory_metadata(to_json(cfg), traj, wall));
  return traj;
}

std::string panel_label(double v) { return format_double(v); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<double> figure_panels(std::string_view figure) {
  if (figure == "fig1") return {1.0, 3.0};
  if (figure == "fig2") return {0.0, 1.0};
  if (figure == "fig3") return {0.0, 0.5};
  if (figure == "fig4") return {0.0, 0.4, 0.8};
  throw ConfigError("figure: unknown figure '" + std::string(figure) +
                    "' (expected fig1, fig2, fig3 or fig4)");
}

ExperimentConfig figure_config(std::string_view figure, double panel) {
  ExperimentConfig cfg;
  SimConfig& s = cfg.sim;
  s.n_particles = 1000;
  s.seed_common = 1;
  s.seed_private = 1;
  s.gamma = 1.0;
  s.eta = 0.0;
  s.dt = 1e-4;
  s.t_final = 2.0;
  s.record_stride = 10;
  s.init = GaussianInit{0.0, 1.0};
  cfg.output.name = std::string(figure);
  if (figure == "fig1") {
    cfg.observable = {"mean_and_second_1d", 1};
    cfg.driver = {"mean_variance", panel};
  } else if (figure == "fig2") {
    cfg.observable = {"second_moment_1d", 1};
    cfg.driver = {"brownian", 3.0};
    s.eta = panel;
  } else if (figure == "fig3") {
    cfg.observable = {"tanh_1d", 1};
    cfg.driver = {"brownian", 3.0};
    s.eta = panel;
  } else if (figure == "fig4") {
    cfg.observable = {"mean_and_second_1d", 1};
    cfg.driver = {"mean_variance", 3.0};
    cfg.dynamics = {"double_well", "quadratic", 1.0, 0.7};
    s.gamma = panel;
    s.gamma_mode = GammaMode::PaperLiteral;
    s.dt = 1e-3;
    s.t_final = 50.0;
    s.record_stride = 10;
    s.snapshot_stride = 500;
    s.init = GaussianInit{-1.5, 0.5};
  } else {
    figure_panels(figure);  // throws
  }
  return cfg;
}

int cmd_run(const fs::path& config, const GlobalOptions& opts) {
  ExperimentConfig cfg = load_config(config);
  apply(opts, cfg);
  const Trajectory traj = run_and_write(cfg, cfg.output.dir, cfg.output.name);
  std::cout << "run: " << traj.size() << " records, exploded=" << (traj.exploded ? "true" : "false");
  if (traj.explosion_time) {
    std::cout << " at t=" << *traj.explosion_time << " (" << to_string(*traj.explosion_cause)
              << ")";
  }
  std::cout << "\nwrote " << (fs::path(cfg.output.dir) / (cfg.output.name + ".csv")).string()
            << "\n";
  return kExitOk;
}

int cmd_reproduce(std::string_view figure, const GlobalOptions& opts) {
  const std::vector<double> panels = figure_panels(figure);
  const char* axis = figure == "fig1" ? "delta" : (figure == "fig4" ? "gamma" : "eta");
  const fs::path dir = fs::path(opts.out.value_or("smd_out")) / std::string(figure);
  const Stopwatch clock;

  json summary;
  summary["figure"] = figure;
  summary["panels"] = json::array();
  int exploded = 0;

  std::vector<EmpiricalMeasure> minimizers;
  if (figure == "fig4") {
    ExperimentConfig base = figure_config(figure, 0.0);
    apply(opts, base);
    const Components c = build(base);
    const std::vector<InitSpec> inits = {GaussianInit{-1.5, 0.5}, GaussianInit{1.5, 0.5}};
    minimizers = estimate_minimizers(c.dyn, inits, kDefaultRelaxTime, base.sim);
    json refs = json::array();
    for (const auto& m : minimizers) {
      refs.push_back({{"mean", f_moment(m, builtin("identity_d", 1))[0]}});
    }
    summary["minimizers"] = {{"t_relax", kDefaultRelaxTime}, {"references", refs}};
  }

  for (double panel : panels) {
    ExperimentConfig cfg = figure_config(figure, panel);
    apply(opts, cfg);
    cfg.output.dir = dir.string();
    const std::string stem = std::string(axis) + "_" + panel_label(panel);
    cfg.output.name = stem;
    const Trajectory traj = run_and_write(cfg, dir, stem);
    exploded += traj.exploded ? 1 : 0;

    json entry = explosion_json(traj);
    entry[axis] = panel;
    entry["csv"] = stem + ".csv";
    if (figure == "fig4") {
      const TransitionStats ts = transition_stats(traj, kFig4BurnIn);
      entry["transitions"] = ts.transitions;
      entry["dwell_times"] = ts.dwell_times;
      const WassersteinTrack track = wasserstein_track(traj, minimizers, 2.0);
      std::string csv = "t,w2_minus,w2_plus\n";
      for (std::size_t k = 0; k < track.times.size(); ++k) {
        csv += format_double(track.times[k]) + "," + format_double(track.distances[0][k]) + "," +
               format_double(track.distances[1][k]) + "\n";
      }
      write_atomic(dir / (stem + "_w2.csv"), csv);
      entry["w2_csv"] = stem + "_w2.csv";
      entry["w2_min"] = {{"minus", track.min_distance[0]}, {"plus", track.min_distance[1]}};
      entry["w2_argmin_time"] = {{"minus", track.argmin_time[0]},
                                 {"plus", track.argmin_time[1]}};
      std::cout << figure << " " << axis << "=" << panel << ": transitions=" << ts.transitions
                << "\n";
    } else {
      std::cout << figure << " " << axis << "=" << panel
                << ": exploded=" << (traj.exploded ? "true" : "false") << "\n";
    }
    summary["panels"].push_back(entry);
  }
  summary["explosion_fraction"] = static_cast<double>(exploded) / static_cast<double>(panels.size());
  summary["wall_time_s"] = clock.seconds();
  summary["library_version"] = kVersion;
  write_json(dir / "summary.json", summary);
  std::cout << "wrote " << dir.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const fs::path& config, const GlobalOptions& opts) {
  ExperimentConfig cfg = load_config(config);
  apply(opts, cfg);
  if (!cfg.sweep) throw ConfigError("sweep: required section is missing");
  const SweepSpec& sw = *cfg.sweep;
  if (sw.seed_count < 1) throw ConfigError("sweep.seeds.count: seed range is empty");
  if (!sw.delta.empty() && cfg.driver.name == "brownian") {
    throw ConfigError("sweep.delta: driver 'brownian' has no delta parameter");
  }
  const std::vector<double> deltas = sw.delta.empty() ? std::vector{cfg.driver.delta} : sw.delta;
  const std::vector<double> gammas = sw.gamma.empty() ? std::vector{cfg.sim.gamma} : sw.gamma;
  const std::vector<double> etas = sw.eta.empty() ? std::vector{cfg.sim.eta} : sw.eta;

  struct Job {
    std::uint64_t seed;
    double delta, gamma, eta;
  };
  std::vector<Job> jobs;
  for (double delta : deltas) {
    for (double gamma : gammas) {
      for (double eta : etas) {
        for (std::int64_t s = 0; s < sw.seed_count; ++s) {
          jobs.push_back({sw.seed_first + static_cast<std::uint64_t>(s), delta, gamma, eta});
        }
      }
    }
  }
  auto job_config = [&](const Job& job) {
    ExperimentConfig c = cfg;
    c.driver.delta = job.delta;
    c.sim.gamma = job.gamma;
    c.sim.eta = job.eta;
    c.sim.seed_common = job.seed;
    c.sim.seed_private = job.seed;
    return c;
  };
  for (const Job& job : jobs) {
    validate(job_config(job));
  }

  const Stopwatch clock;
  std::vector<std::string> rows(jobs.size());
  std::vector<std::string> errors(jobs.size());
  std::vector<char> exploded_flags(jobs.size(), 0);
  int p = 0;
  {
    const Components c = build(cfg);
    p = c.obs.dim_p();
  }
  const auto n_jobs = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < n_jobs; ++r) {
    const Job& job = jobs[static_cast<std::size_t>(r)];
    try {
      const ExperimentConfig jc = job_config(job);
      const Components c = build(jc);
      const Trajectory traj = run(jc.sim, c.obs, c.drv, c.dyn);
      std::string row = std::to_string(job.seed) + "," + format_double(job.gamma) + "," +
                        format_double(job.delta) + "," + format_double(job.eta) + "," +
                        (traj.exploded ? "true" : "false") + ",";
      if (traj.explosion_time) row += format_double(*traj.explosion_time);
      row += ",";
      if (traj.dim_d == 1) row += std::to_string(transition_stats(traj, sw.burn_in).transitions);
      const auto z = traj.z(traj.size() - 1);
      for (int k = 0; k < p; ++k) row += "," + format_double(z[k]);
      rows[static_cast<std::size_t>(r)] = row + "\n";
      exploded_flags[static_cast<std::size_t>(r)] = traj.exploded ? 1 : 0;
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(r)] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw Error("sweep run failed: " + e);
  }

  std::string csv = "seed,gamma,delta,eta,exploded,explosion_time,transitions";
  for (int k = 1; k <= p; ++k) csv += ",z_" + std::to_string(k);
  csv += "\n";
  for (const auto& row : rows) csv += row;
  const int exploded = static_cast<int>(std::count(exploded_flags.begin(), exploded_flags.end(), 1));
  const fs::path dir = cfg.output.dir;
  ensure_directory(dir);
  write_atomic(dir / (cfg.output.name + "_sweep.csv"), csv);
  json meta = {{"config", to_json(cfg)},
               {"runs", jobs.size()},
               {"exploded_runs", exploded},
               {"wall_time_s", clock.seconds()},
               {"library_version", kVersion}};
  write_json(dir / (cfg.output.name + "_sweep.json"), meta);
  std::cout << "sweep: " << jobs.size() << " runs, " << exploded << " exploded\nwrote "
            << (dir / (cfg.output.name + "_sweep.csv")).string() << "\n";
  return kExitOk;
}

int cmd_chaos(const fs::path& config, const GlobalOptions& opts) {
  ExperimentConfig cfg = load_config(config);
  apply(opts, cfg);
  if (!cfg.chaos) throw ConfigError("chaos: required section is missing");
  const ChaosSpec& ch = *cfg.chaos;
  if (ch.n_particles.size() < 2) {
    throw ConfigError("chaos.n_particles: need at least two particle counts to compare");
  }
  for (std::size_t i = 0; i < ch.n_particles.size(); ++i) {
    if (ch.n_particles[i] < 1) {
      throw ConfigError("chaos.n_particles[" + std::to_string(i) + "]: must be >= 1");
    }
  }
  if (ch.replicates < 1) throw ConfigError("chaos.replicates: must be >= 1");
  if (ch.snapshot_stride < 1) throw ConfigError("chaos.snapshot_stride: must be >= 1");
  if (!(ch.order >= 1.0)) throw ConfigError("chaos.p: must be >= 1");
  if (!std::holds_alternative<GaussianInit>(cfg.sim.init)) {
    throw ConfigError("chaos: sim.init must be gaussian so every N can be initialized");
  }
  const Components c = build(cfg);
  if (c.obs.dim_d() != 1) throw ConfigError("observable.dim: chaos needs d = 1");

  // Reference: the last occurrence of the largest N.
  std::size_t ref = 0;
  for (std::size_t i = 0; i < ch.n_particles.size(); ++i) {
    if (ch.n_particles[i] >= ch.n_particles[ref]) ref = i;
  }
  const Stopwatch clock;
  std::vector<std::vector<double>> sups(ch.n_particles.size());
  for (std::int64_t r = 0; r < ch.replicates; ++r) {
    std::vector<SimConfig> cfgs;
    for (std::int64_t n : ch.n_particles) {
      SimConfig s = cfg.sim;
      s.n_particles = n;
      s.seed_private = cfg.sim.seed_private + static_cast<std::uint64_t>(r);
      s.snapshot_stride = ch.snapshot_stride;
      cfgs.push_back(s);
    }
    const std::vector<Trajectory> trajs = run_coupled(cfgs, c.obs, c.drv, c.dyn);
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
      if (i != ref) sups[i].push_back(sup_wasserstein(trajs[i], trajs[ref], ch.order));
    }
  }

  std::string csv = "n,n_ref,replicates,median_sup_w,mean_sup_w\n";
  json detail = json::array();
  for (std::size_t i = 0; i < ch.n_particles.size(); ++i) {
    if (i == ref) continue;
    const double mean =
        std::accumulate(sups[i].begin(), sups[i].end(), 0.0) / static_cast<double>(sups[i].size());
    csv += std::to_string(ch.n_particles[i]) + "," + std::to_string(ch.n_particles[ref]) + "," +
           std::to_string(ch.replicates) + "," + format_double(median(sups[i])) + "," +
           format_double(mean) + "\n";
    detail.push_back({{"n", ch.n_particles[i]}, {"sup_w", sups[i]}});
  }
  const fs::path dir = cfg.output.dir;
  ensure_directory(dir);
  write_atomic(dir / (cfg.output.name + "_chaos.csv"), csv);
  write_json(dir / (cfg.output.name + "_chaos.json"),
             {{"config", to_json(cfg)},
              {"replicate_sup_w", detail},
              {"wall_time_s", clock.seconds()},
              {"library_version", kVersion}});
  std::cout << csv;
  return kExitOk;
}

int cmd_lyapunov(const fs::path& config, const GlobalOptions& opts) {
  ExperimentConfig cfg = load_config(config);
  apply(opts, cfg);
  const LyapunovOptions ly = cfg.lyapunov.value_or(LyapunovOptions{});
  const Observable obs = make_observable(cfg.observable);
  const MomentDriver drv = make_driver(cfg.driver, obs.dim_p());
  if (ly.levels < 1) throw ConfigError("lyapunov.levels: must be >= 1");
  if (ly.per_decade < 1) throw ConfigError("lyapunov.per_decade: must be >= 1");
  if (!(ly.lo > 0.0) || !(ly.hi > ly.lo)) throw ConfigError("lyapunov.lo: need 0 < lo < hi");

  std::string v = ly.v;
  if (v == "auto") v = cfg.driver.name == "brownian" ? "quadratic" : cfg.driver.name;
  double q = 2.0;
  if (v != "quadratic") {
    if (ly.q) {
      q = *ly.q;
    } else {
      try {
        q = default_q(cfg.driver.delta);
      } catch (const ConfigError&) {
        throw ConfigError("lyapunov.q: required when driver.delta <= 2");
      }
    }
  }

  LyapunovSpec spec;
  std::vector<std::vector<Eigen::VectorXd>> levels;
  if (v == "bessel") {
    spec = bessel_lyapunov(q);
    levels = refining_log_grids_1d(ly.lo, ly.hi, ly.levels, ly.per_decade);
  } else if (v == "mean_variance") {
    spec = mean_variance_lyapunov(q);
    for (int l = 0; l < ly.levels; ++l) {
      levels.push_back(mean_variance_grid(ly.z1_max, ly.z1_points, ly.lo * std::pow(10.0, -l),
                                          ly.hi, ly.per_decade << l));
    }
  } else if (v == "quadratic") {
    spec = quadratic_lyapunov(obs.dim_p());
    for (int l = 0; l < ly.levels; ++l) {
      std::vector<Eigen::VectorXd> grid{Eigen::VectorXd::Zero(obs.dim_p())};
      for (const auto& t : log_grid_1d(ly.lo * std::pow(10.0, -l), ly.hi, ly.per_decade << l)) {
        grid.push_back(Eigen::VectorXd::Constant(obs.dim_p(),
                                                 t[0] / std::sqrt(static_cast<double>(obs.dim_p()))));
      }
      levels.push_back(std::move(grid));
    }
  } else {
    throw ConfigError("lyapunov.v: unknown Lyapunov function '" + ly.v +
                      "' (expected auto, bessel, mean_variance or quadratic)");
  }
  if (spec.dim_p != drv.dim_p()) {
    throw ConfigError("lyapunov.v: '" + v + "' does not match driver '" + cfg.driver.name + "'");
  }

  const LyapunovReport report = lyapunov_report(spec, drv, levels, ly.bound);
  json out = {{"v", v},
              {"q", q},
              {"driver", cfg.driver.name},
              {"delta", cfg.driver.delta},
              {"level_sup", report.level_sup},
              {"sup_ratio", report.sup_ratio},
              {"argsup", std::vector<double>(report.argsup.data(),
                                             report.argsup.data() + report.argsup.size())},
              {"bounded", report.bounded},
              {"violations", report.violations.size()},
              {"library_version", kVersion}};
  if (ly.bound) out["C"] = *ly.bound;
  const fs::path dir = cfg.output.dir;
  ensure_directory(dir);
  write_json(dir / (cfg.output.name + "_lyapunov.json"), out);
  std::cout << "lyapunov: sup G/V = " << report.sup_ratio
            << (report.bounded ? " (bounded)" : " (unbounded under refinement)") << "\n";
  return kExitOk;
}

int run_main(int argc, char** argv) {
  CLI::App app{"Stochastic moment dynamics: particle simulation and diagnostics", "smd"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();

  std::string out;
  int threads = 0;
  std::uint64_t seed_common = 0;
  std::uint64_t seed_private = 0;
  auto* out_opt = app.add_option("--out", out, "Output directory");
  auto* threads_opt =
      app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  auto* sc_opt = app.add_option("--seed-common", seed_common, "Override sim.seed_common");
  auto* sp_opt = app.add_option("--seed-private", seed_private, "Override sim.seed_private");

  std::string config;
  std::string figure;
  auto* run_cmd = app.add_subcommand("run", "Run one simulation from a config file");
  run_cmd->add_option("config", config, "Config JSON")->required();
  auto* repro_cmd = app.add_subcommand("reproduce", "Run a bundled figure configuration");
  repro_cmd->add_option("figure", figure, "fig1, fig2, fig3 or fig4")
      ->required()
      ->check(CLI::IsMember({"fig1", "fig2", "fig3", "fig4"}));
  auto* sweep_cmd = app.add_subcommand("sweep", "Seed and parameter sweep");
  sweep_cmd->add_option("config", config, "Config JSON")->required();
  auto* chaos_cmd = app.add_subcommand("chaos", "Coupled runs over particle counts");
  chaos_cmd->add_option("config", config, "Config JSON")->required();
  auto* lyap_cmd = app.add_subcommand("lyapunov", "Lyapunov generator report");
  lyap_cmd->add_option("config", config, "Config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  GlobalOptions opts;
  if (*out_opt) opts.out = out;
  if (*threads_opt) opts.threads = threads;
  if (*sc_opt) opts.seed_common = seed_common;
  if (*sp_opt) opts.seed_private = seed_private;
#ifdef _OPENMP
  if (opts.threads) omp_set_num_threads(*opts.threads);
#endif

  try {
    if (*run_cmd) return cmd_run(config, opts);
    if (*repro_cmd) return cmd_reproduce(figure, opts);
    if (*sweep_cmd) return cmd_sweep(config, opts);
    if (*chaos_cmd) return cmd_chaos(config, opts);
    if (*lyap_cmd) return cmd_lyapunov(config, opts);
  } catch (const ConfigError& e) {
    std::cerr << "smd: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "smd: I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "smd: error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace smd::cli
