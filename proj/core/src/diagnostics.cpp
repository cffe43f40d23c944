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

#include "smd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smd/errors.hpp"

namespace smd {

LyapunovSpec bessel_lyapunov(double q) {
  if (!(q > 0.0)) throw ConfigError("bessel_lyapunov: q must be > 0");
  LyapunovSpec spec;
  spec.name = "bessel";
  spec.dim_p = 1;
  spec.q = q;
  spec.V = [q](const Eigen::VectorXd& z) { return z[0] + std::pow(z[0], -q); };
  spec.grad_V = [q](const Eigen::VectorXd& z) {
    return Eigen::VectorXd::Constant(1, 1.0 - q * std::pow(z[0], -q - 1.0)).eval();
  };
  spec.hess_V = [q](const Eigen::VectorXd& z) {
    return Eigen::MatrixXd::Constant(1, 1, q * (q + 1.0) * std::pow(z[0], -q - 2.0)).eval();
  };
  return spec;
}

LyapunovSpec mean_variance_lyapunov(double q) {
  if (!(q > 0.0)) throw ConfigError("mean_variance_lyapunov: q must be > 0");
  LyapunovSpec spec;
  spec.name = "mean_variance";
  spec.dim_p = 2;
  spec.q = q;
  spec.V = [q](const Eigen::VectorXd& z) {
    const double h = z[1] - z[0] * z[0];
    return 1.0 + z[1] + std::pow(h, -q);
  };
  spec.grad_V = [q](const Eigen::VectorXd& z) {
    const double h = z[1] - z[0] * z[0];
    const double hq1 = std::pow(h, -q - 1.0);
    return Eigen::Vector2d(2.0 * q * z[0] * hq1, 1.0 - q * hq1).eval();
  };
  spec.hess_V = [q](const Eigen::VectorXd& z) {
    const double h = z[1] - z[0] * z[0];
    const double hq1 = std::pow(h, -q - 1.0);
    const double hq2 = std::pow(h, -q - 2.0);
    Eigen::Matrix2d m;
    m(0, 0) = 2.0 * q * hq1 + 4.0 * q * (q + 1.0) * z[0] * z[0] * hq2;
    m(0, 1) = -2.0 * q * (q + 1.0) * z[0] * hq2;
    m(1, 0) = m(0, 1);
    m(1, 1) = q * (q + 1.0) * hq2;
    return Eigen::MatrixXd(m);
  };
  return spec;
}

LyapunovSpec quadratic_lyapunov(int p, double offset) {
  if (p < 1) throw ConfigError("quadratic_lyapunov: p must be >= 1");
  LyapunovSpec spec;
  spec.name = "quadratic";
  spec.dim_p = p;
  spec.q = 2.0;
  spec.V = [offset](const Eigen::VectorXd& z) { return offset + z.squaredNorm(); };
  spec.grad_V = [](const Eigen::VectorXd& z) { return Eigen::VectorXd(2.0 * z); };
  spec.hess_V = [p](const Eigen::VectorXd&) {
    return Eigen::MatrixXd(2.0 * Eigen::MatrixXd::Identity(p, p));
  };
  return spec;
}

double default_q(double delta) {
  if (!(delta > 2.0)) throw ConfigError("default_q: needs delta > 2");
  return (delta - 2.0) / 2.0;
}

double generator_value(const LyapunovSpec& spec, const MomentDriver& drv,
                       const Eigen::VectorXd& z) {
  if (spec.dim_p != drv.dim_p() || z.size() != spec.dim_p) {
    throw ConfigError("generator_value: dimension mismatch");
  }
  const Eigen::VectorXd a = drv.drift(z);
  const Eigen::MatrixXd s = drv.diffusion(z);
  const Eigen::MatrixXd ss = s * s.transpose();
  return a.dot(spec.grad_V(z)) + 0.5 * ss.cwiseProduct(spec.hess_V(z)).sum();
}

LyapunovReport lyapunov_report(const LyapunovSpec& spec, const MomentDriver& drv,
                               std::span<const std::vector<Eigen::VectorXd>> levels,
                               std::optional<double> C) {
  if (levels.empty()) throw ConfigError("lyapunov_report: no grid levels");
  LyapunovReport report;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const bool finest = l + 1 == levels.size();
    double sup = -std::numeric_limits<double>::infinity();
    for (const Eigen::VectorXd& z : levels[l]) {
      if (!(drv.singularity_margin(z) > 0.0)) continue;
      const double ratio = generator_value(spec, drv, z) / spec.V(z);
      if (ratio > sup || std::isnan(ratio)) {
        sup = std::isnan(ratio) ? std::numeric_limits<double>::infinity() : ratio;
        if (finest) report.argsup = z;
      }
      if (finest && C && !(ratio <= *C)) report.violations.push_back({z, ratio});
    }
    report.level_sup.push_back(sup);
  }
  report.sup_ratio = report.level_sup.back();
  if (std::isfinite(report.sup_ratio)) {
    if (report.level_sup.size() == 1) {
      report.bounded = true;
    } else {
      const double prev = report.level_sup[report.level_sup.size() - 2];
      const double scale = std::max(std::abs(report.sup_ratio), std::abs(prev));
      report.bounded = std::abs(report.sup_ratio - prev) <= 1e-2 * std::max(scale, 1e-300);
    }
  }
  return report;
}

std::vector<Eigen::VectorXd> log_grid_1d(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi >= lo) || per_decade < 1) {
    throw ConfigError("log_grid_1d: needs 0 < lo <= hi and per_decade >= 1");
  }
  const auto first = static_cast<long>(std::ceil(std::log10(lo) * per_decade - 1e-9));
  const auto last = static_cast<long>(std::floor(std::log10(hi) * per_decade + 1e-9));
  std::vector<Eigen::VectorXd> grid;
  for (long j = first; j <= last; ++j) {
    grid.push_back(Eigen::VectorXd::Constant(1, std::pow(10.0, static_cast<double>(j) / per_decade)));
  }
  return grid;
}

std::vector<std::vector<Eigen::VectorXd>> refining_log_grids_1d(double lo, double hi, int levels,
                                                                int per_decade) {
  if (levels < 1) throw ConfigError("refining_log_grids_1d: levels must be >= 1");
  std::vector<std::vector<Eigen::VectorXd>> out;
  for (int l = 0; l < levels; ++l) {
    out.push_back(log_grid_1d(lo * std::pow(10.0, -l), hi, per_decade << l));
  }
  return out;
}

std::vector<Eigen::VectorXd> mean_variance_grid(double z1_max, int z1_points, double h_lo,
                                                double h_hi, int per_decade) {
  if (z1_points < 1 || !(z1_max >= 0.0)) throw ConfigError("mean_variance_grid: bad z1 range");
  const auto hs = log_grid_1d(h_lo, h_hi, per_decade);
  std::vector<Eigen::VectorXd> grid;
  for (int i = 0; i < z1_points; ++i) {
    const double z1 =
        z1_points == 1 ? 0.0 : -z1_max + 2.0 * z1_max * i / static_cast<double>(z1_points - 1);
    for (const auto& h : hs) grid.push_back(Eigen::Vector2d(z1, z1 * z1 + h[0]));
  }
  return grid;
}

std::vector<EmpiricalMeasure> estimate_minimizers(const BaselineDynamics& dyn,
                                                  std::span<const InitSpec> inits,
                                                  double t_relax, const SimConfig& base) {
  const int d = dyn.dim();
  const Observable obs = builtin("identity_d", d);
  const MomentDriver drv = brownian(d);
  std::vector<EmpiricalMeasure> out;
  for (const InitSpec& init : inits) {
    SimConfig cfg = base;
    cfg.init = init;
    cfg.gamma = 0.0;
    cfg.t_final = t_relax;
    cfg.snapshot_stride = 0;
    cfg.record_stride = std::max<std::int64_t>(cfg.n_steps(), 1);
    const Trajectory traj = run(cfg, obs, drv, dyn);
    out.emplace_back(d, traj.final_positions);
  }
  return out;
}

TransitionStats transition_stats(const Trajectory& traj, double burn_in, double band) {
  if (traj.dim_d != 1) throw UnsupportedDimension("transition_stats: needs d = 1");
  TransitionStats stats;
  int side = 0;
  double entered = 0.0;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    if (traj.times[k] < burn_in) continue;
    const double m = traj.mean[k];
    const int now = m > band ? 1 : (m < -band ? -1 : 0);
    if (now == 0 || now == side) continue;
    if (side != 0) {
      ++stats.transitions;
      stats.dwell_times.push_back(traj.times[k] - entered);
    }
    side = now;
    entered = traj.times[k];
  }
  return stats;
}

namespace {

std::vector<double> sorted_copy(std::span<const double> xs) {
  std::vector<double> v(xs.begin(), xs.end());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

WassersteinTrack wasserstein_track(const Trajectory& traj, std::span<const EmpiricalMeasure> refs,
                                   double p) {
  if (traj.dim_d != 1) throw UnsupportedDimension("wasserstein_track: needs d = 1");
  if (traj.snapshots.empty()) {
    throw ConfigError("wasserstein_track: trajectory has no snapshots (set snapshot_stride > 0)");
  }
  std::vector<std::vector<double>> sorted_refs;
  for (const auto& r : refs) {
    if (r.dim() != 1) throw UnsupportedDimension("wasserstein_track: reference with d != 1");
    sorted_refs.push_back(sorted_copy(r.positions()));
  }
  WassersteinTrack track;
  track.distances.resize(refs.size());
  for (const Snapshot& snap : traj.snapshots) {
    track.times.push_back(snap.t);
    const auto xs = sorted_copy(snap.positions);
    for (std::size_t r = 0; r < refs.size(); ++r) {
      track.distances[r].push_back(wasserstein_1d_sorted(p, xs, sorted_refs[r]));
    }
  }
  for (const auto& dist : track.distances) {
    const auto it = std::min_element(dist.begin(), dist.end());
    track.min_distance.push_back(*it);
    track.argmin_time.push_back(track.times[static_cast<std::size_t>(it - dist.begin())]);
  }
  return track;
}

double sup_wasserstein(const Trajectory& a, const Trajectory& b, double p) {
  if (a.dim_d != 1 || b.dim_d != 1) throw UnsupportedDimension("sup_wasserstein: needs d = 1");
  if (a.snapshots.empty() || b.snapshots.empty()) {
    throw ConfigError("sup_wasserstein: both trajectories need snapshots");
  }
  double sup = 0.0;
  std::size_t j = 0;
  for (const Snapshot& sa : a.snapshots) {
    while (j < b.snapshots.size() && b.snapshots[j].t < sa.t) ++j;
    if (j == b.snapshots.size()) break;
    if (b.snapshots[j].t != sa.t) continue;
    const double w = wasserstein_1d_sorted(p, sorted_copy(sa.positions),
                                           sorted_copy(b.snapshots[j].positions));
    sup = std::max(sup, w);
  }
  return sup;
}

}  // namespace smd
