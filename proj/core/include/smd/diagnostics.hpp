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

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smd/drivers.hpp"
#include "smd/dynamics.hpp"
#include "smd/measures.hpp"
#include "smd/simulator.hpp"

namespace smd {

/// Candidate Lyapunov function V on the moment space, with derivatives.
struct LyapunovSpec {
  std::string name;
  int dim_p = 1;
  std::function<double(const Eigen::VectorXd&)> V;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad_V;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hess_V;
  double q = 1.0;
};

/// V(z) = z + z^-q on (0, inf).
LyapunovSpec bessel_lyapunov(double q);
/// V(z) = 1 + z2 + h^-q with h = z2 - z1^2.
LyapunovSpec mean_variance_lyapunov(double q);
/// V(z) = offset + |z|^2.
LyapunovSpec quadratic_lyapunov(int p, double offset = 1.0);

/// (delta - 2) / 2, the midpoint of the admissible range 0 < q < delta - 2.
/// ConfigError when delta <= 2.
double default_q(double delta);

/// a(z) . grad V(z) + 1/2 s s^T(z) : hess V(z). DriverSingularity when z is
/// on the driver's singular set.
double generator_value(const LyapunovSpec& spec, const MomentDriver& drv,
                       const Eigen::VectorXd& z);

struct LyapunovViolation {
  Eigen::VectorXd z;
  double ratio = 0.0;
};

struct LyapunovReport {
  std::vector<double> level_sup;  // sup of G/V on each refinement level
  double sup_ratio = 0.0;         // on the finest level
  Eigen::VectorXd argsup;
  std::vector<LyapunovViolation> violations;  // finest-level points with G/V > C
  bool bounded = false;
};

/// Evaluates G/V over successively refined grids (each level a superset of
/// the previous one). `bounded` holds when the finest sup is finite and
/// within 1e-2 relative of the previous level's.
LyapunovReport lyapunov_report(const LyapunovSpec& spec, const MomentDriver& drv,
                               std::span<const std::vector<Eigen::VectorXd>> levels,
                               std::optional<double> C = std::nullopt);

/// Points 10^(j / per_decade) within [lo, hi]; grids with the same
/// per_decade are nested.
std::vector<Eigen::VectorXd> log_grid_1d(double lo, double hi, int per_decade);

/// Level l covers [lo * 10^-l, hi] with per_decade * 2^l points per decade.
std::vector<std::vector<Eigen::VectorXd>> refining_log_grids_1d(double lo, double hi, int levels,
                                                                int per_decade = 20);

/// Points (z1, z1^2 + h) for z1 on a uniform grid over [-z1_max, z1_max]
/// and h on the log lattice over [h_lo, h_hi].
std::vector<Eigen::VectorXd> mean_variance_grid(double z1_max, int z1_points, double h_lo,
                                                double h_hi, int per_decade);

/// Long-run empirical measures of the gamma = 0 particle system started from
/// each init; `base` supplies N, dt, seeds and strides.
std::vector<EmpiricalMeasure> estimate_minimizers(const BaselineDynamics& dyn,
                                                  std::span<const InitSpec> inits,
                                                  double t_relax, const SimConfig& base);

inline constexpr double kDefaultRelaxTime = 20.0;
inline constexpr double kDefaultHysteresis = 0.2;

struct TransitionStats {
  int transitions = 0;
  std::vector<double> dwell_times;  // between successive basin entries
};

/// Sign changes of the recorded mean after burn_in, counted only when the
/// mean moves from beyond -band to beyond +band or back.
TransitionStats transition_stats(const Trajectory& traj, double burn_in,
                                 double band = kDefaultHysteresis);

struct WassersteinTrack {
  std::vector<double> times;
  std::vector<std::vector<double>> distances;  // [ref][snapshot]
  std::vector<double> argmin_time;             // per ref
  std::vector<double> min_distance;            // per ref
};

/// W_p from every snapshot to each reference measure. Requires d = 1 and at
/// least one snapshot.
WassersteinTrack wasserstein_track(const Trajectory& traj, std::span<const EmpiricalMeasure> refs,
                                   double p);

/// sup over shared snapshot times of W_p between two coupled runs.
double sup_wasserstein(const Trajectory& a, const Trajectory& b, double p);

}  // namespace smd
