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

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "smd/coefficients.hpp"
#include "smd/drivers.hpp"
#include "smd/dynamics.hpp"
#include "smd/measures.hpp"
#include "smd/observables.hpp"

namespace smd {

/**
 * How the intensity gamma enters the SMD part of the dynamics.
 *
 *   PaperLiteral: b_i and sigma_i are assembled for the unscaled driver and
 *                 then multiplied by gamma.
 *   DriverScaled: the pipeline runs on the driver a' = gamma^2 a,
 *                 s' = gamma s, so mu(f) follows the gamma-scaled SDE.
 */
enum class GammaMode { PaperLiteral, DriverScaled };

GammaMode parse_gamma_mode(std::string_view name);
std::string_view to_string(GammaMode mode);

/// Independent N(mean, std^2) coordinates for every particle.
struct GaussianInit {
  double mean = 0.0;
  double std = 1.0;
};

/// Explicit initial positions, particle-major.
struct SampleInit {
  std::vector<double> positions;
};

using InitSpec = std::variant<GaussianInit, SampleInit>;

/**
 * Stopping rule: the run ends at the first step where the pre-step measure
 * leaves {m_alpha < moment_cap} and {margin > margin_floor} and
 * {det G > det_floor}. A cap of +inf or a floor of 0 disables its clause.
 */
struct ExplosionPolicy {
  double moment_cap = 1e6;
  double margin_floor = 1e-6;
  double det_floor = 1e-6;
};

struct SimConfig {
  std::int64_t n_particles = 1000;
  double dt = 1e-4;
  double t_final = 1.0;
  std::uint64_t seed_common = 0;
  std::uint64_t seed_private = 0;
  double eta = 0.0;
  double gamma = 1.0;
  GammaMode gamma_mode = GammaMode::PaperLiteral;
  InitSpec init = GaussianInit{};
  ExplosionPolicy monitor;
  std::int64_t record_stride = 1;
  std::int64_t snapshot_stride = 0;  // 0: no snapshots

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// ceil(t_final / dt), ignoring round-off in the ratio.
  std::int64_t n_steps() const;
};

enum class ExplosionCause { MomentCap, SingularityMargin, DetFloor };

std::string_view to_string(ExplosionCause cause);

struct Snapshot {
  double t = 0.0;
  std::vector<double> positions;  // particle-major
};

/**
 * Recorded series of one run. mean/m2/var refer to the first coordinate,
 * which is the whole state for d = 1. var is computed in two passes and is
 * never negative.
 */
struct Trajectory {
  int dim_d = 1;
  int dim_p = 1;
  std::vector<double> times;
  std::vector<double> z_series;  // times.size() x p, row-major
  std::vector<double> mean;
  std::vector<double> m2;
  std::vector<double> var;
  std::vector<double> det;
  std::vector<double> margin;
  std::vector<double> malpha;
  bool exploded = false;
  std::optional<double> explosion_time;
  std::optional<ExplosionCause> explosion_cause;
  std::vector<Snapshot> snapshots;
  std::vector<double> final_positions;

  std::size_t size() const { return times.size(); }
  Eigen::Map<const Eigen::VectorXd> z(std::size_t k) const {
    return {z_series.data() + k * static_cast<std::size_t>(dim_p), dim_p};
  }
};

/// Initial particle positions for `cfg`, drawn from the seed_private stream.
EmpiricalMeasure initial_state(const SimConfig& cfg, int dim);

/**
 * One Euler-Maruyama step:
 *   X_i <- X_i + (b~(X_i, pi) + g b_i) dt + sigma~ dW_i + g sigma_i dW0
 * with g = gamma_eff. `field` may be null when g = 0. dW is N x d and may be
 * empty (no private noise). Throws NumericOverflow on a non-finite result.
 */
EmpiricalMeasure step(const EmpiricalMeasure& state, const SmdField* field,
                      const BaselineDynamics& dyn, std::span<const double> dW0,
                      std::span<const double> dW, double dt, double gamma_eff);

/// Full run with monitoring and recording. Deterministic in (cfg, seeds),
/// independent of the number of threads.
Trajectory run(const SimConfig& cfg, const Observable& obs, const MomentDriver& drv,
               const BaselineDynamics& dyn);

/// Runs that share the common noise. Configs may differ only in
/// n_particles, seed_private and snapshot_stride.
std::vector<Trajectory> run_coupled(std::span<const SimConfig> cfgs, const Observable& obs,
                                    const MomentDriver& drv, const BaselineDynamics& dyn);

}  // namespace smd
