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

#include "smd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smd/detail/kahan.hpp"
#include "smd/errors.hpp"
#include "smd/random.hpp"

namespace smd {

GammaMode parse_gamma_mode(std::string_view name) {
  if (name == "paper_literal") return GammaMode::PaperLiteral;
  if (name == "driver_scaled") return GammaMode::DriverScaled;
  throw ConfigError("unknown gamma_mode '" + std::string(name) +
                    "' (expected paper_literal or driver_scaled)");
}

std::string_view to_string(GammaMode mode) {
  return mode == GammaMode::PaperLiteral ? "paper_literal" : "driver_scaled";
}

std::string_view to_string(ExplosionCause cause) {
  switch (cause) {
    case ExplosionCause::MomentCap:
      return "MomentCap";
    case ExplosionCause::SingularityMargin:
      return "SingularityMargin";
    case ExplosionCause::DetFloor:
      return "DetFloor";
  }
  return "";
}

void SimConfig::validate() const {
  if (n_particles < 1) throw ConfigError("n_particles: must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt: must be > 0");
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ConfigError("t_final: must be > 0");
  if (dt > t_final) throw ConfigError("dt: must not exceed t_final");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("eta: must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma: must be >= 0");
  if (record_stride < 1) throw ConfigError("record_stride: must be >= 1");
  if (snapshot_stride < 0) throw ConfigError("snapshot_stride: must be >= 0");
  if (!(monitor.moment_cap > 0.0)) throw ConfigError("monitor.moment_cap: must be > 0");
  if (!(monitor.margin_floor >= 0.0)) throw ConfigError("monitor.margin_floor: must be >= 0");
  if (!(monitor.det_floor >= 0.0)) throw ConfigError("monitor.det_floor: must be >= 0");
  if (const auto* g = std::get_if<GaussianInit>(&init)) {
    if (!std::isfinite(g->mean)) throw ConfigError("init.mean: must be finite");
    if (!(g->std >= 0.0) || !std::isfinite(g->std)) throw ConfigError("init.std: must be >= 0");
  }
}

std::int64_t SimConfig::n_steps() const {
  const double ratio = t_final / dt;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio)) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::ceil(ratio));
}

EmpiricalMeasure initial_state(const SimConfig& cfg, int dim) {
  const auto n = static_cast<std::size_t>(cfg.n_particles);
  const auto d = static_cast<std::size_t>(dim);
  if (const auto* s = std::get_if<SampleInit>(&cfg.init)) {
    if (s->positions.size() != n * d) {
      throw ConfigError("init.samples: expected " + std::to_string(n * d) + " values, got " +
                        std::to_string(s->positions.size()));
    }
    return {dim, s->positions};
  }
  const auto& g = std::get<GaussianInit>(cfg.init);
  const NoiseSource noise(cfg.seed_common, cfg.seed_private);
  std::vector<double> xs(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<double> xi(xs.data() + i * d, d);
    noise.initial_normals(i, xi);
    for (double& v : xi) v = g.mean + g.std * v;
  }
  return {dim, std::move(xs)};
}

namespace {

struct StepInputs {
  int d = 1;
  int p = 1;
  const SmdField* field = nullptr;  // null: no SMD term
  const double* drift = nullptr;    // null: b~ = 0
  std::span<const double> dW0;
  std::span<const double> dW;  // empty: no private noise
  double sigma_tilde = 0.0;
  double dt = 0.0;
  double gamma_eff = 0.0;
};

// Writes the Euler update into `next`. Returns false on a non-finite entry.
bool advance(std::span<const double> cur, std::span<double> next, const StepInputs& in) {
  const std::size_t d = static_cast<std::size_t>(in.d);
  const std::size_t dp = d * static_cast<std::size_t>(in.p);
  const auto n = static_cast<std::ptrdiff_t>(cur.size() / d);
  const bool smd = in.field != nullptr && in.gamma_eff != 0.0;
  const bool priv = !in.dW.empty() && in.sigma_tilde != 0.0;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * d;
    for (std::size_t c = 0; c < d; ++c) {
      double v = cur[base + c];
      if (in.drift != nullptr) v += in.drift[base + c] * in.dt;
      if (smd) {
        const double* sig = in.field->sigma.data() + static_cast<std::size_t>(i) * dp;
        double noise = 0.0;
        for (int t = 0; t < in.p; ++t) noise += sig[c + static_cast<std::size_t>(t) * d] * in.dW0[t];
        v += in.gamma_eff * (in.field->b[base + c] * in.dt + noise);
      }
      if (priv) v += in.sigma_tilde * in.dW[base + c];
      next[base + c] = v;
    }
  }
  return std::all_of(next.begin(), next.end(), [](double v) { return std::isfinite(v); });
}

struct Sample {
  Eigen::VectorXd z;
  double det = 0.0;
  double margin = 0.0;
  double malpha = 0.0;
};

void record(Trajectory& traj, double t, MeasureView view, const Sample& s) {
  traj.times.push_back(t);
  for (int k = 0; k < traj.dim_p; ++k) traj.z_series.push_back(s.z[k]);
  const std::size_t n = view.size();
  detail::CompensatedSum sum;
  detail::CompensatedSum sq;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = view.point(i)[0];
    sum.add(x);
    sq.add(x * x);
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double mean = sum.value() * inv_n;
  detail::CompensatedSum dev;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = view.point(i)[0] - mean;
    dev.add(r * r);
  }
  traj.mean.push_back(mean);
  traj.m2.push_back(sq.value() * inv_n);
  traj.var.push_back(dev.value() * inv_n);
  traj.det.push_back(s.det);
  traj.margin.push_back(s.margin);
  traj.malpha.push_back(s.malpha);
}

}  // namespace

EmpiricalMeasure step(const EmpiricalMeasure& state, const SmdField* field,
                      const BaselineDynamics& dyn, std::span<const double> dW0,
                      std::span<const double> dW, double dt, double gamma_eff) {
  const int d = state.dim();
  const std::size_t total = state.positions().size();
  if (dyn.dim() != d) throw ConfigError("step: dynamics dimension does not match the state");
  if (field != nullptr && gamma_eff != 0.0) {
    if (field->dim_d != d || field->b.size() != total ||
        dW0.size() != static_cast<std::size_t>(field->dim_p)) {
      throw ConfigError("step: field or common increment has the wrong shape");
    }
  }
  if (!dW.empty() && dW.size() != total) throw ConfigError("step: dW has the wrong shape");

  std::vector<double> drift;
  if (dyn.has_drift()) {
    drift.resize(total);
    dyn.drift_all(state.view(), drift);
  }
  StepInputs in;
  in.d = d;
  in.p = field != nullptr ? field->dim_p : 0;
  in.field = field;
  in.drift = drift.empty() ? nullptr : drift.data();
  in.dW0 = dW0;
  in.dW = dW;
  in.sigma_tilde = dyn.diffusion();
  in.dt = dt;
  in.gamma_eff = gamma_eff;
  std::vector<double> next(total);
  if (!advance(state.positions(), next, in)) {
    throw NumericOverflow("step: particle update is not finite");
  }
  return {d, std::move(next)};
}

Trajectory run(const SimConfig& cfg, const Observable& obs, const MomentDriver& drv,
               const BaselineDynamics& dyn) {
  cfg.validate();
  const int d = obs.dim_d();
  const int p = obs.dim_p();
  if (dyn.dim() != d) {
    throw ConfigError("dynamics dimension " + std::to_string(dyn.dim()) +
                      " does not match observable dimension " + std::to_string(d));
  }
  if (drv.dim_p() != p) throw ConfigError("driver and observable disagree on p");

  const bool smd_active = cfg.gamma > 0.0;
  const bool scaled = smd_active && cfg.gamma_mode == GammaMode::DriverScaled;
  const double gamma_eff = scaled ? 1.0 : cfg.gamma;
  FieldEngine engine(obs, scaled ? drv.scaled(cfg.gamma) : drv, cfg.eta);
  const double alpha = alpha_of(obs);
  const NoiseSource noise(cfg.seed_common, cfg.seed_private);

  // Singular clauses apply only for gamma > 0, the det clause only at eta = 0.
  const bool check_margin = smd_active;
  const bool check_det = smd_active && cfg.eta == 0.0;

  std::vector<double> cur = initial_state(cfg, d).positions();
  std::vector<double> next(cur.size());
  const auto n = static_cast<std::ptrdiff_t>(cfg.n_particles);
  const auto du = static_cast<std::size_t>(d);
  const bool priv = dyn.diffusion() > 0.0;
  std::vector<double> dW(priv ? cur.size() : 0);
  std::vector<double> dW0(static_cast<std::size_t>(p));
  std::vector<double> drift(dyn.has_drift() ? cur.size() : 0);
  SmdField field;

  Trajectory traj;
  traj.dim_d = d;
  traj.dim_p = p;
  const std::int64_t steps = cfg.n_steps();
  auto time_at = [&](std::int64_t k) {
    return k >= steps ? cfg.t_final : static_cast<double>(k) * cfg.dt;
  };

  for (std::int64_t k = 0;; ++k) {
    const MeasureView view{d, cur};
    const double t = time_at(k);
    const bool record_now = k % cfg.record_stride == 0 || k == steps;

    Sample s;
    s.malpha = poly_moment(view, alpha);
    const bool need_moments = smd_active || record_now;
    if (need_moments) {
      const auto& m = engine.prepare(view);
      s.z = m.z;
      s.det = m.det_gram;
      s.margin = m.margin;
    }

    std::optional<ExplosionCause> cause;
    if (!(s.malpha < cfg.monitor.moment_cap)) {
      cause = ExplosionCause::MomentCap;
    } else if (check_margin && !(s.margin > cfg.monitor.margin_floor)) {
      cause = ExplosionCause::SingularityMargin;
    } else if (check_det && !(s.det > cfg.monitor.det_floor)) {
      cause = ExplosionCause::DetFloor;
    }

    if (!cause && k < steps && smd_active) {
      try {
        engine.complete(field);
      } catch (const SingularGram&) {
        cause = ExplosionCause::DetFloor;
      } catch (const DriverSingularity&) {
        cause = ExplosionCause::SingularityMargin;
      }
    }

    bool advanced = false;
    if (!cause && k < steps) {
      const double h = time_at(k + 1) - t;
      const double sqrt_h = std::sqrt(h);
      if (smd_active) {
        noise.common_normals(static_cast<std::uint64_t>(k), dW0);
        for (double& v : dW0) v *= sqrt_h;
      }
      if (priv) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
          const std::span<double> dwi(dW.data() + static_cast<std::size_t>(i) * du, du);
          noise.private_normals(static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(i), dwi);
          for (double& v : dwi) v *= sqrt_h;
        }
      }
      if (!drift.empty()) dyn.drift_all(view, drift);
      StepInputs in;
      in.d = d;
      in.p = p;
      in.field = smd_active ? &field : nullptr;
      in.drift = drift.empty() ? nullptr : drift.data();
      in.dW0 = dW0;
      in.dW = dW;
      in.sigma_tilde = dyn.diffusion();
      in.dt = h;
      in.gamma_eff = gamma_eff;
      if (advance(cur, next, in)) {
        advanced = true;
      } else {
        cause = ExplosionCause::MomentCap;
      }
    }

    if (record_now || cause) {
      if (!need_moments) {
        const auto& m = engine.prepare(view);
        s.z = m.z;
        s.det = m.det_gram;
        s.margin = m.margin;
      }
      record(traj, t, view, s);
    }
    const bool last = cause.has_value() || k == steps;
    if (cfg.snapshot_stride > 0 && (k % cfg.snapshot_stride == 0 || last)) {
      traj.snapshots.push_back({t, cur});
    }
    if (cause) {
      traj.exploded = true;
      traj.explosion_time = t;
      traj.explosion_cause = cause;
    }
    if (last) break;
    if (advanced) cur.swap(next);
  }
  traj.final_positions = std::move(cur);
  return traj;
}

std::vector<Trajectory> run_coupled(std::span<const SimConfig> cfgs, const Observable& obs,
                                    const MomentDriver& drv, const BaselineDynamics& dyn) {
  if (cfgs.empty()) throw ConfigError("run_coupled: no configurations");
  const SimConfig& ref = cfgs.front();
  auto same_init = [](const InitSpec& a, const InitSpec& b) {
    if (a.index() != b.index()) return false;
    if (const auto* ga = std::get_if<GaussianInit>(&a)) {
      const auto& gb = std::get<GaussianInit>(b);
      return ga->mean == gb.mean && ga->std == gb.std;
    }
    return std::get<SampleInit>(a).positions == std::get<SampleInit>(b).positions;
  };
  for (std::size_t r = 1; r < cfgs.size(); ++r) {
    const SimConfig& c = cfgs[r];
    const bool same = c.dt == ref.dt && c.t_final == ref.t_final &&
                      c.seed_common == ref.seed_common && c.eta == ref.eta &&
                      c.gamma == ref.gamma && c.gamma_mode == ref.gamma_mode &&
                      c.monitor.moment_cap == ref.monitor.moment_cap &&
                      c.monitor.margin_floor == ref.monitor.margin_floor &&
                      c.monitor.det_floor == ref.monitor.det_floor &&
                      c.record_stride == ref.record_stride &&
                      (std::holds_alternative<GaussianInit>(c.init) ||
                       c.n_particles == ref.n_particles) &&
                      same_init(c.init, ref.init);
    if (!same) {
      throw ConfigError("run_coupled: configuration " + std::to_string(r) +
                        " differs from the first in more than n_particles, seed_private and "
                        "snapshot settings");
    }
  }
  std::vector<Trajectory> out;
  out.reserve(cfgs.size());
  for (const SimConfig& c : cfgs) out.push_back(run(c, obs, drv, dyn));
  return out;
}

}  // namespace smd
