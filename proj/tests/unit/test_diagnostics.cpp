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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "smd/diagnostics.hpp"
#include "smd/errors.hpp"
#include "test_support.hpp"

namespace smd {
namespace {

using Eigen::Vector2d;
using Eigen::VectorXd;
using testing::rel_err;

VectorXd scalar(double z) { return VectorXd::Constant(1, z); }

double bessel_generator(double delta, double q, double z) {
  return (delta - 1.0) / (2.0 * z) + q * (q + 2.0 - delta) / (2.0 * std::pow(z, q + 2.0));
}

double mean_variance_generator(double delta, double q, double h) {
  return 1.0 + (delta - 1.0) / (2.0 * h) + 0.5 * q * (2.0 + q - delta) / std::pow(h, q + 2.0);
}

TEST(Generator, BesselExample) {
  EXPECT_NEAR(generator_value(bessel_lyapunov(0.5), bessel(3.0), scalar(1.0)), 0.875, 1e-14);
}

TEST(Generator, MeanVarianceExample) {
  EXPECT_NEAR(generator_value(mean_variance_lyapunov(0.5), mean_variance(3.0), Vector2d(0.0, 1.0)),
              1.875, 1e-14);
}

TEST(Generator, BrownianQuadraticIsTrace) {
  for (int p : {1, 2, 3}) {
    const VectorXd z = VectorXd::LinSpaced(p, -1.0, 2.0);
    EXPECT_NEAR(generator_value(quadratic_lyapunov(p), brownian(p), z), p, 1e-14);
  }
}

TEST(Generator, BesselMatchesClosedFormOnLogGrid) {
  for (double delta : {1.5, 3.0, 4.5}) {
    for (double q : {0.25, 0.5, 1.0}) {
      for (const VectorXd& z : log_grid_1d(1e-3, 1e3, 20)) {
        // q + 2 = delta cancels two z^-(q+2) terms; scale by their size.
        const double want = bessel_generator(delta, q, z[0]);
        const double scale = 0.5 * q * (q + 1.0) / std::pow(z[0], q + 2.0);
        EXPECT_LE(rel_err(generator_value(bessel_lyapunov(q), bessel(delta), z), want, scale), 1e-10)
            << "delta " << delta << " q " << q << " z " << z[0];
      }
    }
  }
}

TEST(Generator, MeanVarianceMatchesClosedFormOnGrid) {
  for (double delta : {2.5, 3.0, 5.0}) {
    for (double q : {0.25, 0.5}) {
      for (const VectorXd& z : mean_variance_grid(2.0, 9, 1e-3, 1e2, 10)) {
        const double h = z[1] - z[0] * z[0];
        const double want = mean_variance_generator(delta, q, h);
        const double got = generator_value(mean_variance_lyapunov(q), mean_variance(delta), z);
        EXPECT_LE(rel_err(got, want), 1e-10) << "z " << z.transpose();
      }
    }
  }
}

TEST(Generator, SingularPointThrows) {
  EXPECT_THROW(generator_value(bessel_lyapunov(0.5), bessel(3.0), scalar(0.0)), DriverSingularity);
  EXPECT_THROW(generator_value(mean_variance_lyapunov(0.5), mean_variance(3.0), Vector2d(1.0, 1.0)),
               DriverSingularity);
}

TEST(LyapunovSpec, DerivativesMatchFiniteDifferences) {
  const std::vector<std::pair<LyapunovSpec, VectorXd>> cases = {
      {bessel_lyapunov(0.5), scalar(0.7)},
      {bessel_lyapunov(1.3), scalar(3.0)},
      {mean_variance_lyapunov(0.5), Vector2d(0.3, 1.2)},
      {mean_variance_lyapunov(0.8), Vector2d(-1.1, 1.5)},
      {quadratic_lyapunov(2), Vector2d(0.4, -2.0)},
  };
  for (const auto& [spec, z] : cases) {
    const auto p = z.size();
    const VectorXd g = spec.grad_V(z);
    const Eigen::MatrixXd hs = spec.hess_V(z);
    for (Eigen::Index i = 0; i < p; ++i) {
      const double h = 1e-5 * std::max(1.0, std::abs(z[i]));
      VectorXd up = z, dn = z;
      up[i] += h;
      dn[i] -= h;
      const double fd = (spec.V(up) - spec.V(dn)) / (2 * h);
      EXPECT_LE(std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])), 1e-6) << spec.name;
      const VectorXd gd = (spec.grad_V(up) - spec.grad_V(dn)) / (2 * h);
      for (Eigen::Index j = 0; j < p; ++j) {
        EXPECT_LE(std::abs(gd[j] - hs(j, i)) / std::max(1.0, std::abs(hs(j, i))), 1e-6)
            << spec.name;
      }
    }
  }
}

TEST(LyapunovSpec, DefaultExponent) {
  EXPECT_DOUBLE_EQ(default_q(3.0), 0.5);
  EXPECT_THROW(default_q(2.0), ConfigError);
}

TEST(LyapunovReport, BesselThreeIsBounded) {
  const auto levels = refining_log_grids_1d(1e-3, 1e3, 3);
  const LyapunovReport rep = lyapunov_report(bessel_lyapunov(0.5), bessel(3.0), levels, 1.0);
  EXPECT_TRUE(rep.bounded);
  EXPECT_TRUE(std::isfinite(rep.sup_ratio));
  EXPECT_EQ(rep.level_sup.size(), 3u);
  EXPECT_TRUE(rep.violations.empty());
}

TEST(LyapunovReport, BesselOneAndAHalfDiverges) {
  const auto levels = refining_log_grids_1d(1e-3, 1e3, 3);
  const LyapunovReport rep = lyapunov_report(bessel_lyapunov(1.0), bessel(1.5), levels);
  EXPECT_FALSE(rep.bounded);
  EXPECT_GT(rep.level_sup[2], 10.0 * rep.level_sup[1]);
  EXPECT_LT(rep.argsup[0], 2e-5);
}

TEST(LyapunovReport, BrownianQuadraticPeaksAtOrigin) {
  const std::vector<std::vector<VectorXd>> levels = {{scalar(0.0), scalar(1.0)},
                                                     {scalar(0.0), scalar(0.5), scalar(1.0)}};
  const LyapunovReport rep = lyapunov_report(quadratic_lyapunov(1), brownian(1), levels, 0.5);
  EXPECT_DOUBLE_EQ(rep.sup_ratio, 1.0);
  EXPECT_TRUE(rep.bounded);
  EXPECT_EQ(rep.violations.size(), 2u);  // 1 at z=0 and 0.8 at z=0.5
}

TEST(Grids, LogGridIsNested) {
  const auto coarse = log_grid_1d(1e-2, 1e2, 5);
  const auto fine = log_grid_1d(1e-2, 1e2, 10);
  EXPECT_EQ(coarse.size(), 21u);
  EXPECT_EQ(fine.size(), 41u);
  for (std::size_t i = 0; i < coarse.size(); ++i) EXPECT_EQ(coarse[i][0], fine[2 * i][0]);
  EXPECT_DOUBLE_EQ(coarse.front()[0], 1e-2);
  EXPECT_DOUBLE_EQ(coarse.back()[0], 1e2);
  EXPECT_THROW(log_grid_1d(0.0, 1.0, 5), ConfigError);
}

TEST(Grids, MeanVarianceGridAvoidsParabola) {
  for (const VectorXd& z : mean_variance_grid(2.0, 5, 1e-3, 1.0, 3)) {
    EXPECT_GT(z[1] - z[0] * z[0], 0.0);
  }
}

Trajectory mean_series(std::vector<double> means, double dt = 1.0) {
  Trajectory traj;
  for (std::size_t k = 0; k < means.size(); ++k) traj.times.push_back(dt * static_cast<double>(k));
  traj.mean = std::move(means);
  return traj;
}

TEST(Transitions, ConstantSign) {
  EXPECT_EQ(transition_stats(mean_series({-1, -0.5, -2, -1}), 0.0).transitions, 0);
}

TEST(Transitions, SingleCrossing) {
  const TransitionStats s = transition_stats(mean_series({-1, -1, -1, 1, 1, 1}), 0.0);
  EXPECT_EQ(s.transitions, 1);
  ASSERT_EQ(s.dwell_times.size(), 1u);
  EXPECT_DOUBLE_EQ(s.dwell_times[0], 3.0);
}

TEST(Transitions, HysteresisSuppressesChatter) {
  EXPECT_EQ(transition_stats(mean_series({0.1, -0.1, 0.1, -0.1, 0.05, -0.05}), 0.0).transitions, 0);
  EXPECT_EQ(transition_stats(mean_series({-1, 0.1, -0.1, 0.15, -1, 1}), 0.0).transitions, 1);
}

TEST(Transitions, BurnInSkipsEarlySamples) {
  EXPECT_EQ(transition_stats(mean_series({1, -1, -1, 1, 1}), 2.0).transitions, 1);
  EXPECT_EQ(transition_stats(mean_series({1, -1, -1, -1}), 2.0).transitions, 0);
}

Trajectory with_snapshots(std::vector<std::vector<double>> snaps) {
  Trajectory traj;
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    traj.snapshots.push_back({0.5 * static_cast<double>(k), std::move(snaps[k])});
  }
  return traj;
}

TEST(WassersteinTrack, DiracReferences) {
  const std::vector<EmpiricalMeasure> refs = {EmpiricalMeasure::from_1d({-1.0}),
                                              EmpiricalMeasure::from_1d({1.0})};
  const Trajectory traj = with_snapshots({{0.0, 0.0}, {1.0, 1.0}});
  const WassersteinTrack track = wasserstein_track(traj, refs, 2.0);
  ASSERT_EQ(track.times.size(), 2u);
  EXPECT_DOUBLE_EQ(track.distances[0][0], 1.0);
  EXPECT_DOUBLE_EQ(track.distances[1][0], 1.0);
  EXPECT_DOUBLE_EQ(track.distances[1][1], 0.0);
  EXPECT_DOUBLE_EQ(track.distances[0][1], 2.0);
  EXPECT_DOUBLE_EQ(track.min_distance[1], 0.0);
  EXPECT_DOUBLE_EQ(track.argmin_time[1], 0.5);

  const std::vector<EmpiricalMeasure> swapped = {refs[1], refs[0]};
  const WassersteinTrack back = wasserstein_track(traj, swapped, 2.0);
  EXPECT_EQ(back.distances[0], track.distances[1]);
  EXPECT_EQ(back.distances[1], track.distances[0]);
}

TEST(WassersteinTrack, MissingSnapshotsThrow) {
  const std::vector<EmpiricalMeasure> refs = {EmpiricalMeasure::from_1d({0.0})};
  EXPECT_THROW(wasserstein_track(Trajectory{}, refs, 2.0), ConfigError);
}

TEST(SupWasserstein, SharedTimesOnly) {
  Trajectory a = with_snapshots({{0.0}, {1.0}, {2.0}});
  Trajectory b = with_snapshots({{0.0, 0.0}, {1.0, 1.5}});
  EXPECT_DOUBLE_EQ(sup_wasserstein(a, b, 1.0), 0.25);
  EXPECT_EQ(sup_wasserstein(a, a, 2.0), 0.0);
}

SimConfig relax_config() {
  SimConfig cfg;
  cfg.n_particles = 500;
  cfg.dt = 1e-2;
  cfg.seed_common = 1;
  cfg.seed_private = 1;
  return cfg;
}

TEST(Minimizers, SymmetricWells) {
  const BaselineDynamics dyn = BaselineDynamics::granular_media(1, builtin_double_well(), 0.7);
  const std::vector<InitSpec> inits = {GaussianInit{-1.5, 0.5}, GaussianInit{1.5, 0.5}};
  const auto refs = estimate_minimizers(dyn, inits, kDefaultRelaxTime, relax_config());
  ASSERT_EQ(refs.size(), 2u);
  auto mean = [](const EmpiricalMeasure& m) {
    double s = 0;
    for (double x : m.positions()) s += x;
    return s / static_cast<double>(m.size());
  };
  EXPECT_LT(mean(refs[0]), -0.5);
  EXPECT_GT(mean(refs[1]), 0.5);
  EXPECT_NEAR(mean(refs[0]), -mean(refs[1]), 0.05);

  const auto again = estimate_minimizers(dyn, inits, kDefaultRelaxTime, relax_config());
  EXPECT_EQ(again[0].positions(), refs[0].positions());
}

TEST(Minimizers, DeterministicCollapseToRightWell) {
  const BaselineDynamics dyn = BaselineDynamics::granular_media(1, builtin_double_well(), 0.0);
  const std::vector<InitSpec> inits = {GaussianInit{2.0, 0.0}};
  const auto refs = estimate_minimizers(dyn, inits, kDefaultRelaxTime, relax_config());
  for (double x : refs[0].positions()) EXPECT_NEAR(x, 1.0, 0.05);
}

}  // namespace
}  // namespace smd
