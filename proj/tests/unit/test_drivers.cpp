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

#include <gtest/gtest.h>

#include "smd/drivers.hpp"
#include "smd/errors.hpp"

namespace smd {
namespace {

Eigen::VectorXd z1(double v) { return Eigen::VectorXd::Constant(1, v); }

TEST(Brownian, ZeroDriftIdentityDiffusion) {
  const MomentDriver d1 = brownian(1);
  EXPECT_EQ(d1.drift(z1(7))[0], 0.0);
  EXPECT_EQ(d1.diffusion(z1(7))(0, 0), 1.0);
  const MomentDriver d2 = brownian(2);
  EXPECT_TRUE(d2.diffusion(Eigen::Vector2d(-3, 5)).isIdentity());
  EXPECT_TRUE(std::isinf(d2.singularity_margin(Eigen::Vector2d(0, 0))));
}

TEST(Bessel, Examples) {
  EXPECT_DOUBLE_EQ(bessel(3).drift(z1(4))[0], 0.25);
  EXPECT_EQ(bessel(2.5).diffusion(z1(1))(0, 0), 1.0);
  EXPECT_EQ(bessel(1).drift(z1(0.3))[0], 0.0);
  EXPECT_EQ(bessel(3).singularity_margin(z1(0.7)), 0.7);
}

TEST(Bessel, SingularAtOrBelowZero) {
  EXPECT_THROW(bessel(3).drift(z1(0)), DriverSingularity);
  EXPECT_THROW(bessel(3).diffusion(z1(-1)), DriverSingularity);
  EXPECT_THROW(bessel(0), ConfigError);
}

TEST(Bessel, DriftTimesMarginBounded) {
  for (double z = 1.0; z > 1e-12; z /= 3.0) {
    EXPECT_NEAR(bessel(2.2).drift(z1(z))[0] * z, 0.6, 1e-12);
  }
}

TEST(MeanVariance, Examples) {
  const MomentDriver d = mean_variance(3);
  const Eigen::VectorXd a = d.drift(Eigen::Vector2d(0, 1));
  EXPECT_EQ(a[0], 0.0);
  EXPECT_DOUBLE_EQ(a[1], 2.0);
  EXPECT_TRUE(d.diffusion(Eigen::Vector2d(0, 1)).isIdentity());
  const Eigen::MatrixXd s = mean_variance(1.7).diffusion(Eigen::Vector2d(1, 2));
  EXPECT_EQ(s(0, 0), 1.0);
  EXPECT_EQ(s(0, 1), 0.0);
  EXPECT_EQ(s(1, 0), 2.0);
  EXPECT_EQ(s(1, 1), 1.0);
  EXPECT_EQ(d.singularity_margin(Eigen::Vector2d(1, 1)), 0.0);
  EXPECT_THROW(d.drift(Eigen::Vector2d(1, 1)), DriverSingularity);
  EXPECT_THROW(d.diffusion(Eigen::Vector2d(2, 1)), DriverSingularity);
}

TEST(MeanVariance, DiffusionDependsOnlyOnMean) {
  const MomentDriver d = mean_variance(3);
  for (double z2 : {1.5, 4.0, 100.0}) {
    EXPECT_TRUE(d.diffusion(Eigen::Vector2d(0.5, z2)).isApprox(d.diffusion(Eigen::Vector2d(0.5, 1.0))));
  }
}

TEST(MeanVariance, DriftTimesMarginBounded) {
  const MomentDriver d = mean_variance(4);
  for (double h = 1.0; h > 1e-12; h /= 5.0) {
    const Eigen::Vector2d z(0.3, 0.09 + h);
    EXPECT_LE(std::abs(d.drift(z)[1] * d.singularity_margin(z)), 1.5 + h + 1e-9);
  }
}

TEST(Scaled, MultipliesDriftByGammaSquaredAndDiffusionByGamma) {
  const MomentDriver d = mean_variance(3).scaled(0.5);
  const Eigen::Vector2d z(1, 3);
  EXPECT_DOUBLE_EQ(d.drift(z)[1], 0.25 * mean_variance(3).drift(z)[1]);
  EXPECT_TRUE(d.diffusion(z).isApprox(0.5 * mean_variance(3).diffusion(z)));
  EXPECT_EQ(d.singularity_margin(z), 2.0);
}

}  // namespace
}  // namespace smd
