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
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Dense>

namespace smd {

/**
 * Target SDE dZ = a(Z) dt + s(Z) dW for the controlled moments Z = mu(f),
 * together with a singularity margin: positive away from the singular set S,
 * tending to zero on approach, +infinity when S is empty.
 *
 * For mean_variance the margin is h(z) = z2 - z1^2 rather than the Euclidean
 * distance to the parabola S = {z2 = z1^2}. It vanishes exactly on S and is
 * monotone in the approach, which is all the explosion monitor relies on.
 */
class MomentDriver {
 public:
  using DriftFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
  using DiffusionFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using MarginFn = std::function<double(const Eigen::VectorXd&)>;

  MomentDriver(std::string name, int dim_p, DriftFn a, DiffusionFn s, MarginFn margin);

  const std::string& name() const { return name_; }
  int dim_p() const { return dim_p_; }

  /// Raise DriverSingularity when evaluated at a point with margin <= 0.
  Eigen::VectorXd drift(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd diffusion(const Eigen::VectorXd& z) const;
  double singularity_margin(const Eigen::VectorXd& z) const { return margin_(z); }

  /// Driver of the gamma-rescaled SDE: a' = gamma^2 a, s' = gamma s.
  MomentDriver scaled(double gamma) const;

 private:
  std::string name_;
  int dim_p_;
  DriftFn a_;
  DiffusionFn s_;
  MarginFn margin_;
};

inline constexpr double kNoSingularity = std::numeric_limits<double>::infinity();

/// a = 0, s = I_p, S empty.
MomentDriver brownian(int p);

/// Bessel process of dimension delta: a(z) = (delta-1)/(2z), s = 1, S = {0}.
MomentDriver bessel(double delta);

/// Mean as a Brownian motion and variance z2 - z1^2 as an independent
/// delta-Bessel process, written in the coordinates (z1, z2) = (mu(x), mu(x^2)).
MomentDriver mean_variance(double delta);

}  // namespace smd
