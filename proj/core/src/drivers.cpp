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

#include "smd/drivers.hpp"

#include <cmath>
#include <sstream>

#include "smd/errors.hpp"

namespace smd {

MomentDriver::MomentDriver(std::string name, int dim_p, DriftFn a, DiffusionFn s, MarginFn margin)
    : name_(std::move(name)),
      dim_p_(dim_p),
      a_(std::move(a)),
      s_(std::move(s)),
      margin_(std::move(margin)) {
  if (dim_p_ < 1) throw ConfigError("driver '" + name_ + "': p must be positive");
  if (!a_ || !s_ || !margin_) throw ConfigError("driver '" + name_ + "': missing callback");
}

Eigen::VectorXd MomentDriver::drift(const Eigen::VectorXd& z) const {
  if (!(margin_(z) > 0.0)) {
    std::ostringstream msg;
    msg << "driver '" << name_ << "' evaluated on its singular set at z = " << z.transpose();
    throw DriverSingularity(msg.str());
  }
  return a_(z);
}

Eigen::MatrixXd MomentDriver::diffusion(const Eigen::VectorXd& z) const {
  if (!(margin_(z) > 0.0)) {
    std::ostringstream msg;
    msg << "driver '" << name_ << "' evaluated on its singular set at z = " << z.transpose();
    throw DriverSingularity(msg.str());
  }
  return s_(z);
}

MomentDriver MomentDriver::scaled(double gamma) const {
  const double g2 = gamma * gamma;
  return {name_ + "*gamma", dim_p_, [a = a_, g2](const Eigen::VectorXd& z) { return Eigen::VectorXd(g2 * a(z)); },
          [s = s_, gamma](const Eigen::VectorXd& z) { return Eigen::MatrixXd(gamma * s(z)); },
          margin_};
}

MomentDriver brownian(int p) {
  if (p < 1) throw ConfigError("brownian driver: p must be >= 1");
  return {"brownian", p, [p](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(p).eval(); },
          [p](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(p, p).eval(); },
          [](const Eigen::VectorXd&) { return kNoSingularity; }};
}

MomentDriver bessel(double delta) {
  if (!(delta > 0.0)) throw ConfigError("bessel driver: delta must be > 0");
  return {"bessel", 1,
          [delta](const Eigen::VectorXd& z) {
            return Eigen::VectorXd::Constant(1, (delta - 1.0) / (2.0 * z[0])).eval();
          },
          [](const Eigen::VectorXd&) { return Eigen::MatrixXd::Identity(1, 1).eval(); },
          [](const Eigen::VectorXd& z) { return z[0]; }};
}

MomentDriver mean_variance(double delta) {
  if (!(delta > 0.0)) throw ConfigError("mean_variance driver: delta must be > 0");
  return {"mean_variance", 2,
          [delta](const Eigen::VectorXd& z) {
            const double h = z[1] - z[0] * z[0];
            Eigen::VectorXd a(2);
            a << 0.0, 1.0 + (delta - 1.0) / (2.0 * h);
            return a;
          },
          [](const Eigen::VectorXd& z) {
            Eigen::MatrixXd s(2, 2);
            s << 1.0, 0.0, 2.0 * z[0], 1.0;
            return s;
          },
          [](const Eigen::VectorXd& z) { return z[1] - z[0] * z[0]; }};
}

}  // namespace smd
