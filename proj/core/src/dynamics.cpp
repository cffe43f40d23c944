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

#include "smd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smd/detail/kahan.hpp"
#include "smd/errors.hpp"

namespace smd {

Potentials builtin_double_well() {
  Potentials pot;
  pot.grad_confining = [](std::span<const double> x, std::span<double> out) {
    out[0] = x[0] * x[0] * x[0] - x[0];
  };
  pot.grad_interaction = [](std::span<const double> x, std::span<double> out) { out[0] = x[0]; };
  pot.interaction = InteractionKind::Quadratic;
  pot.interaction_strength = 1.0;
  return pot;
}

BaselineDynamics::BaselineDynamics(int dim, Potentials potentials, double sigma_tilde)
    : dim_(dim), pot_(std::move(potentials)), sigma_tilde_(sigma_tilde) {
  if (dim_ < 1) throw ConfigError("dynamics: dimension must be positive");
  if (!(sigma_tilde_ >= 0.0)) throw ConfigError("dynamics: sigma_tilde must be >= 0");
  if (pot_.interaction == InteractionKind::General && !pot_.grad_interaction) {
    throw ConfigError("dynamics: general interaction requires grad W");
  }
}

BaselineDynamics BaselineDynamics::none(int dim) { return {dim, Potentials{}, 0.0}; }

BaselineDynamics BaselineDynamics::granular_media(int dim, Potentials potentials,
                                                  double sigma_tilde) {
  return {dim, std::move(potentials), sigma_tilde};
}

BaselineDynamics BaselineDynamics::granular_media(int dim, GradientFn grad_u, GradientFn grad_w,
                                                  double sigma_tilde) {
  Potentials pot;
  pot.grad_confining = std::move(grad_u);
  pot.grad_interaction = std::move(grad_w);
  pot.interaction = pot.grad_interaction ? InteractionKind::General : InteractionKind::None;
  return {dim, std::move(pot), sigma_tilde};
}

bool BaselineDynamics::has_drift() const {
  return static_cast<bool>(pot_.grad_confining) || pot_.interaction != InteractionKind::None;
}

void BaselineDynamics::drift_with_mean(std::span<const double> x, MeasureView pi,
                                       const double* mean, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (pot_.grad_confining) {
    pot_.grad_confining(x, out);
    for (double& v : out) v = -v;
  }
  switch (pot_.interaction) {
    case InteractionKind::None:
      break;
    case InteractionKind::Quadratic:
      for (int c = 0; c < dim_; ++c) out[c] -= pot_.interaction_strength * (x[c] - mean[c]);
      break;
    case InteractionKind::General: {
      const std::size_t n = pi.size();
      std::vector<detail::CompensatedSum> acc(static_cast<std::size_t>(dim_));
      std::vector<double> diff(static_cast<std::size_t>(dim_));
      std::vector<double> g(static_cast<std::size_t>(dim_));
      for (std::size_t j = 0; j < n; ++j) {
        const auto xj = pi.point(j);
        for (int c = 0; c < dim_; ++c) diff[c] = x[c] - xj[c];
        pot_.grad_interaction(diff, g);
        for (int c = 0; c < dim_; ++c) acc[c].add(g[c]);
      }
      for (int c = 0; c < dim_; ++c) out[c] -= acc[c].value() / static_cast<double>(n);
      break;
    }
  }
}

namespace {

std::vector<double> coordinate_mean(MeasureView pi) {
  const std::size_t n = pi.size();
  std::vector<detail::CompensatedSum> acc(static_cast<std::size_t>(pi.dim));
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = pi.point(i);
    for (int c = 0; c < pi.dim; ++c) acc[c].add(x[c]);
  }
  std::vector<double> mean(static_cast<std::size_t>(pi.dim));
  for (int c = 0; c < pi.dim; ++c) mean[c] = acc[c].value() / static_cast<double>(n);
  return mean;
}

}  // namespace

void BaselineDynamics::drift(std::span<const double> x, MeasureView pi,
                             std::span<double> out) const {
  std::vector<double> mean;
  if (pot_.interaction == InteractionKind::Quadratic) mean = coordinate_mean(pi);
  drift_with_mean(x, pi, mean.data(), out);
}

Eigen::VectorXd BaselineDynamics::drift(std::span<const double> x,
                                        const EmpiricalMeasure& pi) const {
  if (pi.dim() != dim_ || static_cast<int>(x.size()) != dim_) {
    throw ConfigError("dynamics: dimension mismatch");
  }
  Eigen::VectorXd out(dim_);
  drift(x, pi.view(), {out.data(), static_cast<std::size_t>(dim_)});
  return out;
}

void BaselineDynamics::drift_all(MeasureView pi, std::span<double> out) const {
  const auto n = static_cast<std::ptrdiff_t>(pi.size());
  if (!has_drift()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  std::vector<double> mean;
  if (pot_.interaction == InteractionKind::Quadratic) mean = coordinate_mean(pi);
  const auto d = static_cast<std::size_t>(dim_);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    drift_with_mean(pi.point(static_cast<std::size_t>(i)), pi, mean.data(),
                    out.subspan(static_cast<std::size_t>(i) * d, d));
  }
}

CoercivityReport coercivity_probe(const BaselineDynamics& dyn, std::span<const double> radii,
                                  const EmpiricalMeasure& sample, CoercivityBound bound) {
  if (sample.dim() != dyn.dim()) throw ConfigError("coercivity_probe: dimension mismatch");
  CoercivityReport report;
  report.sup_ratio = -std::numeric_limits<double>::infinity();
  report.inf_ratio = std::numeric_limits<double>::infinity();
  const int d = dyn.dim();
  for (double r : radii) {
    if (!(r > 0.0)) continue;
    for (int axis = 0; axis < d; ++axis) {
      for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
        x[axis] = sign * r;
        const Eigen::VectorXd b = dyn.drift({x.data(), static_cast<std::size_t>(d)}, sample);
        CoercivitySample s;
        s.inner = b.dot(x);
        s.ratio = s.inner / std::pow(r, bound.q);
        s.violated = s.inner > -bound.c * std::pow(r, bound.q) + bound.C;
        s.x = std::move(x);
        report.sup_ratio = std::max(report.sup_ratio, s.ratio);
        report.inf_ratio = std::min(report.inf_ratio, s.ratio);
        report.violated = report.violated || s.violated;
        report.samples.push_back(std::move(s));
      }
    }
  }
  return report;
}

}  // namespace smd
