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
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "smd/measures.hpp"

namespace smd {

/// grad U or grad W evaluated at a point; writes d entries.
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

enum class InteractionKind {
  None,       // W = 0
  Quadratic,  // W(x) = kappa |x|^2 / 2, interaction term kappa (x - mean)
  General,    // arbitrary grad W, summed pairwise
};

/// Confining and interaction potentials of a granular-media drift.
struct Potentials {
  GradientFn grad_confining;  // empty means U = 0
  GradientFn grad_interaction;
  InteractionKind interaction = InteractionKind::None;
  double interaction_strength = 1.0;  // kappa, only read for Quadratic
};

/// U(x) = x^4/4 - x^2/2 and W(x) = x^2/2 in d = 1.
Potentials builtin_double_well();

/**
 * Baseline McKean-Vlasov part of the particle dynamics:
 *   b~(x, mu) = -grad U(x) - (1/N) sum_j grad W(x - x_j),   sigma~ constant.
 */
class BaselineDynamics {
 public:
  /// b~ = 0, sigma~ = 0.
  static BaselineDynamics none(int dim);
  /// Picks the O(N) path when the interaction is declared Quadratic.
  static BaselineDynamics granular_media(int dim, Potentials potentials, double sigma_tilde);
  /// General pairwise form, O(N^2) per sweep.
  static BaselineDynamics granular_media(int dim, GradientFn grad_u, GradientFn grad_w,
                                         double sigma_tilde);

  int dim() const { return dim_; }
  double diffusion() const { return sigma_tilde_; }
  bool has_drift() const;

  Eigen::VectorXd drift(std::span<const double> x, const EmpiricalMeasure& pi) const;
  void drift(std::span<const double> x, MeasureView pi, std::span<double> out) const;

  /// Drift of every particle of `pi`, particle-major into `out` (N x d).
  void drift_all(MeasureView pi, std::span<double> out) const;

 private:
  BaselineDynamics(int dim, Potentials potentials, double sigma_tilde);
  void drift_with_mean(std::span<const double> x, MeasureView pi, const double* mean,
                       std::span<double> out) const;

  int dim_;
  Potentials pot_;
  double sigma_tilde_;
};

/// Coercivity bound <b~(x, mu), x> <= -c |x|^q + C to test.
struct CoercivityBound {
  double q = 2.0;
  double c = 0.0;
  double C = 0.0;
};

struct CoercivitySample {
  Eigen::VectorXd x;
  double inner = 0.0;  // <b~(x, mu), x>
  double ratio = 0.0;  // inner / |x|^q
  bool violated = false;
};

struct CoercivityReport {
  double sup_ratio = 0.0;
  double inf_ratio = 0.0;
  bool violated = false;
  std::vector<CoercivitySample> samples;
};

/// Evaluates <b~(x, mu), x> / |x|^q at x = +-r e_j for every radius r > 0 and
/// axis j, with mu the given sample measure.
CoercivityReport coercivity_probe(const BaselineDynamics& dyn, std::span<const double> radii,
                                  const EmpiricalMeasure& sample, CoercivityBound bound);

}  // namespace smd
