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

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "smd/drivers.hpp"
#include "smd/measures.hpp"
#include "smd/observables.hpp"

namespace smd {

/// Guard on det(G) for the unregularized (eta = 0) construction.
inline constexpr double kDefaultDetFloor = 1e-10;

/**
 * Per-particle SMD coefficients for one empirical measure:
 * drift b_i in R^d and diffusion sigma_i in R^{d x p} (column-major).
 */
struct SmdField {
  int dim_d = 1;
  int dim_p = 1;
  std::vector<double> b;      // N x d, particle-major
  std::vector<double> sigma;  // N blocks of d x p, column-major within a block
  double det_gram = 0.0;      // det(G), without the eta shift
  Eigen::VectorXd z;          // mu(f)

  std::size_t size() const { return b.size() / static_cast<std::size_t>(dim_d); }
  Eigen::Map<const Eigen::VectorXd> drift(std::size_t i) const {
    return {b.data() + i * dim_d, dim_d};
  }
  Eigen::Map<const Eigen::MatrixXd> diffusion(std::size_t i) const {
    return {sigma.data() + i * dim_d * dim_p, dim_d, dim_p};
  }
};

/**
 * Reusable workspace for the coefficient pipeline. Splitting prepare() from
 * complete() lets the simulator inspect mu(f), G, det G and the driver margin
 * (the explosion monitor inputs) before paying for the Ito correction.
 *
 *   prepare:  z = mu(f), G = mu(grad f^T grad f), Jacobians cached per particle
 *   complete: M = (eta I + G)^{-1} s(z), B = M M^T,
 *             c_k = mu((grad f B grad f^T) : hess f_k),
 *             N = (eta I + G)^{-1} (a(z) - c / 2),
 *             sigma_i = grad f(x_i) M, b_i = grad f(x_i) N
 *
 * The factorization of eta I + G is done once and reused for M and N.
 * Per-particle work may run in parallel; every reduction is a compensated
 * sum in particle order, so results do not depend on the thread count.
 */
class FieldEngine {
 public:
  struct Moments {
    Eigen::VectorXd z;
    Eigen::MatrixXd gram;
    double det_gram = 0.0;
    double margin = 0.0;
  };

  FieldEngine(Observable obs, MomentDriver drv, double eta, double det_floor = kDefaultDetFloor);

  const Observable& observable() const { return obs_; }
  const MomentDriver& driver() const { return drv_; }
  double eta() const { return eta_; }

  /// The view must stay valid until complete() returns.
  const Moments& prepare(MeasureView pi);

  /// Throws SingularGram or DriverSingularity.
  void complete(SmdField& out);

  SmdField compute(MeasureView pi);

 private:
  Observable obs_;
  MomentDriver drv_;
  double eta_;
  double det_floor_;
  MeasureView current_;
  std::vector<double> values_;  // N x p
  std::vector<double> jac_;     // N blocks of d x p
  std::vector<double> ito_;     // N x p
  Moments moments_;
};

/// One-shot coefficient computation. Errors: eta == 0 with det(G) <= det_floor
/// or a failed factorization -> SingularGram; margin(mu(f)) <= 0 ->
/// DriverSingularity.
SmdField compute_field(const EmpiricalMeasure& pi, const Observable& obs, const MomentDriver& drv,
                       double eta, double det_floor = kDefaultDetFloor);

/// Hand-derived coefficient formulas for the one-dimensional examples, used
/// as independent oracles for compute_field.
enum class ClosedForm {
  BesselX2,      // f = x^2, bessel(delta)
  MeanVariance,  // f = (x, x^2), mean_variance(delta)
  RegX2,         // f = x^2, brownian, regularized by eta
  RegTanh,       // f = tanh, brownian, regularized by eta
};

struct ClosedFormParams {
  double delta = 3.0;
  double eta = 0.0;
};

ClosedForm parse_closed_form(std::string_view name);

/// The mean_variance diffusion is (1, (x - m) / (2 Var)).
SmdField closed_form(ClosedForm form, const EmpiricalMeasure& pi, ClosedFormParams params);

/// Lipschitz ramp equal to 1 on [0, r] and 0 on [r + 1, inf).
double ramp_inside(double r, double u);
/// Lipschitz ramp equal to 0 on [0, 1/(r + 1)] and 1 on [1/r, inf).
double ramp_away(double r, double u);

/// Product cut-off H_K(|x|) H_M(m_alpha) I_M(margin(mu(f))) I_M(det G); equals 1
/// where the coefficients are Lipschitz-controlled and 0 far outside.
double cutoff_chi(std::span<const double> x, const EmpiricalMeasure& pi, const Observable& obs,
                  const MomentDriver& drv, double K, double M);

}  // namespace smd
