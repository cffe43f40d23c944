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
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace smd {

/// f_k quadratic in x. Hessians are constant.
struct QuadraticA1 {};
/// f, grad f and every Hessian are bounded and Lipschitz.
struct BoundedA2 {};
/// Locally Lipschitz with polynomial growth of the given orders for f,
/// grad f and the Hessians respectively.
struct PolynomialA3 {
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double alpha3 = 0.0;
};

using GrowthClass = std::variant<QuadraticA1, BoundedA2, PolynomialA3>;

/// Moment order alpha of the Wasserstein space the dynamics lives in.
double alpha_of(const GrowthClass& growth);
/// Polynomial growth order of grad f.
double grad_growth_beta(const GrowthClass& growth);

namespace detail {

class ObservableModel {
 public:
  virtual ~ObservableModel() = default;
  virtual void value(std::span<const double> x, std::span<double> f) const = 0;
  virtual void jacobian(std::span<const double> x, std::span<double> jac) const = 0;
  virtual void hessian(std::span<const double> x, int k, std::span<double> hess) const = 0;
};

}  // namespace detail

/**
 * A C^2 observable f = (f_1, ..., f_p) : R^d -> R^p with its Jacobian and
 * per-component Hessians.
 *
 * Layout conventions for the span-based evaluators, which are what the
 * particle loops call:
 *   - value:    p entries
 *   - jacobian: d x p, column-major (entry (i, j) = d f_j / d x_i at i + j*d)
 *   - hessian:  d x d, column-major, for component k in [0, p)
 *
 * Immutable after construction and cheap to copy (shared model).
 */
class Observable {
 public:
  using ValueFn = std::function<void(std::span<const double>, std::span<double>)>;
  using HessianFn = std::function<void(std::span<const double>, int, std::span<double>)>;

  /// Registers a user observable. Derivatives are checked by centered finite
  /// differences at `check_points` pseudo-random points; a mismatch (or a
  /// non-constant Hessian for QuadraticA1) raises ConfigError. The growth
  /// class is trusted as declared.
  static Observable custom(std::string name, int dim_d, int dim_p, GrowthClass growth,
                           ValueFn f, ValueFn grad, HessianFn hess, int check_points = 100);

  /// Wraps an existing model without derivative validation (used by builtins).
  Observable(std::string name, int dim_d, int dim_p, GrowthClass growth,
             std::shared_ptr<const detail::ObservableModel> model);

  const std::string& name() const { return name_; }
  int dim_d() const { return dim_d_; }
  int dim_p() const { return dim_p_; }
  const GrowthClass& growth() const { return growth_; }

  void value(std::span<const double> x, std::span<double> f) const { model_->value(x, f); }
  void jacobian(std::span<const double> x, std::span<double> jac) const {
    model_->jacobian(x, jac);
  }
  void hessian(std::span<const double> x, int k, std::span<double> hess) const {
    model_->hessian(x, k, hess);
  }

  Eigen::VectorXd value(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x, int k) const;

 private:
  std::string name_;
  int dim_d_;
  int dim_p_;
  GrowthClass growth_;
  std::shared_ptr<const detail::ObservableModel> model_;
};

inline double alpha_of(const Observable& obs) { return alpha_of(obs.growth()); }
inline double grad_growth_beta(const Observable& obs) { return grad_growth_beta(obs.growth()); }

/// Builtins: "identity_d" (f(x) = x in R^dim), "second_moment_1d" (x^2),
/// "mean_and_second_1d" ((x, x^2)), "tanh_1d" (tanh x).
/// Unknown names raise ConfigError. `dim` is only read by identity_d.
Observable builtin(std::string_view name, int dim = 1);

/// Worst mixed relative errors |fd - exact| / max(1, |exact|) of the analytic
/// derivatives against centered finite differences with step
/// cbrt(eps) * max(1, |x_i|).
struct DerivativeCheck {
  double max_grad_error = 0.0;
  double max_hess_error = 0.0;
  bool hessian_constant = true;  // only meaningful for QuadraticA1
};

DerivativeCheck check_derivatives(const Observable& obs,
                                  std::span<const Eigen::VectorXd> points);

/// Finite-difference step used by check_derivatives.
double fd_step(double x);

}  // namespace smd
