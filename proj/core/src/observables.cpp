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

#include "smd/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "smd/errors.hpp"

namespace smd {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

class IdentityModel final : public detail::ObservableModel {
 public:
  explicit IdentityModel(int d) : d_(d) {}
  void value(std::span<const double> x, std::span<double> f) const override {
    std::copy(x.begin(), x.end(), f.begin());
  }
  void jacobian(std::span<const double>, std::span<double> jac) const override {
    std::fill(jac.begin(), jac.end(), 0.0);
    for (int i = 0; i < d_; ++i) jac[i + i * d_] = 1.0;
  }
  void hessian(std::span<const double>, int, std::span<double> hess) const override {
    std::fill(hess.begin(), hess.end(), 0.0);
  }

 private:
  int d_;
};

class SecondMomentModel final : public detail::ObservableModel {
 public:
  void value(std::span<const double> x, std::span<double> f) const override { f[0] = x[0] * x[0]; }
  void jacobian(std::span<const double> x, std::span<double> jac) const override {
    jac[0] = 2.0 * x[0];
  }
  void hessian(std::span<const double>, int, std::span<double> hess) const override {
    hess[0] = 2.0;
  }
};

class MeanAndSecondModel final : public detail::ObservableModel {
 public:
  void value(std::span<const double> x, std::span<double> f) const override {
    f[0] = x[0];
    f[1] = x[0] * x[0];
  }
  void jacobian(std::span<const double> x, std::span<double> jac) const override {
    jac[0] = 1.0;
    jac[1] = 2.0 * x[0];
  }
  void hessian(std::span<const double>, int k, std::span<double> hess) const override {
    hess[0] = k == 0 ? 0.0 : 2.0;
  }
};

class TanhModel final : public detail::ObservableModel {
 public:
  void value(std::span<const double> x, std::span<double> f) const override {
    f[0] = std::tanh(x[0]);
  }
  void jacobian(std::span<const double> x, std::span<double> jac) const override {
    const double c = std::cosh(x[0]);
    jac[0] = 1.0 / (c * c);
  }
  void hessian(std::span<const double> x, int, std::span<double> hess) const override {
    const double c = std::cosh(x[0]);
    hess[0] = -2.0 * std::tanh(x[0]) / (c * c);
  }
};

class CallbackModel final : public detail::ObservableModel {
 public:
  CallbackModel(Observable::ValueFn f, Observable::ValueFn grad, Observable::HessianFn hess)
      : f_(std::move(f)), grad_(std::move(grad)), hess_(std::move(hess)) {}
  void value(std::span<const double> x, std::span<double> f) const override { f_(x, f); }
  void jacobian(std::span<const double> x, std::span<double> jac) const override {
    grad_(x, jac);
  }
  void hessian(std::span<const double> x, int k, std::span<double> hess) const override {
    hess_(x, k, hess);
  }

 private:
  Observable::ValueFn f_;
  Observable::ValueFn grad_;
  Observable::HessianFn hess_;
};

double mixed_error(double approx, double exact) {
  return std::abs(approx - exact) / std::max(1.0, std::abs(exact));
}

}  // namespace

double alpha_of(const GrowthClass& growth) {
  return std::visit(Overloaded{
                        [](const QuadraticA1&) { return 2.0; },
                        [](const BoundedA2&) { return 2.0; },
                        [](const PolynomialA3& g) {
                          return std::max(g.alpha1 + 1.0, 2.0 * g.alpha2 + g.alpha3 + 3.0);
                        },
                    },
                    growth);
}

double grad_growth_beta(const GrowthClass& growth) {
  return std::visit(Overloaded{
                        [](const QuadraticA1&) { return 1.0; },
                        [](const BoundedA2&) { return 0.0; },
                        [](const PolynomialA3& g) { return g.alpha2 + 1.0; },
                    },
                    growth);
}

Observable::Observable(std::string name, int dim_d, int dim_p, GrowthClass growth,
                       std::shared_ptr<const detail::ObservableModel> model)
    : name_(std::move(name)),
      dim_d_(dim_d),
      dim_p_(dim_p),
      growth_(growth),
      model_(std::move(model)) {
  if (dim_d_ < 1 || dim_p_ < 1) {
    throw ConfigError("observable '" + name_ + "': dimensions must be positive");
  }
}

Observable Observable::custom(std::string name, int dim_d, int dim_p, GrowthClass growth,
                              ValueFn f, ValueFn grad, HessianFn hess, int check_points) {
  if (!f || !grad || !hess) {
    throw ConfigError("observable '" + name + "': f, grad and hess must all be provided");
  }
  Observable obs(name, dim_d, dim_p, growth,
                 std::make_shared<CallbackModel>(std::move(f), std::move(grad), std::move(hess)));

  std::mt19937_64 rng(0x5eed0b5e7ab1eULL);
  std::normal_distribution<double> normal(0.0, 1.5);
  std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(std::max(check_points, 2)));
  for (auto& p : points) {
    p.resize(dim_d);
    for (int i = 0; i < dim_d; ++i) p[i] = normal(rng);
  }
  const DerivativeCheck check = check_derivatives(obs, points);
  if (check.max_grad_error > 1e-6) {
    throw ConfigError("observable '" + name + "': gradient disagrees with finite differences (error " +
                      std::to_string(check.max_grad_error) + ")");
  }
  if (check.max_hess_error > 1e-5) {
    throw ConfigError("observable '" + name + "': Hessian disagrees with finite differences (error " +
                      std::to_string(check.max_hess_error) + ")");
  }
  if (std::holds_alternative<QuadraticA1>(growth) && !check.hessian_constant) {
    throw ConfigError("observable '" + name + "': declared quadratic but Hessian varies with x");
  }
  return obs;
}

Eigen::VectorXd Observable::value(const Eigen::VectorXd& x) const {
  Eigen::VectorXd f(dim_p_);
  model_->value({x.data(), static_cast<std::size_t>(x.size())},
                {f.data(), static_cast<std::size_t>(f.size())});
  return f;
}

Eigen::MatrixXd Observable::jacobian(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd jac(dim_d_, dim_p_);
  model_->jacobian({x.data(), static_cast<std::size_t>(x.size())},
                   {jac.data(), static_cast<std::size_t>(jac.size())});
  return jac;
}

Eigen::MatrixXd Observable::hessian(const Eigen::VectorXd& x, int k) const {
  Eigen::MatrixXd h(dim_d_, dim_d_);
  model_->hessian({x.data(), static_cast<std::size_t>(x.size())}, k,
                  {h.data(), static_cast<std::size_t>(h.size())});
  return h;
}

Observable builtin(std::string_view name, int dim) {
  if (name == "identity_d") {
    if (dim < 1) throw ConfigError("identity_d: dimension must be positive");
    return {"identity_d", dim, dim, QuadraticA1{}, std::make_shared<IdentityModel>(dim)};
  }
  if (name == "second_moment_1d") {
    return {"second_moment_1d", 1, 1, QuadraticA1{}, std::make_shared<SecondMomentModel>()};
  }
  if (name == "mean_and_second_1d") {
    return {"mean_and_second_1d", 1, 2, QuadraticA1{}, std::make_shared<MeanAndSecondModel>()};
  }
  if (name == "tanh_1d") {
    return {"tanh_1d", 1, 1, BoundedA2{}, std::make_shared<TanhModel>()};
  }
  throw ConfigError("unknown observable '" + std::string(name) + "'");
}

double fd_step(double x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, std::abs(x));
}

DerivativeCheck check_derivatives(const Observable& obs, std::span<const Eigen::VectorXd> points) {
  const int d = obs.dim_d();
  const int p = obs.dim_p();
  DerivativeCheck out;
  std::vector<Eigen::MatrixXd> first_hessians;

  for (const auto& x : points) {
    const Eigen::MatrixXd jac = obs.jacobian(x);
    for (int i = 0; i < d; ++i) {
      const double h = fd_step(x[i]);
      Eigen::VectorXd xp = x;
      Eigen::VectorXd xm = x;
      xp[i] += h;
      xm[i] -= h;
      const Eigen::VectorXd df = (obs.value(xp) - obs.value(xm)) / (2.0 * h);
      const Eigen::MatrixXd dj = (obs.jacobian(xp) - obs.jacobian(xm)) / (2.0 * h);
      for (int j = 0; j < p; ++j) {
        out.max_grad_error = std::max(out.max_grad_error, mixed_error(df[j], jac(i, j)));
      }
      for (int k = 0; k < p; ++k) {
        const Eigen::MatrixXd hk = obs.hessian(x, k);
        for (int r = 0; r < d; ++r) {
          // Row i of Hessian k is the derivative of column k of the Jacobian along x_i.
          out.max_hess_error = std::max(out.max_hess_error, mixed_error(dj(r, k), hk(i, r)));
        }
      }
    }
    if (first_hessians.empty()) {
      for (int k = 0; k < p; ++k) first_hessians.push_back(obs.hessian(x, k));
    } else {
      for (int k = 0; k < p; ++k) {
        const Eigen::MatrixXd hk = obs.hessian(x, k);
        const double scale = std::max(1.0, first_hessians[k].cwiseAbs().maxCoeff());
        if ((hk - first_hessians[k]).cwiseAbs().maxCoeff() > 1e-12 * scale) {
          out.hessian_constant = false;
        }
      }
    }
  }
  return out;
}

}  // namespace smd
