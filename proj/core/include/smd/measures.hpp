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
#include <vector>

#include <Eigen/Dense>

#include "smd/observables.hpp"

namespace smd {

/// Non-owning view of N particles in R^d, stored particle-major
/// (coordinate c of particle i at data[i * dim + c]).
struct MeasureView {
  int dim = 1;
  std::span<const double> data;

  std::size_t size() const { return data.size() / static_cast<std::size_t>(dim); }
  std::span<const double> point(std::size_t i) const {
    return data.subspan(i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
  }
};

/// Uniformly weighted empirical measure (1/N) sum_i delta_{x_i}.
class EmpiricalMeasure {
 public:
  /// `positions` is particle-major with `dim` coordinates per particle.
  /// Throws ConfigError when empty, misshapen, or containing NaN/Inf.
  EmpiricalMeasure(int dim, std::vector<double> positions);

  static EmpiricalMeasure from_1d(std::vector<double> xs) { return {1, std::move(xs)}; }

  int dim() const { return dim_; }
  std::size_t size() const { return positions_.size() / static_cast<std::size_t>(dim_); }
  std::span<const double> point(std::size_t i) const { return view().point(i); }
  const std::vector<double>& positions() const { return positions_; }
  MeasureView view() const { return {dim_, positions_}; }

 private:
  int dim_;
  std::vector<double> positions_;
};

/// Symmetric positive semi-definite p x p matrix mu(grad f^T grad f).
struct GramMatrix {
  Eigen::MatrixXd g;

  double determinant() const { return g.determinant(); }
  /// Symmetric to `tol` and no pivoted-LDLT diagonal entry below -tol.
  bool is_psd(double tol = 1e-12) const;
};

/// (1/N) sum_i f(x_i).
Eigen::VectorXd f_moment(const EmpiricalMeasure& pi, const Observable& obs);
Eigen::VectorXd f_moment(MeasureView pi, const Observable& obs);

/// (1/N) sum_i grad f(x_i)^T grad f(x_i).
GramMatrix gram(const EmpiricalMeasure& pi, const Observable& obs);
GramMatrix gram(MeasureView pi, const Observable& obs);

/// (1/N) sum_i |x_i|^gamma with the Euclidean norm. gamma < 1 -> ConfigError.
double poly_moment(const EmpiricalMeasure& pi, double gamma);
double poly_moment(MeasureView pi, double gamma);

/// Order-p Wasserstein distance between one-dimensional empirical measures,
/// computed as the L^p distance of their quantile functions. Measures in
/// d > 1 raise UnsupportedDimension.
double wasserstein_1d(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b);
double wasserstein_1d(double p, MeasureView a, MeasureView b);

/// Same distance with both samples already sorted ascending.
double wasserstein_1d_sorted(double p, std::span<const double> a, std::span<const double> b);

}  // namespace smd
