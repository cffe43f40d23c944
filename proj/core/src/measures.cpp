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

#include "smd/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "smd/detail/kahan.hpp"
#include "smd/errors.hpp"

namespace smd {

EmpiricalMeasure::EmpiricalMeasure(int dim, std::vector<double> positions)
    : dim_(dim), positions_(std::move(positions)) {
  if (dim_ < 1) throw ConfigError("empirical measure: dimension must be positive");
  if (positions_.empty()) throw ConfigError("empirical measure: at least one particle required");
  if (positions_.size() % static_cast<std::size_t>(dim_) != 0) {
    throw ConfigError("empirical measure: position count is not a multiple of the dimension");
  }
  for (double v : positions_) {
    if (!std::isfinite(v)) throw ConfigError("empirical measure: non-finite coordinate");
  }
}

bool GramMatrix::is_psd(double tol) const {
  if (g.rows() != g.cols()) return false;
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  return (ldlt.vectorD().array() >= -tol).all();
}

Eigen::VectorXd f_moment(MeasureView pi, const Observable& obs) {
  const int p = obs.dim_p();
  const std::size_t n = pi.size();
  std::vector<detail::CompensatedSum> acc(static_cast<std::size_t>(p));
  std::vector<double> f(static_cast<std::size_t>(p));
  for (std::size_t i = 0; i < n; ++i) {
    obs.value(pi.point(i), f);
    for (int k = 0; k < p; ++k) acc[k].add(f[k]);
  }
  Eigen::VectorXd z(p);
  for (int k = 0; k < p; ++k) z[k] = acc[k].value() / static_cast<double>(n);
  return z;
}

Eigen::VectorXd f_moment(const EmpiricalMeasure& pi, const Observable& obs) {
  if (pi.dim() != obs.dim_d()) throw ConfigError("f_moment: dimension mismatch");
  return f_moment(pi.view(), obs);
}

GramMatrix gram(MeasureView pi, const Observable& obs) {
  const int d = obs.dim_d();
  const int p = obs.dim_p();
  const std::size_t n = pi.size();
  std::vector<detail::CompensatedSum> acc(static_cast<std::size_t>(p * p));
  std::vector<double> jac(static_cast<std::size_t>(d * p));
  for (std::size_t i = 0; i < n; ++i) {
    obs.jacobian(pi.point(i), jac);
    for (int a = 0; a < p; ++a) {
      for (int b = a; b < p; ++b) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += jac[c + a * d] * jac[c + b * d];
        acc[a + b * p].add(s);
      }
    }
  }
  GramMatrix out{Eigen::MatrixXd(p, p)};
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      const double v = acc[a + b * p].value() / static_cast<double>(n);
      out.g(a, b) = v;
      out.g(b, a) = v;
    }
  }
  return out;
}

GramMatrix gram(const EmpiricalMeasure& pi, const Observable& obs) {
  if (pi.dim() != obs.dim_d()) throw ConfigError("gram: dimension mismatch");
  return gram(pi.view(), obs);
}

double poly_moment(MeasureView pi, double gamma) {
  if (!(gamma >= 1.0)) throw ConfigError("poly_moment: gamma must be >= 1");
  detail::CompensatedSum acc;
  const std::size_t n = pi.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = pi.point(i);
    double sq = 0.0;
    for (double v : x) sq += v * v;
    acc.add(gamma == 2.0 ? sq : std::pow(std::sqrt(sq), gamma));
  }
  return acc.value() / static_cast<double>(n);
}

double poly_moment(const EmpiricalMeasure& pi, double gamma) { return poly_moment(pi.view(), gamma); }

double wasserstein_1d_sorted(double p, std::span<const double> a, std::span<const double> b) {
  if (!(p >= 1.0)) throw ConfigError("wasserstein_1d: order p must be >= 1");
  if (a.empty() || b.empty()) throw ConfigError("wasserstein_1d: empty sample");
  const auto na = static_cast<unsigned long long>(a.size());
  const auto nb = static_cast<unsigned long long>(b.size());
  const double total = static_cast<double>(na) * static_cast<double>(nb);

  auto cost = [p](double x, double y) {
    const double g = std::abs(x - y);
    if (p == 1.0) return g;
    if (p == 2.0) return g * g;
    return std::pow(g, p);
  };

  // Quantile breakpoints i/na and j/nb, in units of 1/(na*nb).
  detail::CompensatedSum acc;
  unsigned long long i = 0;
  unsigned long long j = 0;
  unsigned long long cursor = 0;
  while (i < na && j < nb) {
    const unsigned long long next_a = (i + 1) * nb;
    const unsigned long long next_b = (j + 1) * na;
    const unsigned long long next = std::min(next_a, next_b);
    acc.add(cost(a[i], b[j]) * static_cast<double>(next - cursor));
    cursor = next;
    if (next_a == next) ++i;
    if (next_b == next) ++j;
  }
  const double integral = acc.value() / total;
  if (p == 1.0) return integral;
  if (p == 2.0) return std::sqrt(integral);
  return std::pow(integral, 1.0 / p);
}

double wasserstein_1d(double p, MeasureView a, MeasureView b) {
  if (a.dim != 1 || b.dim != 1) {
    throw UnsupportedDimension("wasserstein_1d: only one-dimensional measures are supported");
  }
  std::vector<double> sa(a.data.begin(), a.data.end());
  std::vector<double> sb(b.data.begin(), b.data.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return wasserstein_1d_sorted(p, sa, sb);
}

double wasserstein_1d(double p, const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  return wasserstein_1d(p, a.view(), b.view());
}

}  // namespace smd
