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

#include "smd/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "smd/detail/kahan.hpp"
#include "smd/errors.hpp"

namespace smd {

FieldEngine::FieldEngine(Observable obs, MomentDriver drv, double eta, double det_floor)
    : obs_(std::move(obs)), drv_(std::move(drv)), eta_(eta), det_floor_(det_floor) {
  if (obs_.dim_p() != drv_.dim_p()) {
    throw ConfigError("observable '" + obs_.name() + "' has p = " + std::to_string(obs_.dim_p()) +
                      " but driver '" + drv_.name() + "' has p = " + std::to_string(drv_.dim_p()));
  }
  if (!(eta_ >= 0.0)) throw ConfigError("eta must be >= 0");
  if (!(det_floor_ > 0.0)) throw ConfigError("det_floor must be > 0");
}

const FieldEngine::Moments& FieldEngine::prepare(MeasureView pi) {
  if (pi.dim != obs_.dim_d()) throw ConfigError("field: measure dimension does not match observable");
  current_ = pi;
  const int d = obs_.dim_d();
  const int p = obs_.dim_p();
  const auto n = static_cast<std::ptrdiff_t>(pi.size());
  const std::size_t dp = static_cast<std::size_t>(d * p);
  values_.resize(static_cast<std::size_t>(n) * p);
  jac_.resize(static_cast<std::size_t>(n) * dp);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto x = pi.point(static_cast<std::size_t>(i));
    obs_.value(x, std::span<double>(values_).subspan(static_cast<std::size_t>(i) * p, p));
    obs_.jacobian(x, std::span<double>(jac_).subspan(static_cast<std::size_t>(i) * dp, dp));
  }

  std::vector<detail::CompensatedSum> zsum(static_cast<std::size_t>(p));
  std::vector<detail::CompensatedSum> gsum(static_cast<std::size_t>(p * p));
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* f = values_.data() + i * p;
    const double* j = jac_.data() + i * static_cast<std::ptrdiff_t>(dp);
    for (int k = 0; k < p; ++k) zsum[k].add(f[k]);
    for (int a = 0; a < p; ++a) {
      for (int b = a; b < p; ++b) {
        double s = 0.0;
        for (int c = 0; c < d; ++c) s += j[c + a * d] * j[c + b * d];
        gsum[a + b * p].add(s);
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  moments_.z.resize(p);
  moments_.gram.resize(p, p);
  for (int k = 0; k < p; ++k) moments_.z[k] = zsum[k].value() * inv_n;
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      moments_.gram(a, b) = gsum[a + b * p].value() * inv_n;
      moments_.gram(b, a) = moments_.gram(a, b);
    }
  }
  moments_.det_gram = moments_.gram.determinant();
  moments_.margin = drv_.singularity_margin(moments_.z);
  return moments_;
}

void FieldEngine::complete(SmdField& out) {
  const int d = obs_.dim_d();
  const int p = obs_.dim_p();
  const MeasureView pi = current_;
  const auto n = static_cast<std::ptrdiff_t>(pi.size());
  const std::size_t dp = static_cast<std::size_t>(d * p);

  if (eta_ == 0.0 && !(moments_.det_gram > det_floor_)) {
    std::ostringstream msg;
    msg << "Gram matrix is singular: det = " << moments_.det_gram << " <= " << det_floor_;
    throw SingularGram(msg.str());
  }
  // Both driver calls raise DriverSingularity when the margin is not positive.
  const Eigen::VectorXd a = drv_.drift(moments_.z);
  const Eigen::MatrixXd s = drv_.diffusion(moments_.z);

  const Eigen::MatrixXd shifted =
      moments_.gram + eta_ * Eigen::MatrixXd::Identity(p, p);
  const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw SingularGram("Gram matrix factorization failed (not positive definite)");
  }
  const Eigen::MatrixXd m = llt.solve(s);
  const Eigen::MatrixXd bmat = m * m.transpose();

  // Ito correction: per-particle (grad f B grad f^T) : hess f_k.
  ito_.resize(static_cast<std::size_t>(n) * p);
#pragma omp parallel
  {
    std::vector<double> proj(static_cast<std::size_t>(d * d));
    std::vector<double> hess(static_cast<std::size_t>(d * d));
    std::vector<double> jb(dp);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double* j = jac_.data() + i * static_cast<std::ptrdiff_t>(dp);
      // jb = J B (d x p), proj = jb J^T (d x d)
      for (int c = 0; c < p; ++c) {
        for (int r = 0; r < d; ++r) {
          double acc = 0.0;
          for (int t = 0; t < p; ++t) acc += j[r + t * d] * bmat(t, c);
          jb[r + c * d] = acc;
        }
      }
      for (int v = 0; v < d; ++v) {
        for (int u = 0; u < d; ++u) {
          double acc = 0.0;
          for (int t = 0; t < p; ++t) acc += jb[u + t * d] * j[v + t * d];
          proj[u + v * d] = acc;
        }
      }
      const auto x = pi.point(static_cast<std::size_t>(i));
      for (int k = 0; k < p; ++k) {
        obs_.hessian(x, k, hess);
        double acc = 0.0;
        for (int e = 0; e < d * d; ++e) acc += proj[e] * hess[e];
        ito_[static_cast<std::size_t>(i) * p + k] = acc;
      }
    }
  }
  std::vector<detail::CompensatedSum> csum(static_cast<std::size_t>(p));
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (int k = 0; k < p; ++k) csum[k].add(ito_[static_cast<std::size_t>(i) * p + k]);
  }
  Eigen::VectorXd residual(p);
  for (int k = 0; k < p; ++k) {
    residual[k] = a[k] - 0.5 * csum[k].value() / static_cast<double>(n);
  }
  const Eigen::VectorXd nvec = llt.solve(residual);

  out.dim_d = d;
  out.dim_p = p;
  out.b.resize(static_cast<std::size_t>(n) * d);
  out.sigma.resize(static_cast<std::size_t>(n) * dp);
  out.det_gram = moments_.det_gram;
  out.z = moments_.z;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const double* j = jac_.data() + i * static_cast<std::ptrdiff_t>(dp);
    double* sig = out.sigma.data() + i * static_cast<std::ptrdiff_t>(dp);
    double* bi = out.b.data() + i * d;
    for (int r = 0; r < d; ++r) {
      double acc = 0.0;
      for (int t = 0; t < p; ++t) acc += j[r + t * d] * nvec[t];
      bi[r] = acc;
    }
    for (int c = 0; c < p; ++c) {
      for (int r = 0; r < d; ++r) {
        double acc = 0.0;
        for (int t = 0; t < p; ++t) acc += j[r + t * d] * m(t, c);
        sig[r + c * d] = acc;
      }
    }
  }
}

SmdField FieldEngine::compute(MeasureView pi) {
  prepare(pi);
  SmdField out;
  complete(out);
  return out;
}

SmdField compute_field(const EmpiricalMeasure& pi, const Observable& obs, const MomentDriver& drv,
                       double eta, double det_floor) {
  FieldEngine engine(obs, drv, eta, det_floor);
  return engine.compute(pi.view());
}

ClosedForm parse_closed_form(std::string_view name) {
  if (name == "bessel_x2") return ClosedForm::BesselX2;
  if (name == "mean_variance") return ClosedForm::MeanVariance;
  if (name == "reg_x2") return ClosedForm::RegX2;
  if (name == "reg_tanh") return ClosedForm::RegTanh;
  throw ConfigError("unknown closed form '" + std::string(name) + "'");
}

namespace {

template <class F>
double average(std::span<const double> xs, F&& fn) {
  detail::CompensatedSum acc;
  for (double x : xs) acc.add(fn(x));
  return acc.value() / static_cast<double>(xs.size());
}

}  // namespace

SmdField closed_form(ClosedForm form, const EmpiricalMeasure& pi, ClosedFormParams params) {
  if (pi.dim() != 1) throw UnsupportedDimension("closed_form: only d = 1 is supported");
  const std::span<const double> xs = pi.positions();
  const std::size_t n = xs.size();
  const double delta = params.delta;
  const double eta = params.eta;

  SmdField out;
  out.dim_d = 1;
  out.b.resize(n);

  switch (form) {
    case ClosedForm::BesselX2: {
      const double m2 = average(xs, [](double x) { return x * x; });
      if (!(m2 > 0.0)) throw SingularGram("bessel_x2: second moment is zero");
      out.dim_p = 1;
      out.sigma.resize(n);
      out.z = Eigen::VectorXd::Constant(1, m2);
      out.det_gram = 4.0 * m2;
      for (std::size_t i = 0; i < n; ++i) {
        out.b[i] = (delta - 1.5) / (4.0 * m2 * m2) * xs[i];
        out.sigma[i] = xs[i] / (2.0 * m2);
      }
      break;
    }
    case ClosedForm::MeanVariance: {
      const double m = average(xs, [](double x) { return x; });
      const double m2 = average(xs, [](double x) { return x * x; });
      const double var = average(xs, [m](double x) { return (x - m) * (x - m); });
      if (!(var > 0.0)) throw SingularGram("mean_variance: variance is zero");
      out.dim_p = 2;
      out.sigma.resize(2 * n);
      out.z = Eigen::Vector2d(m, m2);
      out.det_gram = 4.0 * var;
      for (std::size_t i = 0; i < n; ++i) {
        out.b[i] = (delta - 1.5) / (4.0 * var * var) * (xs[i] - m);
        out.sigma[2 * i] = 1.0;
        out.sigma[2 * i + 1] = (xs[i] - m) / (2.0 * var);
      }
      break;
    }
    case ClosedForm::RegX2: {
      const double m2 = average(xs, [](double x) { return x * x; });
      const double denom = eta + 4.0 * m2;
      if (!(denom > 0.0)) throw SingularGram("reg_x2: eta + 4 m2 vanishes");
      out.dim_p = 1;
      out.sigma.resize(n);
      out.z = Eigen::VectorXd::Constant(1, m2);
      out.det_gram = 4.0 * m2;
      for (std::size_t i = 0; i < n; ++i) {
        out.b[i] = -8.0 * xs[i] * m2 / (denom * denom * denom);
        out.sigma[i] = 2.0 * xs[i] / denom;
      }
      break;
    }
    case ClosedForm::RegTanh: {
      auto sech2 = [](double x) {
        const double c = std::cosh(x);
        return 1.0 / (c * c);
      };
      const double s4 = average(xs, [&](double x) { return sech2(x) * sech2(x); });
      const double t6 = average(xs, [&](double x) {
        const double s2 = sech2(x);
        return std::tanh(x) * s2 * s2 * s2;
      });
      const double denom = eta + s4;
      if (!(denom > 0.0)) throw SingularGram("reg_tanh: eta + mu(sech^4) vanishes");
      out.dim_p = 1;
      out.sigma.resize(n);
      out.z = Eigen::VectorXd::Constant(1, average(xs, [](double x) { return std::tanh(x); }));
      out.det_gram = s4;
      for (std::size_t i = 0; i < n; ++i) {
        out.b[i] = sech2(xs[i]) * t6 / (denom * denom * denom);
        out.sigma[i] = sech2(xs[i]) / denom;
      }
      break;
    }
  }
  return out;
}

double ramp_inside(double r, double u) {
  if (u <= r) return 1.0;
  if (u >= r + 1.0) return 0.0;
  return r + 1.0 - u;
}

double ramp_away(double r, double u) {
  if (u <= 1.0 / (r + 1.0)) return 0.0;
  if (u >= 1.0 / r) return 1.0;
  return r * (r + 1.0) * u - r;
}

double cutoff_chi(std::span<const double> x, const EmpiricalMeasure& pi, const Observable& obs,
                  const MomentDriver& drv, double K, double M) {
  if (!(K > 0.0) || !(M > 0.0)) throw ConfigError("cutoff_chi: K and M must be > 0");
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  const Eigen::VectorXd z = f_moment(pi, obs);
  const double det = gram(pi, obs).determinant();
  const double malpha = poly_moment(pi, alpha_of(obs));
  const double margin = drv.singularity_margin(z);
  return ramp_inside(K, std::sqrt(norm2)) * ramp_inside(M, malpha) * ramp_away(M, margin) *
         ramp_away(M, det);
}

}  // namespace smd
