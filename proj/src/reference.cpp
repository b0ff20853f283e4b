/*
 * Copyright 2026 The LFA Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "lfa/reference.hpp"

#include <cmath>

#include <Eigen/QR>

namespace lfa::reference {
namespace {

void check_input(const Model& f, const Vector& x0) {
  if (x0.size() != f.input_dim()) {
    throw DimensionMismatch("x0 has dimension " + std::to_string(x0.size()) +
                            " but the model expects " + std::to_string(f.input_dim()));
  }
}

void check_samples(int n) {
  if (n < 1) throw InvalidArgument("reference methods need at least one sample");
}

// argmin_{w,b} sum_i pi_i (y_i - w.z_i - b)^2 by QR on the row-scaled design.
Vector weighted_ls_with_intercept(const Matrix& z, const Vector& y, const Vector& pi) {
  const Eigen::Index n = z.rows();
  const Eigen::Index d = z.cols();
  Matrix a(n, d + 1);
  a.leftCols(d) = z;
  a.col(d).setOnes();
  const Vector s = pi.cwiseSqrt();
  const Matrix as = s.asDiagonal() * a;
  const Vector ys = s.cwiseProduct(y);
  const Vector coef = as.colPivHouseholderQr().solve(ys);
  return coef.head(d);
}

Matrix bernoulli_masks(Eigen::Index n, Eigen::Index d, RandomStream& rng) {
  Matrix z(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) z(i, j) = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return z;
}

double binomial(Eigen::Index m, Eigen::Index k) {
  return std::exp(std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0));
}

}  // namespace

Vector vanilla_gradients(const Model& f, const Vector& x0) {
  check_input(f, x0);
  return f.gradient(x0);
}

Vector grad_x_input(const Model& f, const Vector& x0) {
  check_input(f, x0);
  return x0.cwiseProduct(f.gradient(x0));
}

Vector smoothgrad(const Model& f, const Vector& x0, double sigma, int n, RandomStream& rng) {
  check_input(f, x0);
  check_samples(n);
  const Eigen::Index d = x0.size();
  Matrix eps(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) eps(i, j) = sigma * rng.normal();
  Vector sum = Vector::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) sum += f.gradient(x0 + eps.row(i).transpose());
  return sum / static_cast<double>(n);
}

Vector integrated_gradients(const Model& f, const Vector& x0, int steps) {
  check_input(f, x0);
  if (steps < 1) throw InvalidArgument("integrated gradients needs at least one step");
  Vector sum = Vector::Zero(x0.size());
  for (int t = 0; t < steps; ++t) {
    const double alpha = static_cast<double>(t) / steps;
    sum += f.gradient(alpha * x0);
  }
  return x0.cwiseProduct(sum) / static_cast<double>(steps);
}

Vector occlusion(const Model& f, const Vector& x0) {
  check_input(f, x0);
  const double fx0 = f.predict(x0);
  Vector out(x0.size());
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    Vector x = x0;
    x(i) = 0.0;
    out(i) = fx0 - f.predict(x);
  }
  return out;
}

Vector lime(const Model& f, const Vector& x0, const ExponentialKernel& kernel, int n,
            RandomStream& rng) {
  check_input(f, x0);
  check_samples(n);
  const Eigen::Index d = x0.size();
  const Matrix z = bernoulli_masks(n, d, rng);
  const double width = kernel.width > 0 ? kernel.width : 0.75 * std::sqrt(static_cast<double>(d));
  Vector y(n);
  Vector pi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = x0.array() * z.row(i).transpose().array();
    y(i) = f.predict(x);
    double dist;
    if (kernel.distance == KernelDistance::kL2Squared) {
      dist = (x0 - x).squaredNorm();
    } else if (x.norm() > 0 && x0.norm() > 0) {
      dist = 1.0 - x0.dot(x) / (x0.norm() * x.norm());
    } else {
      dist = 1.0;
    }
    pi(i) = std::exp(-dist / (width * width));
  }
  return weighted_ls_with_intercept(z, y, pi);
}

Vector kernelshap(const Model& f, const Vector& x0, int n, double clamp, RandomStream& rng) {
  check_input(f, x0);
  check_samples(n);
  const Eigen::Index m = x0.size();
  const Matrix z = bernoulli_masks(n, m, rng);
  Vector y(n);
  Vector pi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector x = x0.array() * z.row(i).transpose().array();
    y(i) = f.predict(x);
    const auto k = static_cast<Eigen::Index>(z.row(i).sum());
    if (k == 0 || k == m) {
      pi(i) = clamp;
    } else {
      pi(i) = std::min(clamp, (m - 1.0) / (binomial(m, k) * static_cast<double>(k) *
                                           static_cast<double>(m - k)));
    }
  }
  return weighted_ls_with_intercept(z, y, pi);
}

Vector clime(const Model& f, const Vector& x0, double sigma, int n, RandomStream& rng) {
  check_input(f, x0);
  check_samples(n);
  const Eigen::Index d = x0.size();
  Matrix eps(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) eps(i, j) = sigma * rng.normal();
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) y(i) = f.predict(x0 + eps.row(i).transpose());
  return weighted_ls_with_intercept(eps, y, Vector::Ones(n));
}

Vector explain(Method method, const Model& f, const Vector& x0, const RandomStream& rng,
               const ReferenceConfig& cfg) {
  RandomStream sample = rng.fork("sample");
  switch (method) {
    case Method::kCLime: return clime(f, x0, cfg.sigma, cfg.n_samples, sample);
    case Method::kSmoothGrad: return smoothgrad(f, x0, cfg.sigma, cfg.n_samples, sample);
    case Method::kVanillaGradients: return vanilla_gradients(f, x0);
    case Method::kIntegratedGradients: return integrated_gradients(f, x0, cfg.ig_steps);
    case Method::kGradXInput: return grad_x_input(f, x0);
    case Method::kLime: return lime(f, x0, cfg.lime_kernel, cfg.n_samples, sample);
    case Method::kKernelShap: return kernelshap(f, x0, cfg.n_samples, cfg.shapley_clamp, sample);
    case Method::kOcclusion: return occlusion(f, x0);
  }
  throw InvalidArgument("unknown method");
}

}  // namespace lfa::reference
