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

#ifndef LFA_CORE_MATH_HPP_
#define LFA_CORE_MATH_HPP_

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "lfa/error.hpp"

namespace lfa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Default ridge applied to every surrogate fit. Binary mask designs can be
// rank deficient ("XOR-like") for unlucky draws.
inline constexpr double kDefaultRidge = 1e-8;

template <typename DerivedA, typename DerivedB>
void check_same_size(const Eigen::MatrixBase<DerivedA>& a,
                     const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("vectors have sizes " + std::to_string(a.size()) +
                            " and " + std::to_string(b.size()));
  }
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}

// Sum of absolute coordinate differences.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar l1_distance(const Eigen::MatrixBase<DerivedA>& a,
                                      const Eigen::MatrixBase<DerivedB>& b) {
  check_same_size(a, b);
  return (a - b).cwiseAbs().sum();
}

// 1 - cos(angle(a, b)), in [0, 2]. Zero-norm inputs have no angle.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_distance(const Eigen::MatrixBase<DerivedA>& a,
                                          const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  check_same_size(a, b);
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (!(na > Scalar(0)) || !(nb > Scalar(0))) {
    throw DegenerateVector("cosine distance is undefined for a zero-norm vector");
  }
  Scalar c = a.dot(b) / (na * nb);
  if (c > Scalar(1)) c = Scalar(1);
  if (c < Scalar(-1)) c = Scalar(-1);
  return Scalar(1) - c;
}

template <typename Scalar>
struct WlsProblem {
  using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MatrixT design;   // n x d
  VectorT targets;  // n
  VectorT weights;  // n, nonnegative
  Scalar ridge = Scalar(kDefaultRidge);
  bool fit_intercept = true;
};

template <typename Scalar>
struct WlsSolution {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
  Scalar intercept = Scalar(0);
};

template <typename Scalar>
void validate(const WlsProblem<Scalar>& p) {
  const auto n = p.design.rows();
  if (n < 1) throw InvalidArgument("weighted least squares needs at least one row");
  if (p.targets.size() != n || p.weights.size() != n) {
    throw DimensionMismatch("design, targets and weights disagree on row count");
  }
  if ((p.weights.array() < Scalar(0)).any() || !p.weights.allFinite()) {
    throw InvalidArgument("sample weights must be finite and nonnegative");
  }
  if (!(p.ridge >= Scalar(0))) throw InvalidArgument("ridge must be nonnegative");
  if (!(p.weights.sum() > Scalar(0))) {
    throw InvalidArgument("sample weights sum to zero");
  }
}

// Minimizes sum_i pi_i (y_i - w.x_i - b)^2 + ridge * |w|^2 with pi
// normalized to unit mean, so the solution does not depend on the overall
// scale of the weights and the ridge acts per sample. The intercept is never
// penalized.
template <typename Scalar>
WlsSolution<Scalar> weighted_ridge_ls(const WlsProblem<Scalar>& p) {
  using MatrixT = typename WlsProblem<Scalar>::MatrixT;
  using VectorT = typename WlsProblem<Scalar>::VectorT;
  validate(p);

  const Eigen::Index n = p.design.rows();
  const Eigen::Index d = p.design.cols();
  const Eigen::Index m = d + (p.fit_intercept ? 1 : 0);
  const VectorT pi = p.weights * (Scalar(n) / p.weights.sum());

  MatrixT a(n, m);
  a.leftCols(d) = p.design;
  if (p.fit_intercept) a.col(d).setOnes();

  MatrixT normal = a.transpose() * pi.asDiagonal() * a;
  VectorT rhs = a.transpose() * (pi.array() * p.targets.array()).matrix();
  normal.topLeftCorner(d, d).diagonal().array() += p.ridge;

  Eigen::LLT<MatrixT> llt(normal);
  const Scalar scale = normal.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success || !(scale > Scalar(0)) ||
      llt.rcond() < Scalar(1e-13)) {
    throw RankDeficient(
        "normal equations are singular; use a positive ridge (e.g. 1e-8)");
  }
  VectorT theta = llt.solve(rhs);
  if (!theta.allFinite()) {
    throw NumericalFailure("weighted least squares produced non-finite weights");
  }

  WlsSolution<Scalar> out;
  out.weights = theta.head(d);
  out.intercept = p.fit_intercept ? theta(d) : Scalar(0);
  return out;
}

}  // namespace lfa

#endif  // LFA_CORE_MATH_HPP_
