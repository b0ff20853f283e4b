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

#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "lfa/core_math.hpp"
#include "lfa/random.hpp"
#include "oracles.hpp"

namespace lfa {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

Vector random_vector(RandomStream& rng, Eigen::Index d) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
  return v;
}

TEST(L1Distance, Examples) {
  EXPECT_EQ(l1_distance(vec({1, 2}), vec({0, 0})), 3.0);
  EXPECT_EQ(l1_distance(vec({5, -5}), vec({5, -5})), 0.0);
}

TEST(L1Distance, MatchesLoopOracle) {
  RandomStream rng(11);
  for (int t = 0; t < 100; ++t) {
    const Vector a = random_vector(rng, 7);
    const Vector b = random_vector(rng, 7);
    EXPECT_NEAR(l1_distance(a, b), oracle::l1_loop(a, b), 1e-12);
  }
}

TEST(L1Distance, SymmetricAndTriangle) {
  RandomStream rng(12);
  for (int t = 0; t < 200; ++t) {
    const Vector a = random_vector(rng, 5);
    const Vector b = random_vector(rng, 5);
    const Vector c = random_vector(rng, 5);
    EXPECT_EQ(l1_distance(a, b), l1_distance(b, a));
    EXPECT_LE(l1_distance(a, c), l1_distance(a, b) + l1_distance(b, c) + 1e-12);
  }
}

TEST(L1Distance, DimensionMismatchThrows) {
  EXPECT_THROW(l1_distance(vec({1, 2}), vec({1})), DimensionMismatch);
}

TEST(CosineDistance, Examples) {
  EXPECT_NEAR(cosine_distance(vec({1, 0}), vec({0, 1})), 1.0, 1e-15);
  EXPECT_NEAR(cosine_distance(vec({2, 2}), vec({1, 1})), 0.0, 1e-15);
  EXPECT_NEAR(cosine_distance(vec({1, 0}), vec({-1, 0})), 2.0, 1e-15);
}

TEST(CosineDistance, ZeroNormIsDegenerate) {
  EXPECT_THROW(cosine_distance(vec({0, 0}), vec({1, 0})), DegenerateVector);
  EXPECT_THROW(cosine_distance(vec({1, 0}), vec({0, 0})), DegenerateVector);
}

TEST(CosineDistance, SymmetricAndBounded) {
  RandomStream rng(13);
  for (int t = 0; t < 200; ++t) {
    const Vector a = random_vector(rng, 4);
    const Vector b = random_vector(rng, 4);
    const double ab = cosine_distance(a, b);
    EXPECT_NEAR(ab, cosine_distance(b, a), 1e-15);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 2.0);
  }
}

WlsProblem<double> random_problem(RandomStream& rng, Eigen::Index n, Eigen::Index d) {
  WlsProblem<double> p;
  p.design.resize(n, d);
  p.targets.resize(n);
  p.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) p.design(i, j) = rng.normal();
    p.targets(i) = rng.normal();
    p.weights(i) = rng.uniform(0.1, 2.0);
  }
  return p;
}

TEST(WeightedRidgeLs, ExactLinearFit) {
  WlsProblem<double> p;
  p.design = Matrix(2, 1);
  p.design << 1, 2;
  p.targets = vec({2, 4});
  p.weights = vec({1, 1});
  p.ridge = 0.0;
  p.fit_intercept = false;
  const auto sol = weighted_ridge_ls(p);
  EXPECT_NEAR(sol.weights(0), 2.0, 1e-14);
  EXPECT_EQ(sol.intercept, 0.0);
}

TEST(WeightedRidgeLs, WeightScaleInvariance) {
  RandomStream rng(21);
  WlsProblem<double> p = random_problem(rng, 30, 3);
  p.weights.setOnes();
  const auto a = weighted_ridge_ls(p);
  p.weights *= 10.0;
  const auto b = weighted_ridge_ls(p);
  EXPECT_LT((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(a.intercept, b.intercept, 1e-13);
}

TEST(WeightedRidgeLs, MatchesNormalEquationsOracle) {
  RandomStream rng(22);
  for (int t = 0; t < 20; ++t) {
    WlsProblem<double> p = random_problem(rng, 20, 3);
    p.ridge = 1e-8;
    const auto sol = weighted_ridge_ls(p);
    const auto ref = oracle::wls(p.design, p.targets, p.weights, p.ridge, true);
    EXPECT_LT((sol.weights - ref.w).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(sol.intercept, ref.b, 1e-8);
  }
}

TEST(WeightedRidgeLs, RowPermutationInvariance) {
  RandomStream rng(23);
  WlsProblem<double> p = random_problem(rng, 25, 4);
  const auto a = weighted_ridge_ls(p);
  std::vector<Eigen::Index> perm(25);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size(); i-- > 1;) std::swap(perm[i], perm[rng.choice(i + 1)]);
  WlsProblem<double> q = p;
  for (Eigen::Index i = 0; i < 25; ++i) {
    q.design.row(i) = p.design.row(perm[static_cast<std::size_t>(i)]);
    q.targets(i) = p.targets(perm[static_cast<std::size_t>(i)]);
    q.weights(i) = p.weights(perm[static_cast<std::size_t>(i)]);
  }
  const auto b = weighted_ridge_ls(q);
  EXPECT_LT((a.weights - b.weights).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(a.intercept, b.intercept, 1e-12);
}

TEST(WeightedRidgeLs, ResidualGradientVanishesWithoutRidge) {
  RandomStream rng(24);
  for (int t = 0; t < 20; ++t) {
    WlsProblem<double> p = random_problem(rng, 40, 5);
    p.ridge = 0.0;
    const auto sol = weighted_ridge_ls(p);
    const Vector r = p.targets - p.design * sol.weights - Vector::Constant(40, sol.intercept);
    const Vector grad = p.design.transpose() * p.weights.cwiseProduct(r);
    EXPECT_LT(grad.cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT(std::fabs(p.weights.dot(r)), 1e-8);
  }
}

TEST(WeightedRidgeLs, SingularWithoutRidgeThrows) {
  WlsProblem<double> p;
  p.design = Matrix(4, 2);
  p.design << 1, 1, 0, 0, 1, 1, 0, 0;
  p.targets = vec({1, 0, 1, 0});
  p.weights = vec({1, 1, 1, 1});
  p.ridge = 0.0;
  EXPECT_THROW(weighted_ridge_ls(p), RankDeficient);
  p.ridge = 1e-8;
  const auto sol = weighted_ridge_ls(p);
  EXPECT_NEAR(sol.weights(0), sol.weights(1), 1e-6);
}

TEST(WeightedRidgeLs, InvalidInputsThrow) {
  WlsProblem<double> p;
  p.design = Matrix::Ones(3, 1);
  p.targets = vec({1, 2, 3});
  p.weights = vec({1, -1, 1});
  EXPECT_THROW(weighted_ridge_ls(p), InvalidArgument);
  p.weights = vec({0, 0, 0});
  EXPECT_THROW(weighted_ridge_ls(p), InvalidArgument);
  p.weights = vec({1, 1});
  EXPECT_THROW(weighted_ridge_ls(p), DimensionMismatch);
  p.weights = vec({1, 1, 1});
  p.ridge = -1.0;
  EXPECT_THROW(weighted_ridge_ls(p), InvalidArgument);
}

TEST(RandomStream, SameSeedSameDraws) {
  RandomStream a(7);
  RandomStream b(7);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
    EXPECT_EQ(a.normal(), b.normal());
  }
}

TEST(RandomStream, DifferentSeedsDiffer) {
  RandomStream a(7);
  RandomStream b(8);
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(RandomStream, UniformMean) {
  RandomStream rng(1);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
  }
  EXPECT_NEAR(s / 100000, 0.5, 0.01);
}

TEST(RandomStream, BernoulliFraction) {
  RandomStream rng(2);
  int ones = 0;
  for (int i = 0; i < 100000; ++i) ones += rng.bernoulli(0.5) ? 1 : 0;
  EXPECT_NEAR(ones / 100000.0, 0.5, 0.01);
}

TEST(RandomStream, NormalMoments) {
  RandomStream rng(3);
  const int n = 100000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  EXPECT_LT(std::fabs(mean), 0.02);
  EXPECT_LT(std::fabs(s2 / n - mean * mean - 1.0), 0.05);
}

TEST(RandomStream, ChoiceInRangeAndCoversAll) {
  RandomStream rng(4);
  std::vector<int> seen(6, 0);
  for (int i = 0; i < 6000; ++i) {
    const auto c = rng.choice(6);
    ASSERT_LT(c, 6u);
    ++seen[c];
  }
  for (const int s : seen) EXPECT_GT(s, 800);
  EXPECT_THROW(rng.choice(0), InvalidArgument);
}

TEST(RandomStream, UniformRange) {
  RandomStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.0, 2.0);
    ASSERT_GE(u, -3.0);
    ASSERT_LT(u, 2.0);
  }
}

TEST(RandomStream, ForkIgnoresParentPosition) {
  RandomStream a(9);
  RandomStream b(9);
  for (int i = 0; i < 10; ++i) b.next_u64();
  RandomStream ca = a.fork("child");
  RandomStream cb = b.fork("child");
  EXPECT_EQ(ca.next_u64(), cb.next_u64());
  RandomStream i0 = a.fork("child", 0);
  RandomStream i1 = a.fork("child", 1);
  EXPECT_NE(i0.next_u64(), i1.next_u64());
  RandomStream other = a.fork("other");
  RandomStream again = a.fork("child");
  EXPECT_NE(other.next_u64(), again.next_u64());
}

}  // namespace
}  // namespace lfa
