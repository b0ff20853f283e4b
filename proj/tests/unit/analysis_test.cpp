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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "lfa/analysis.hpp"
#include "lfa/models.hpp"
#include "oracles.hpp"

namespace lfa {
namespace {

constexpr double kPi = std::numbers::pi;

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out(i++) = x;
  return out;
}

MlpModel small_mlp(std::uint64_t seed, int d) {
  RandomStream rng(seed);
  std::vector<DenseLayer> layers;
  int in = d;
  for (const int width : {8, 8, 8, 1}) {
    DenseLayer l;
    l.weights.resize(width, in);
    l.bias.resize(width);
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights(i) = rng.normal() * 1.5 / std::sqrt(in);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.1 * rng.normal();
    l.activation = width == 1 ? Activation::kIdentity : Activation::kTanh;
    layers.push_back(std::move(l));
    in = width;
  }
  return MlpModel(std::move(layers));
}

const std::vector<Method> kMaskMethods = {Method::kLime, Method::kKernelShap, Method::kOcclusion};

// ---------------------------------------------------------------------------
// Recovery

TEST(Recovery, Examples) {
  const LinearModel f(vec({2, -1, 0.5}), 0.0);
  RandomStream rng(151);
  const auto sg = check_recovery(Method::kSmoothGrad, ModelFamily::kLinear, f, vec({1, 1, 1}), rng);
  EXPECT_EQ(sg.target, RecoveryTarget::kModelWeights);
  EXPECT_LT(sg.l1, 1e-6);
  EXPECT_TRUE(sg.recovered);

  const auto gxi = check_recovery(Method::kGradXInput, ModelFamily::kLinear, f, vec({3, 2, 1}), rng);
  EXPECT_EQ(gxi.target, RecoveryTarget::kWeightsTimesInput);
  EXPECT_EQ(gxi.target_weights, vec({6, -2, 0.5}));
  EXPECT_TRUE(gxi.recovered);
  EXPECT_GT(gxi.l1_to_model_weights, 1.0);

  const SinusoidModel s(vec({kPi}));
  const auto lime = check_recovery(Method::kLime, ModelFamily::kSinusoid, s, vec({1}), rng);
  EXPECT_EQ(lime.target, RecoveryTarget::kZero);
  EXPECT_LT(lime.weights.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(lime.recovered);
  EXPECT_TRUE(std::isnan(lime.cosine));
}

TEST(Recovery, DichotomyOnRandomLinearModels) {
  RandomStream gen(152);
  for (int t = 0; t < 5; ++t) {
    Vector w(4);
    Vector x0(4);
    for (int j = 0; j < 4; ++j) {
      w(j) = gen.uniform(-2, 2);
      x0(j) = gen.uniform(0.2, 1.5) * (gen.bernoulli(0.5) ? 1 : -1);
    }
    const LinearModel f(w, gen.normal());
    for (const Method m : kAllMethods) {
      RandomStream rng = gen.fork(to_string(m), static_cast<std::uint64_t>(t));
      const auto r = check_recovery(m, ModelFamily::kLinear, f, x0, rng);
      if (is_additive_method(m)) {
        EXPECT_LT(oracle::l1_loop(r.weights, w), 1e-3 * w.cwiseAbs().sum()) << to_string(m);
      } else {
        const Vector target = w.cwiseProduct(x0);
        EXPECT_LT(oracle::l1_loop(r.weights, target), 1e-2 * target.cwiseAbs().sum()) << to_string(m);
      }
      EXPECT_TRUE(r.recovered) << to_string(m);
      EXPECT_EQ(r.recovered, r.threshold > (r.target == RecoveryTarget::kZero ? r.linf : r.relative_l1));
    }
  }
}

TEST(Recovery, LogisticAdditiveMethodsAreNotExact) {
  const LogisticModel f(vec({1.0, -2.0}), 0.1);
  RandomStream rng(153);
  const auto r = check_recovery(Method::kSmoothGrad, ModelFamily::kLogistic, f, vec({0.5, 0.5}), rng);
  EXPECT_EQ(r.target, RecoveryTarget::kModelWeights);
  EXPECT_FALSE(r.recovered);
  EXPECT_LT(r.cosine, 1e-6);
}

TEST(Recovery, SinusoidMaskMethodsReturnZero) {
  RandomStream gen(154);
  for (int t = 0; t < 5; ++t) {
    Vector x0(3);
    Vector w(3);
    for (int j = 0; j < 3; ++j) {
      x0(j) = gen.uniform(0.3, 2.0);
      w(j) = static_cast<double>(1 + gen.choice(4)) * kPi / x0(j);
    }
    const SinusoidModel f(w);
    for (const Method m : kMaskMethods) {
      RandomStream rng = gen.fork(to_string(m), static_cast<std::uint64_t>(t));
      const auto r = check_recovery(m, ModelFamily::kSinusoid, f, x0, rng);
      EXPECT_LT(r.weights.cwiseAbs().maxCoeff(), 1e-8) << to_string(m);
      EXPECT_TRUE(r.recovered);
    }
  }
}

TEST(Recovery, FamilyMismatchThrows) {
  const LinearModel f(vec({1, 2}), 0.0);
  RandomStream rng(155);
  EXPECT_THROW(check_recovery(Method::kLime, ModelFamily::kSinusoid, f, vec({1, 1}), rng), InvalidArgument);
  EXPECT_EQ(family_from_string("logistic"), ModelFamily::kLogistic);
  EXPECT_THROW(family_from_string("tree"), InvalidArgument);
}

TEST(Reparam, Examples) {
  RandomStream rng(156);
  const LinearModel f2(vec({2, -1}), 0.0);
  const auto gxi = reparam_recovery_check(Method::kGradXInput, f2, vec({3, 2}), rng);
  EXPECT_LT((gxi.weights - vec({2, -1})).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_TRUE(gxi.recovered);

  const LinearModel f3(vec({1, 1, 1}), 0.0);
  const Vector x0 = vec({1, 2, 3});
  const auto lime = reparam_recovery_check(Method::kLime, f3, x0, rng);
  EXPECT_LT((lime.weights - vec({1, 1, 1})).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Reparam, MatchesWeightedRidgeOracleOnMaskedDesign) {
  const LinearModel f(vec({1, 1, 1}), 0.0);
  const Vector x0 = vec({1, 2, 3});
  MethodParams p;
  p.param = SurrogateParam::kOfPerturbedInput;
  const LfaInstance inst = registry(Method::kLime, p);
  RandomStream rng(157);
  const auto pset = sample_perturbations(inst.neighborhood, f, x0, rng, false);
  const auto ref = oracle::wls(pset.points, pset.values, pset.weights, inst.ridge, true);
  EXPECT_LT((ref.w - vec({1, 1, 1})).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_LT((fit_closed_form(inst, pset).weights - ref.w).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Reparam, AllMethodsOnLinear) {
  const LinearModel f(vec({1.5, -0.5, 2.0, 0.7}), 0.4);
  RandomStream gen(158);
  for (int t = 0; t < 3; ++t) {
    Vector x0(4);
    for (int j = 0; j < 4; ++j) x0(j) = gen.uniform(0.5, 2.0);
    for (const Method m : {Method::kIntegratedGradients, Method::kGradXInput, Method::kLime,
                           Method::kKernelShap}) {
      RandomStream rng = gen.fork(to_string(m), static_cast<std::uint64_t>(t));
      const auto r = reparam_recovery_check(m, f, x0, rng);
      EXPECT_LT(r.linf, 1e-3) << to_string(m);
      EXPECT_TRUE(r.recovered);
    }
  }
}

TEST(Reparam, ZeroCoordinateIsDegenerate) {
  const LinearModel f(vec({1, 1}), 0.0);
  RandomStream rng(159);
  EXPECT_THROW(reparam_recovery_check(Method::kLime, f, vec({1, 0}), rng), DegenerateVector);
  EXPECT_THROW(reparam_recovery_check(Method::kSmoothGrad, f, vec({1, 1}), rng), InvalidArgument);
}

// ---------------------------------------------------------------------------
// Class distance and NFL

TEST(ClassDistance, SineMatchesGridOracle) {
  const SinusoidModel f(vec({1.0}));
  RandomStream rng(161);
  DistanceSearchConfig cfg;
  cfg.loss = PointwiseLoss::kAbsolute;
  const auto d = estimate_class_distance(f, DomainBox::cube(1, -kPi, kPi), rng, cfg);
  const double grid = oracle::minimax_grid_1d([](double x) { return std::sin(x); }, -kPi, kPi, 0.0,
                                              0.6, -0.3, 0.3, 301, 1001);
  EXPECT_NEAR(d.d_hat, grid, 0.05 * grid);
  EXPECT_TRUE(d.converged);
}

TEST(ClassDistance, LinearModelIsInClass) {
  const LinearModel f(vec({1.0, -2.0}), 0.5);
  RandomStream rng(162);
  const auto d = estimate_class_distance(f, DomainBox::cube(2, -1, 1), rng);
  EXPECT_LT(d.d_hat, 1e-6);
}

TEST(ClassDistance, SquareOnUnitInterval) {
  const QuadraticModel f(vec({1}), vec({0}), 0.0);
  const double grid = oracle::minimax_grid_1d([](double x) { return x * x; }, -1, 1, -0.5, 0.5,
                                              0.0, 1.0, 201, 1001);
  EXPECT_NEAR(grid, 0.5, 0.01);
  RandomStream rng(163);
  const auto d = estimate_class_distance(f, DomainBox::cube(1, -1, 1), rng);
  EXPECT_NEAR(d.residual, grid, 0.05 * grid);
  EXPECT_NEAR(d.d_hat, 0.125, 0.05 * 0.125);
}

TEST(ClassDistance, LossesAndBoxes) {
  EXPECT_EQ(apply_loss(PointwiseLoss::kAbsolute, -0.5), 0.5);
  EXPECT_EQ(apply_loss(PointwiseLoss::kSquared, -0.5), 0.25);
  EXPECT_EQ(apply_loss(PointwiseLoss::kHalfSquared, -0.5), 0.125);
  EXPECT_THROW(validate(DomainBox{vec({0}), vec({0})}), InvalidArgument);
  EXPECT_THROW(validate(DomainBox{vec({0}), vec({INFINITY})}), InvalidArgument);
}

TEST(Nfl, SineConstruction) {
  const SinusoidModel f(vec({1.0}));
  NeighborhoodSpec z1;
  z1.noise = GaussianAdditive{0.01};
  RandomStream rng(164);
  const auto r = nfl_construct(f, vec({0}), z1, DomainBox::cube(1, -kPi, kPi), rng);
  EXPECT_LT(r.eps_hat, 0.01);
  EXPECT_GE(r.z2_max_loss, r.distance.d_hat);
  EXPECT_TRUE(r.inequality_held);
  // The benign fit is the local tangent, so the adversary sits at a box edge.
  EXPECT_NEAR(std::fabs(r.x_adv(0)), kPi, 1e-6);
}

TEST(Nfl, InequalityHoldsOnSeveralTriples) {
  struct Case {
    std::unique_ptr<Model> f;
    Vector x0;
  };
  std::vector<Case> cases;
  cases.push_back({std::make_unique<SinusoidModel>(vec({2.0})), vec({0.5})});
  cases.push_back({std::make_unique<QuadraticModel>(vec({1, -1}), vec({0.2, 0}), 0.0), vec({0.1, -0.2})});
  cases.push_back({std::make_unique<SinusoidModel>(vec({1.0, 0.5})), vec({0.3, 0.3})});
  for (auto& c : cases) {
    NeighborhoodSpec z1;
    z1.noise = GaussianAdditive{0.01};
    RandomStream rng(165);
    const auto r = nfl_construct(*c.f, c.x0, z1, DomainBox::cube(c.x0.size(), -kPi, kPi), rng);
    EXPECT_GE(r.z2_max_loss, 0.95 * r.distance.d_hat) << c.f->kind();
    EXPECT_TRUE(r.inequality_held);
  }
}

TEST(Nfl, LinearModelIsTrivial) {
  const LinearModel f(vec({1.0}), 0.2);
  NeighborhoodSpec z1;
  z1.noise = GaussianAdditive{0.01};
  RandomStream rng(166);
  const auto r = nfl_construct(f, vec({0.3}), z1, DomainBox::cube(1, -kPi, kPi), rng);
  EXPECT_LT(r.distance.d_hat, 1e-6);
  EXPECT_LT(r.z2_max_loss, 1e-6);
  EXPECT_TRUE(r.inequality_held);
}

TEST(Nfl, Deterministic) {
  const SinusoidModel f(vec({1.0}));
  NeighborhoodSpec z1;
  z1.noise = GaussianAdditive{0.01};
  RandomStream a(167);
  RandomStream b(167);
  const auto r1 = nfl_construct(f, vec({0}), z1, DomainBox::cube(1, -kPi, kPi), a);
  const auto r2 = nfl_construct(f, vec({0}), z1, DomainBox::cube(1, -kPi, kPi), b);
  EXPECT_EQ(r1.z2_max_loss, r2.z2_max_loss);
  EXPECT_EQ(r1.x_adv, r2.x_adv);
  EXPECT_EQ(r1.g_weights, r2.g_weights);
}

TEST(Nfl, OutsideBoxThrows) {
  const SinusoidModel f(vec({1.0}));
  RandomStream rng(168);
  EXPECT_THROW(nfl_construct(f, vec({5}), NeighborhoodSpec{}, DomainBox::cube(1, -kPi, kPi), rng),
               InvalidArgument);
}

// ---------------------------------------------------------------------------
// Equivalence

TEST(Equivalence, LinearAnalyticExample) {
  const LinearModel f(vec({2, -1}), 0.0);
  Matrix points(1, 2);
  points << 3, 2;
  const auto r = equivalence_matrix(f, points, {Method::kVanillaGradients, Method::kGradXInput},
                                    RandomStream(171));
  EXPECT_NEAR(r.l1(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(r.l1(1, 1), 0.0, 1e-12);
  EXPECT_NEAR(r.l1(0, 1), 5.0, 1e-12);
  EXPECT_NEAR(r.l1(1, 0), 5.0, 1e-12);
  EXPECT_TRUE(r.diagonal_dominant());
}

TEST(Equivalence, DiagonalDominantOnMlp) {
  const MlpModel f = small_mlp(172, 5);
  RandomStream gen(173);
  Matrix points(8, 5);
  for (Eigen::Index i = 0; i < points.size(); ++i) points(i) = gen.uniform();
  const std::vector<Method> methods(kAllMethods.begin(), kAllMethods.end());
  EquivalenceConfig cfg;
  cfg.threads = 4;
  const auto r = equivalence_matrix(f, points, methods, RandomStream(174), cfg);
  const auto argmin = r.row_argmin();
  for (std::size_t i = 0; i < methods.size(); ++i) {
    EXPECT_EQ(argmin[i], static_cast<Eigen::Index>(i)) << to_string(methods[i]);
  }
  // Triangle inequality through the shared reference/instance pairs bounds
  // the asymmetry of the matrix by its diagonal.
  for (Eigen::Index i = 0; i < r.l1.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.l1.cols(); ++j) {
      EXPECT_LE(std::fabs(r.l1(i, j) - r.l1(j, i)), r.l1(i, i) + r.l1(j, j) + 1e-12);
    }
  }
}

TEST(Equivalence, ThreadCountDoesNotChangeResult) {
  const MlpModel f = small_mlp(175, 3);
  RandomStream gen(176);
  Matrix points(5, 3);
  for (Eigen::Index i = 0; i < points.size(); ++i) points(i) = gen.uniform();
  const std::vector<Method> methods(kAllMethods.begin(), kAllMethods.end());
  EquivalenceConfig one;
  EquivalenceConfig many;
  many.threads = 3;
  const auto a = equivalence_matrix(f, points, methods, RandomStream(177), one);
  const auto b = equivalence_matrix(f, points, methods, RandomStream(177), many);
  EXPECT_EQ(a.l1, b.l1);
  EXPECT_EQ(a.cosine, b.cosine);
}

TEST(Equivalence, SafeCosine) {
  EXPECT_EQ(safe_cosine_distance(vec({0, 0}), vec({0, 0})), 0.0);
  EXPECT_EQ(safe_cosine_distance(vec({0, 0}), vec({1, 0})), 1.0);
  EXPECT_NEAR(safe_cosine_distance(vec({1, 0}), vec({0, 1})), 1.0, 1e-15);
}

TEST(Equivalence, ClusterSeparation) {
  EquivalenceResult r;
  r.methods = {Method::kSmoothGrad, Method::kVanillaGradients, Method::kLime, Method::kOcclusion};
  r.l1 = Matrix(4, 4);
  r.l1 << 0, 1, 5, 5,
          1, 0, 5, 5,
          5, 5, 0, 2,
          5, 5, 2, 0;
  const auto s = cluster_separation(r, r.l1, {Method::kSmoothGrad, Method::kVanillaGradients},
                                    {Method::kLime, Method::kOcclusion});
  EXPECT_DOUBLE_EQ(s.within, 1.5);
  EXPECT_DOUBLE_EQ(s.cross, 5.0);
}

// ---------------------------------------------------------------------------
// Perturbation tests

TEST(Perturbation, Examples) {
  const LinearModel f(vec({5, 0.1, 3}), 0.0);
  const Vector x0 = vec({1, 1, 1});
  PerturbConfig cfg;
  RandomStream rng(181);
  EXPECT_NEAR(perturbation_delta(f, x0, bottom_k(f.weights(), 1), cfg, rng), 0.1, 1e-15);
  EXPECT_EQ(perturbation_delta(f, x0, bottom_k(f.weights(), 0), cfg, rng), 0.0);
  EXPECT_THROW(bottom_k(f.weights(), 3), InvalidArgument);
}

TEST(Perturbation, BottomKTiesToLowerIndex) {
  const auto idx = bottom_k(vec({1, -0.5, 0.5, 2, 0.5}), 3);
  EXPECT_EQ(idx, (std::vector<Eigen::Index>{1, 2, 4}));
}

TEST(Perturbation, GaussianDeltaOnLinearHasKnownMean) {
  // |w_i * sigma * z| has mean |w_i| sigma sqrt(2 / pi).
  const LinearModel f(vec({2, 0, 0}), 0.0);
  PerturbConfig cfg;
  cfg.noise = PerturbNoise::kGaussian;
  cfg.sigma = 0.1;
  cfg.trials = 200000;
  RandomStream rng(182);
  EXPECT_NEAR(perturbation_delta(f, vec({1, 1, 1}), {0}, cfg, rng), 0.2 * std::sqrt(2 / kPi), 2e-3);
}

TEST(Perturbation, RandomAttributionIsNoBetterThanExact) {
  const LinearModel f(vec({5, 0.1, 3, 0.5, -2}), 0.0);
  RandomStream gen(183);
  Matrix points(100, 5);
  for (Eigen::Index i = 0; i < points.size(); ++i) points(i) = gen.uniform(0.5, 1.5);
  std::vector<Vector> exact;
  std::vector<Vector> random;
  for (Eigen::Index p = 0; p < points.rows(); ++p) {
    exact.push_back(f.weights().cwiseProduct(points.row(p).transpose()));
    Vector r(5);
    for (int j = 0; j < 5; ++j) r(j) = gen.normal();
    random.push_back(r);
  }
  for (const auto noise : {PerturbNoise::kBinaryZero, PerturbNoise::kGaussian}) {
    PerturbConfig cfg;
    cfg.ks = {1, 2, 3, 4};
    cfg.noise = noise;
    const auto a = perturbation_test(f, points, exact, "exact", cfg, RandomStream(184));
    const auto b = perturbation_test(f, points, random, "random", cfg, RandomStream(184));
    for (std::size_t k = 0; k < cfg.ks.size(); ++k) {
      EXPECT_LE(a.mean_abs_delta[k], b.mean_abs_delta[k]) << to_string(noise) << " k=" << cfg.ks[k];
    }
  }
}

TEST(Perturbation, CurveInvariantsAndErrors) {
  const MlpModel f = small_mlp(185, 4);
  Matrix points = Matrix::Constant(3, 4, 0.5);
  std::vector<Vector> attr(3, vec({1, 2, 3, 4}));
  PerturbConfig cfg;
  cfg.ks = {0, 1, 3};
  const auto c = perturbation_test(f, points, attr, "m", cfg, RandomStream(186));
  EXPECT_EQ(c.mean_abs_delta[0], 0.0);
  for (const double v : c.mean_abs_delta) EXPECT_GE(v, 0.0);
  cfg.ks = {2, 1};
  EXPECT_THROW(perturbation_test(f, points, attr, "m", cfg, RandomStream(186)), InvalidArgument);
  cfg.ks = {4};
  EXPECT_THROW(perturbation_test(f, points, attr, "m", cfg, RandomStream(186)), InvalidArgument);
  attr.pop_back();
  cfg.ks = {1};
  EXPECT_THROW(perturbation_test(f, points, attr, "m", cfg, RandomStream(186)), DimensionMismatch);
}

TEST(Perturbation, SignTestCountsPointWins) {
  PerturbCurve a;
  a.ks = {1};
  a.per_point = Matrix(3, 1);
  a.per_point << 0.1, 0.5, 0.2;
  PerturbCurve b = a;
  b.per_point << 0.2, 0.4, 0.2;
  const auto t = sign_test({a}, {b});
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].wins, 2);
  EXPECT_EQ(t[0].points, 3);
}

}  // namespace
}  // namespace lfa
