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
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include "lfa/model_io.hpp"
#include "lfa/models.hpp"
#include "lfa/random.hpp"
#include "lfa/training.hpp"
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

Vector random_vector(RandomStream& rng, Eigen::Index d, double scale = 1.0) {
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

MlpModel random_mlp(RandomStream& rng, int d, std::vector<int> hidden, Activation act,
                    Activation out = Activation::kIdentity) {
  std::vector<DenseLayer> layers;
  int in = d;
  hidden.push_back(1);
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    DenseLayer layer;
    layer.weights.resize(hidden[l], in);
    layer.bias.resize(hidden[l]);
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights(i) = rng.normal() / std::sqrt(in);
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = 0.1 * rng.normal();
    layer.activation = l + 1 == hidden.size() ? out : act;
    layers.push_back(std::move(layer));
    in = hidden[l];
  }
  return MlpModel(std::move(layers));
}

bool near_relu_kink(const MlpModel& m, const Vector& x) {
  for (const auto& z : m.preactivations(x)) {
    if ((z.array().abs() < 1e-3).any()) return true;
  }
  return false;
}

std::vector<std::unique_ptr<Model>> zoo(RandomStream& rng) {
  std::vector<std::unique_ptr<Model>> out;
  out.push_back(std::make_unique<LinearModel>(vec({2, -1, 0.5}), 0.3));
  out.push_back(std::make_unique<LogisticModel>(vec({1.5, -0.7, 0.2}), -0.1));
  out.push_back(std::make_unique<SinusoidModel>(vec({1.0, 2.5, -0.5})));
  out.push_back(std::make_unique<QuadraticModel>(vec({1.0, -2.0, 0.5}), vec({0.1, 0.2, 0.3}), 1.0));
  out.push_back(std::make_unique<MlpModel>(random_mlp(rng, 3, {8, 8, 8}, Activation::kTanh)));
  out.push_back(std::make_unique<MlpModel>(random_mlp(rng, 3, {6}, Activation::kRelu)));
  out.push_back(std::make_unique<MlpModel>(
      random_mlp(rng, 3, {5, 4}, Activation::kSigmoid, Activation::kSigmoid)));
  return out;
}

TEST(Predict, Examples) {
  EXPECT_EQ(LinearModel(vec({2, -1}), 0.0).predict(vec({1, 1})), 1.0);
  EXPECT_EQ(LogisticModel(vec({0}), 0.0).predict(vec({5})), 0.5);
  EXPECT_NEAR(SinusoidModel(vec({kPi})).predict(vec({1})), 0.0, 1e-12);
}

TEST(Predict, DimensionMismatchThrows) {
  const LinearModel m(vec({2, -1}), 0.0);
  EXPECT_THROW(m.predict(vec({1})), DimensionMismatch);
  EXPECT_THROW(m.gradient(vec({1, 2, 3})), DimensionMismatch);
}

TEST(Gradient, Examples) {
  const LinearModel lin(vec({2, -1}), 0.0);
  EXPECT_EQ(lin.gradient(vec({7, -3})), vec({2, -1}));
  const SinusoidModel sin_model(vec({kPi}));
  EXPECT_NEAR(sin_model.gradient(vec({1}))(0), -kPi, 1e-12);
}

TEST(Gradient, ZooMatchesFiniteDifferences) {
  RandomStream rng(31);
  const auto models = zoo(rng);
  for (const auto& m : models) {
    int checked = 0;
    while (checked < 20) {
      const Vector x = random_vector(rng, 3);
      if (const auto* mlp = dynamic_cast<const MlpModel*>(m.get()); mlp && near_relu_kink(*mlp, x)) {
        continue;
      }
      const Vector analytic = m->gradient(x);
      EXPECT_LT(relative_gradient_error(analytic, fd_gradient(*m, x)), 1e-4) << m->kind();
      const Vector independent = oracle::fd([&](const Vector& z) { return m->predict(z); }, x);
      EXPECT_LT(relative_gradient_error(analytic, independent), 1e-4) << m->kind();
      ++checked;
    }
  }
}

TEST(FdGradient, Examples) {
  const LinearModel lin(vec({2, -1, 4}), 1.0);
  EXPECT_LT((fd_gradient(lin, vec({0.3, -2, 5})) - vec({2, -1, 4})).cwiseAbs().maxCoeff(), 1e-9);
  const QuadraticModel sq(vec({1}), vec({0}), 0.0);
  EXPECT_NEAR(fd_gradient(sq, vec({3}))(0), 6.0, 1e-6);
}

TEST(Models, LinearGradientIsInputIndependent) {
  RandomStream rng(32);
  const LinearModel m(vec({1, -2, 3}), 0.5);
  for (int t = 0; t < 20; ++t) EXPECT_EQ(m.gradient(random_vector(rng, 3, 5.0)), m.weights());
}

TEST(Models, LogisticGradientParallelToWeights) {
  RandomStream rng(33);
  const LogisticModel m(vec({1, -2, 3}), 0.5);
  for (int t = 0; t < 20; ++t) {
    const Vector x = random_vector(rng, 3);
    const double p = m.predict(x);
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
    const Vector g = m.gradient(x);
    EXPECT_NEAR(1.0 - g.dot(m.weights()) / (g.norm() * m.weights().norm()), 0.0, 1e-12);
    EXPECT_LT((g - p * (1 - p) * m.weights()).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Models, SinusoidVanishesOnEveryMask) {
  // w_i = n_i pi / x0_i makes every masked input a zero of the sinusoid.
  const Vector x0 = vec({0.3, 1.7, -0.9, 2.2, 0.5, 1.1, -1.3, 0.8});
  const int d = static_cast<int>(x0.size());
  Vector w(d);
  for (int i = 0; i < d; ++i) w(i) = (i + 1) * kPi / x0(i);
  const SinusoidModel m(w);
  for (int mask = 0; mask < (1 << d); ++mask) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x(i) = (mask >> i) & 1 ? x0(i) : 0.0;
    EXPECT_LT(std::fabs(m.predict(x)), 1e-12);
  }
}

TEST(Models, ReluGradientAtKinkIsZero) {
  std::vector<DenseLayer> layers(2);
  layers[0].weights = Matrix::Identity(1, 1);
  layers[0].bias = Vector::Zero(1);
  layers[0].activation = Activation::kRelu;
  layers[1].weights = Matrix::Ones(1, 1);
  layers[1].bias = Vector::Zero(1);
  const MlpModel m(layers);
  EXPECT_EQ(m.gradient(vec({0}))(0), 0.0);
  EXPECT_EQ(m.gradient(vec({1}))(0), 1.0);
}

TEST(Models, MlpProbabilityOutputInUnitInterval) {
  RandomStream rng(34);
  const MlpModel m = random_mlp(rng, 2, {4}, Activation::kTanh, Activation::kSigmoid);
  EXPECT_EQ(m.output_kind(), OutputKind::kProbability);
  for (int t = 0; t < 50; ++t) {
    const double p = m.predict(random_vector(rng, 2, 3.0));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(Models, ActivationNamesRoundTrip) {
  for (const auto a : {Activation::kIdentity, Activation::kTanh, Activation::kRelu, Activation::kSigmoid}) {
    EXPECT_EQ(activation_from_string(to_string(a)), a);
  }
  EXPECT_THROW(activation_from_string("softplus"), InvalidArgument);
}

TEST(ModelIo, RoundTripIsBitExact) {
  RandomStream rng(35);
  const auto models = zoo(rng);
  const auto dir = std::filesystem::temp_directory_path() / "lfa_model_io_test";
  std::filesystem::create_directories(dir);
  for (const auto& m : models) {
    const auto path = (dir / (m->kind() + ".json")).string();
    save_model(*m, path);
    const auto back = load_model(path);
    ASSERT_EQ(back->kind(), m->kind());
    for (int t = 0; t < 10; ++t) {
      const Vector x = random_vector(rng, 3);
      EXPECT_EQ(back->predict(x), m->predict(x));
      EXPECT_EQ(back->gradient(x), m->gradient(x));
    }
    EXPECT_EQ(model_to_json(*back).dump(), model_to_json(*m).dump());
  }
  std::filesystem::remove_all(dir);
}

TEST(ModelIo, FormatDoubleRoundTrips) {
  RandomStream rng(36);
  for (int t = 0; t < 1000; ++t) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-30, 30));
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(parse_double(format_double(0.1)), 0.1);
  EXPECT_THROW(format_double(NAN), InvalidArgument);
  EXPECT_THROW(parse_double("1.5x"), ParseError);
}

TEST(ModelIo, MalformedDocumentsThrow) {
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"kind":"tree"})")), ParseError);
  EXPECT_THROW(model_from_json(nlohmann::json::parse(R"({"kind":"linear"})")), ParseError);
  EXPECT_THROW(load_model("/nonexistent/model.json"), Error);
}

TEST(TrainSgd, RecoversNoiselessLinearRegression) {
  RandomStream rng(41);
  const int n = 400;
  Matrix x(n, 2);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-1, 1);
    x(i, 1) = rng.uniform(-1, 1);
    y(i) = 3 * x(i, 0) - 2 * x(i, 1);
  }
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 5;
  const MlpModel net = train_sgd(x, y, Architecture::linear(), cfg);
  const auto lin = simplify(net);
  const auto* m = dynamic_cast<const LinearModel*>(lin.get());
  ASSERT_NE(m, nullptr);
  EXPECT_LT((m->weights() - vec({3, -2})).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(TrainSgd, SeparatesBlobs) {
  RandomStream rng(42);
  const int n = 400;
  Matrix x(n, 2);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    const double c = i % 2 ? 2.0 : -2.0;
    x(i, 0) = c + 0.5 * rng.normal();
    x(i, 1) = c + 0.5 * rng.normal();
    y(i) = i % 2;
  }
  TrainConfig cfg;
  cfg.epochs = 100;
  cfg.seed = 6;
  const MlpModel net = train_sgd(x, y, Architecture::logistic(), cfg);
  EXPECT_GE(accuracy(net, x, y), 0.99);
  EXPECT_NE(dynamic_cast<const LogisticModel*>(simplify(net).get()), nullptr);
}

TEST(TrainSgd, DeterministicAndLossDecreases) {
  RandomStream rng(43);
  const int n = 300;
  Matrix x(n, 3);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform();
    y(i) = std::sin(3 * x(i, 0)) + x(i, 1) * x(i, 2);
  }
  TrainConfig cfg;
  cfg.epochs = 60;
  cfg.seed = 9;
  TrainHistory h1;
  TrainHistory h2;
  const MlpModel a = train_sgd(x, y, Architecture::default_regression_net(), cfg, &h1);
  const MlpModel b = train_sgd(x, y, Architecture::default_regression_net(), cfg, &h2);
  EXPECT_EQ(model_to_json(a).dump(), model_to_json(b).dump());
  ASSERT_EQ(h1.epoch_loss.size(), 60u);
  EXPECT_LT(h1.epoch_loss.back(), h1.epoch_loss.front());
}

TEST(TrainSgd, InvalidInputsThrow) {
  TrainConfig cfg;
  EXPECT_THROW(train_sgd(Matrix(0, 2), Vector(0), Architecture::linear(), cfg), InvalidArgument);
  EXPECT_THROW(train_sgd(Matrix::Ones(3, 2), Vector::Ones(4), Architecture::linear(), cfg),
               DimensionMismatch);
  Vector bad = Vector::Ones(3);
  bad(1) = NAN;
  EXPECT_THROW(train_sgd(Matrix::Ones(3, 2), bad, Architecture::linear(), cfg), Error);
}

}  // namespace
}  // namespace lfa
