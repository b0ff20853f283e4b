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

#include "lfa/models.hpp"

#include <algorithm>
#include <cmath>

namespace lfa {
namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::kIdentity;
  if (s == "tanh") return Activation::kTanh;
  if (s == "relu") return Activation::kRelu;
  if (s == "sigmoid") return Activation::kSigmoid;
  throw InvalidArgument("unknown activation '" + s + "'");
}

double apply_activation(Activation a, double z) {
  switch (a) {
    case Activation::kIdentity: return z;
    case Activation::kTanh: return std::tanh(z);
    case Activation::kRelu: return z > 0 ? z : 0.0;
    case Activation::kSigmoid: return sigmoid(z);
  }
  return z;
}

// relu'(0) is defined as 0.
double activation_derivative(Activation a, double z) {
  switch (a) {
    case Activation::kIdentity: return 1.0;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::kRelu: return z > 0 ? 1.0 : 0.0;
    case Activation::kSigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
  }
  return 1.0;
}

void Model::check_input(const Vector& x) const {
  if (x.size() != input_dim()) {
    throw DimensionMismatch("model expects input of dimension " +
                            std::to_string(input_dim()) + ", got " +
                            std::to_string(x.size()));
  }
}

double Model::predict(const Vector& x) const {
  check_input(x);
  return do_predict(x);
}

Vector Model::gradient(const Vector& x) const {
  check_input(x);
  return do_gradient(x);
}

// ---------------------------------------------------------------------------

LinearModel::LinearModel(Vector weights, double intercept)
    : weights_(std::move(weights)), intercept_(intercept) {
  if (weights_.size() == 0) throw InvalidArgument("linear model needs d > 0");
  if (!weights_.allFinite() || !std::isfinite(intercept_)) {
    throw InvalidArgument("linear model parameters must be finite");
  }
}

std::unique_ptr<Model> LinearModel::clone() const {
  return std::make_unique<LinearModel>(*this);
}

double LinearModel::do_predict(const Vector& x) const {
  return weights_.dot(x) + intercept_;
}

Vector LinearModel::do_gradient(const Vector&) const { return weights_; }

// ---------------------------------------------------------------------------

LogisticModel::LogisticModel(Vector weights, double intercept)
    : weights_(std::move(weights)), intercept_(intercept) {
  if (weights_.size() == 0) throw InvalidArgument("logistic model needs d > 0");
  if (!weights_.allFinite() || !std::isfinite(intercept_)) {
    throw InvalidArgument("logistic model parameters must be finite");
  }
}

std::unique_ptr<Model> LogisticModel::clone() const {
  return std::make_unique<LogisticModel>(*this);
}

double LogisticModel::do_predict(const Vector& x) const {
  return sigmoid(weights_.dot(x) + intercept_);
}

Vector LogisticModel::do_gradient(const Vector& x) const {
  const double s = do_predict(x);
  return s * (1.0 - s) * weights_;
}

// ---------------------------------------------------------------------------

SinusoidModel::SinusoidModel(Vector frequencies) : frequencies_(std::move(frequencies)) {
  if (frequencies_.size() == 0) throw InvalidArgument("sinusoid model needs d > 0");
  if (!frequencies_.allFinite()) throw InvalidArgument("frequencies must be finite");
}

std::unique_ptr<Model> SinusoidModel::clone() const {
  return std::make_unique<SinusoidModel>(*this);
}

double SinusoidModel::do_predict(const Vector& x) const {
  return (frequencies_.array() * x.array()).sin().sum();
}

Vector SinusoidModel::do_gradient(const Vector& x) const {
  return (frequencies_.array() * (frequencies_.array() * x.array()).cos()).matrix();
}

// ---------------------------------------------------------------------------

QuadraticModel::QuadraticModel(Vector curvature, Vector linear, double intercept)
    : curvature_(std::move(curvature)), linear_(std::move(linear)), intercept_(intercept) {
  if (curvature_.size() == 0) throw InvalidArgument("quadratic model needs d > 0");
  if (linear_.size() != curvature_.size()) {
    throw DimensionMismatch("quadratic model curvature and linear terms differ in size");
  }
}

std::unique_ptr<Model> QuadraticModel::clone() const {
  return std::make_unique<QuadraticModel>(*this);
}

double QuadraticModel::do_predict(const Vector& x) const {
  return (curvature_.array() * x.array().square()).sum() + linear_.dot(x) + intercept_;
}

Vector QuadraticModel::do_gradient(const Vector& x) const {
  return (2.0 * curvature_.array() * x.array()).matrix() + linear_;
}

// ---------------------------------------------------------------------------

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InvalidArgument("mlp needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weights.rows() != l.bias.size() || l.weights.rows() == 0 || l.weights.cols() == 0) {
      throw DimensionMismatch("mlp layer " + std::to_string(i) + " has inconsistent shape");
    }
    if (i > 0 && l.weights.cols() != layers_[i - 1].weights.rows()) {
      throw DimensionMismatch("mlp layer " + std::to_string(i) +
                              " does not match the previous layer width");
    }
  }
  if (layers_.back().weights.rows() != 1) {
    throw InvalidArgument("mlp output layer must have a single unit");
  }
}

int MlpModel::input_dim() const { return static_cast<int>(layers_.front().weights.cols()); }

OutputKind MlpModel::output_kind() const {
  return layers_.back().activation == Activation::kSigmoid ? OutputKind::kProbability
                                                           : OutputKind::kRegression;
}

std::unique_ptr<Model> MlpModel::clone() const { return std::make_unique<MlpModel>(*this); }

std::vector<Vector> MlpModel::preactivations(const Vector& x) const {
  std::vector<Vector> pre;
  pre.reserve(layers_.size());
  Vector h = x;
  for (const auto& l : layers_) {
    Vector z = l.weights * h + l.bias;
    h = z.unaryExpr([&](double v) { return apply_activation(l.activation, v); });
    pre.push_back(std::move(z));
  }
  return pre;
}

double MlpModel::do_predict(const Vector& x) const {
  Vector h = x;
  for (const auto& l : layers_) {
    h = (l.weights * h + l.bias).unaryExpr(
        [&](double v) { return apply_activation(l.activation, v); });
  }
  return h(0);
}

Vector MlpModel::do_gradient(const Vector& x) const {
  const auto pre = preactivations(x);
  // Backpropagate d(out)/d(h) from the output unit to the input.
  Vector delta = Vector::Ones(1);
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& l = layers_[i];
    const Vector dz = delta.cwiseProduct(
        pre[i].unaryExpr([&](double v) { return activation_derivative(l.activation, v); }));
    delta = l.weights.transpose() * dz;
  }
  return delta;
}

void MlpModel::parameter_gradient(const Vector& x, double output_grad,
                                  std::vector<DenseLayer>& accum) const {
  const auto pre = preactivations(x);
  std::vector<Vector> inputs;
  inputs.reserve(layers_.size());
  inputs.push_back(x);
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i) {
    inputs.push_back(pre[i].unaryExpr(
        [&](double v) { return apply_activation(layers_[i].activation, v); }));
  }
  Vector delta = Vector::Constant(1, output_grad);
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const auto& l = layers_[i];
    const Vector dz = delta.cwiseProduct(
        pre[i].unaryExpr([&](double v) { return activation_derivative(l.activation, v); }));
    accum[i].weights.noalias() += dz * inputs[i].transpose();
    accum[i].bias += dz;
    delta = l.weights.transpose() * dz;
  }
}

// ---------------------------------------------------------------------------

Vector fd_gradient(const Model& model, const Vector& x, double relative_step) {
  if (!(relative_step > 0)) throw InvalidArgument("finite-difference step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(relative_step * std::abs(x(i)), 1e-7);
    probe(i) = x(i) + h;
    const double up = model.predict(probe);
    probe(i) = x(i) - h;
    const double down = model.predict(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_gradient_error(const Vector& analytic, const Vector& numeric) {
  check_same_size(analytic, numeric);
  const double scale = std::max(numeric.cwiseAbs().maxCoeff(), 1e-8);
  return (analytic - numeric).cwiseAbs().maxCoeff() / scale;
}

}  // namespace lfa
