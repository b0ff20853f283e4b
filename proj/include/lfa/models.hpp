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

#ifndef LFA_MODELS_HPP_
#define LFA_MODELS_HPP_

#include <memory>
#include <string>
#include <vector>

#include "lfa/core_math.hpp"

namespace lfa {

enum class OutputKind { kRegression, kProbability };

enum class Activation { kIdentity, kTanh, kRelu, kSigmoid };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

// Scalar-output differentiable black box. Probability models expose the
// gradient of the probability itself (post-sigmoid), not of the logit.
class Model {
 public:
  virtual ~Model() = default;

  virtual int input_dim() const = 0;
  virtual OutputKind output_kind() const = 0;
  virtual std::string kind() const = 0;

  double predict(const Vector& x) const;
  Vector gradient(const Vector& x) const;

  virtual std::unique_ptr<Model> clone() const = 0;

 protected:
  virtual double do_predict(const Vector& x) const = 0;
  virtual Vector do_gradient(const Vector& x) const = 0;

 private:
  void check_input(const Vector& x) const;
};

using ModelPtr = std::shared_ptr<const Model>;

class LinearModel final : public Model {
 public:
  LinearModel(Vector weights, double intercept);

  int input_dim() const override { return static_cast<int>(weights_.size()); }
  OutputKind output_kind() const override { return OutputKind::kRegression; }
  std::string kind() const override { return "linear"; }
  std::unique_ptr<Model> clone() const override;

  const Vector& weights() const { return weights_; }
  double intercept() const { return intercept_; }

 private:
  double do_predict(const Vector& x) const override;
  Vector do_gradient(const Vector& x) const override;

  Vector weights_;
  double intercept_;
};

class LogisticModel final : public Model {
 public:
  LogisticModel(Vector weights, double intercept);

  int input_dim() const override { return static_cast<int>(weights_.size()); }
  OutputKind output_kind() const override { return OutputKind::kProbability; }
  std::string kind() const override { return "logistic"; }
  std::unique_ptr<Model> clone() const override;

  const Vector& weights() const { return weights_; }
  double intercept() const { return intercept_; }

 private:
  double do_predict(const Vector& x) const override;
  Vector do_gradient(const Vector& x) const override;

  Vector weights_;
  double intercept_;
};

// f(x) = sum_i sin(w_i * x_i).
class SinusoidModel final : public Model {
 public:
  explicit SinusoidModel(Vector frequencies);

  int input_dim() const override { return static_cast<int>(frequencies_.size()); }
  OutputKind output_kind() const override { return OutputKind::kRegression; }
  std::string kind() const override { return "sinusoid"; }
  std::unique_ptr<Model> clone() const override;

  const Vector& frequencies() const { return frequencies_; }

 private:
  double do_predict(const Vector& x) const override;
  Vector do_gradient(const Vector& x) const override;

  Vector frequencies_;
};

// f(x) = sum_i c_i x_i^2 + w.x + b. Used for closed-form checks where the
// integrals and best approximations are known.
class QuadraticModel final : public Model {
 public:
  QuadraticModel(Vector curvature, Vector linear, double intercept);

  int input_dim() const override { return static_cast<int>(curvature_.size()); }
  OutputKind output_kind() const override { return OutputKind::kRegression; }
  std::string kind() const override { return "quadratic"; }
  std::unique_ptr<Model> clone() const override;

  const Vector& curvature() const { return curvature_; }
  const Vector& linear() const { return linear_; }
  double intercept() const { return intercept_; }

 private:
  double do_predict(const Vector& x) const override;
  Vector do_gradient(const Vector& x) const override;

  Vector curvature_;
  Vector linear_;
  double intercept_;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::kIdentity;
};

// Fully connected feed-forward network with a single output unit.
class MlpModel final : public Model {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers);

  int input_dim() const override;
  OutputKind output_kind() const override;
  std::string kind() const override { return "mlp"; }
  std::unique_ptr<Model> clone() const override;

  const std::vector<DenseLayer>& layers() const { return layers_; }

  // Pre-activations of every layer for input x, outermost last.
  std::vector<Vector> preactivations(const Vector& x) const;

  // Gradient of the output with respect to every parameter, in layer order
  // (weights row-major, then bias). Used by the trainer.
  void parameter_gradient(const Vector& x, double output_grad,
                          std::vector<DenseLayer>& accum) const;

 private:
  double do_predict(const Vector& x) const override;
  Vector do_gradient(const Vector& x) const override;

  std::vector<DenseLayer> layers_;
};

// Central finite differences with step relative_step * |x_i|, floored at 1e-7.
Vector fd_gradient(const Model& model, const Vector& x, double relative_step = 1e-5);

// Relative error |a - b|_inf / max(|b|_inf, 1e-8).
double relative_gradient_error(const Vector& analytic, const Vector& numeric);

double apply_activation(Activation a, double z);
double activation_derivative(Activation a, double z);

}  // namespace lfa

#endif  // LFA_MODELS_HPP_
