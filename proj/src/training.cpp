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

#include "lfa/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lfa/random.hpp"

namespace lfa {
namespace {

void validate(const Matrix& features, const Vector& targets, const TrainConfig& cfg) {
  if (features.rows() == 0 || features.cols() == 0) {
    throw InvalidArgument("training data is empty");
  }
  if (targets.size() != features.rows()) {
    throw DimensionMismatch("features and targets disagree on row count");
  }
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0)) {
    throw InvalidArgument("epochs, batch size and learning rate must be positive");
  }
  if (!features.allFinite() || !targets.allFinite()) {
    throw InvalidArgument("training data contains non-finite values");
  }
}

std::vector<DenseLayer> init_layers(int input_dim, const Architecture& arch, RandomStream& rng) {
  std::vector<int> widths = {input_dim};
  widths.insert(widths.end(), arch.hidden.begin(), arch.hidden.end());
  widths.push_back(1);

  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const int in = widths[i];
    const int out = widths[i + 1];
    const bool last = i + 2 == widths.size();
    DenseLayer l;
    l.activation = last ? arch.output_activation : arch.hidden_activation;
    if (arch.hidden.empty()) {
      // Convex problem: start from zero.
      l.weights = Matrix::Zero(out, in);
    } else {
      // Glorot uniform.
      const double limit = std::sqrt(6.0 / (in + out));
      l.weights.resize(out, in);
      for (Eigen::Index r = 0; r < out; ++r)
        for (Eigen::Index c = 0; c < in; ++c) l.weights(r, c) = rng.uniform(-limit, limit);
    }
    l.bias = Vector::Zero(out);
    layers.push_back(std::move(l));
  }
  return layers;
}

std::vector<DenseLayer> zeros_like(const std::vector<DenseLayer>& layers) {
  std::vector<DenseLayer> z;
  z.reserve(layers.size());
  for (const auto& l : layers) {
    z.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()),
                 Vector::Zero(l.bias.size()), l.activation});
  }
  return z;
}

// Per-sample loss and d(loss)/d(output).
std::pair<double, double> sample_loss(Activation output, double pred, double target) {
  if (output == Activation::kSigmoid) {
    const double p = std::clamp(pred, 1e-12, 1.0 - 1e-12);
    const double loss = -(target * std::log(p) + (1.0 - target) * std::log(1.0 - p));
    // Cross entropy composed with the sigmoid: d/dz = p - y. Divide by the
    // sigmoid derivative so that backprop through the output unit recovers it.
    const double dsig = std::max(p * (1.0 - p), 1e-12);
    return {loss, (p - target) / dsig};
  }
  const double r = pred - target;
  return {r * r, 2.0 * r};
}

}  // namespace

MlpModel train_sgd(const Matrix& features, const Vector& targets, const Architecture& arch,
                   const TrainConfig& cfg, TrainHistory* history) {
  validate(features, targets, cfg);
  RandomStream rng(cfg.seed);
  RandomStream init_rng = rng.fork("init");
  RandomStream shuffle_rng = rng.fork("shuffle");

  MlpModel model(init_layers(static_cast<int>(features.cols()), arch, init_rng));
  std::vector<DenseLayer> params = model.layers();
  std::vector<DenseLayer> velocity = zeros_like(params);

  const Eigen::Index n = features.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double lr = cfg.learning_rate;
    if (cfg.cosine_annealing) {
      lr = 0.5 * cfg.learning_rate * (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs));
    }
    for (Eigen::Index i = n - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(shuffle_rng.choice(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index stop = std::min<Eigen::Index>(start + cfg.batch_size, n);
      auto grad = zeros_like(params);
      for (Eigen::Index k = start; k < stop; ++k) {
        const Eigen::Index row = order[static_cast<std::size_t>(k)];
        const Vector x = features.row(row).transpose();
        const double pred = model.predict(x);
        const auto [loss, dout] = sample_loss(arch.output_activation, pred, targets(row));
        epoch_loss += loss;
        model.parameter_gradient(x, dout, grad);
      }
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (std::size_t li = 0; li < params.size(); ++li) {
        velocity[li].weights = cfg.momentum * velocity[li].weights - lr * scale * grad[li].weights;
        velocity[li].bias = cfg.momentum * velocity[li].bias - lr * scale * grad[li].bias;
        params[li].weights += velocity[li].weights;
        params[li].bias += velocity[li].bias;
      }
      model = MlpModel(params);
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw NumericalFailure("training loss became non-finite at epoch " +
                             std::to_string(epoch) + "; lower the learning rate");
    }
    if (history) history->epoch_loss.push_back(epoch_loss);
  }
  return model;
}

std::unique_ptr<Model> simplify(const MlpModel& model) {
  const auto& layers = model.layers();
  if (layers.size() != 1) throw InvalidArgument("only networks without hidden layers simplify");
  const Vector w = layers[0].weights.row(0).transpose();
  const double b = layers[0].bias(0);
  switch (layers[0].activation) {
    case Activation::kIdentity: return std::make_unique<LinearModel>(w, b);
    case Activation::kSigmoid: return std::make_unique<LogisticModel>(w, b);
    default: throw InvalidArgument("output activation has no closed-form counterpart");
  }
}

double mean_squared_error(const Model& model, const Matrix& features, const Vector& targets) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const double r = model.predict(features.row(i).transpose()) - targets(i);
    s += r * r;
  }
  return s / static_cast<double>(std::max<Eigen::Index>(features.rows(), 1));
}

double accuracy(const Model& model, const Matrix& features, const Vector& targets) {
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const bool pred = model.predict(features.row(i).transpose()) >= 0.5;
    if (pred == (targets(i) >= 0.5)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(std::max<Eigen::Index>(features.rows(), 1));
}

}  // namespace lfa
