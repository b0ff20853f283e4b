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

#ifndef LFA_TRAINING_HPP_
#define LFA_TRAINING_HPP_

#include <cstdint>
#include <vector>

#include "lfa/models.hpp"

namespace lfa {

struct Architecture {
  std::vector<int> hidden;  // widths of the hidden layers; empty = linear
  Activation hidden_activation = Activation::kTanh;
  // kIdentity trains with mean squared error, kSigmoid with cross entropy.
  Activation output_activation = Activation::kIdentity;

  static Architecture linear() { return {{}, Activation::kTanh, Activation::kIdentity}; }
  static Architecture logistic() { return {{}, Activation::kTanh, Activation::kSigmoid}; }
  // Three hidden layers of eight tanh units.
  static Architecture default_regression_net() {
    return {{8, 8, 8}, Activation::kTanh, Activation::kIdentity};
  }
};

struct TrainConfig {
  int epochs = 300;
  int batch_size = 64;
  double learning_rate = 0.05;
  double momentum = 0.9;
  bool cosine_annealing = true;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

MlpModel train_sgd(const Matrix& features, const Vector& targets, const Architecture& arch,
                   const TrainConfig& cfg, TrainHistory* history = nullptr);

// Converts a network without hidden layers into the equivalent closed-form
// model (LinearModel for identity output, LogisticModel for sigmoid output).
std::unique_ptr<Model> simplify(const MlpModel& model);

double mean_squared_error(const Model& model, const Matrix& features, const Vector& targets);
// Fraction of rows where (predict >= 0.5) matches (target >= 0.5).
double accuracy(const Model& model, const Matrix& features, const Vector& targets);

}  // namespace lfa

#endif  // LFA_TRAINING_HPP_
