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

#ifndef LFA_ENGINE_HPP_
#define LFA_ENGINE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lfa/core_math.hpp"
#include "lfa/models.hpp"
#include "lfa/neighborhoods.hpp"
#include "lfa/random.hpp"

namespace lfa {

enum class LossKind { kSquaredError, kGradientMatching };
enum class Penalty { kL0, kL1 };

struct Regularization {
  double lambda = 0.0;
  Penalty penalty = Penalty::kL0;
};

// A regularized loss is minimized as 0.5 * E[base] + lambda * penalty(w),
// which makes the L0 case a hard threshold at w^2 > 2 lambda and the L1
// case a soft threshold at lambda (for an identity gradient map).
struct LossSpec {
  LossKind kind = LossKind::kSquaredError;
  std::optional<Regularization> regularization;

  static LossSpec squared_error() { return {LossKind::kSquaredError, std::nullopt}; }
  static LossSpec gradient_matching() { return {LossKind::kGradientMatching, std::nullopt}; }
  static LossSpec regularized(LossSpec base, double lambda, Penalty penalty);
};

// Whether the linear surrogate reads the noise xi or the perturbed input
// x0 (+) xi.
enum class SurrogateParam { kOfNoise, kOfPerturbedInput };

// kFixedAtZero pins the intercept to the target at the point where the
// surrogate input is zero (f(x0) for additive noise read as g(xi), f(0)
// when the surrogate reads the input directly, 0 for occlusion deltas).
enum class InterceptRule { kFree, kFixedAtZero };

// kOcclusionDelta regresses f(x0) - f(x0 * (1 - xi)) instead of f(x_xi).
enum class TargetRule { kValue, kOcclusionDelta };

enum class Scale { kGradient, kGradientTimesInput };

enum class Solver { kClosedForm, kIterative };

struct LfaInstance {
  std::string method = "custom";
  NeighborhoodSpec neighborhood;
  LossSpec loss;
  SurrogateParam param = SurrogateParam::kOfNoise;
  InterceptRule intercept = InterceptRule::kFree;
  TargetRule target = TargetRule::kValue;
  double ridge = kDefaultRidge;
};

void validate(const LfaInstance& instance);

// Additive neighborhoods and surrogates of the perturbed input explain on
// the gradient scale; multiplicative neighborhoods read as g(xi) explain on
// the gradient-times-input scale.
Scale scale_of(const LfaInstance& instance);

struct FitDiagnostics {
  double train_loss = 0.0;
  double validation_loss = 0.0;
  double test_loss = 0.0;
  Eigen::Index n_used = 0;
  std::uint64_t seed = 0;
  Solver solver = Solver::kClosedForm;
  int epochs_run = 0;
  double ridge = 0.0;
};

struct Explanation {
  std::string method;
  Vector x0;
  Vector weights;
  double intercept = 0.0;
  Scale scale = Scale::kGradient;
  FitDiagnostics diagnostics;
};

std::string to_string(Scale s);
std::string to_string(Solver s);
std::string to_string(SurrogateParam p);
std::string to_string(LossKind k);

// Deterministic train / validation / test partition of a perturbation set
// by sample index: i % 10 in [0, 8) train, 8 validation, 9 test.
struct SampleSplit {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> validation;
  std::vector<Eigen::Index> test;
};
SampleSplit split_samples(Eigen::Index n);

// Copy of the samples at `rows` (in order).
PerturbationSet subset(const PerturbationSet& pset, const std::vector<Eigen::Index>& rows);

// Mean (kernel-weighted) base loss of the surrogate (w, b) on `rows`.
double empirical_loss(const LfaInstance& instance, const PerturbationSet& pset,
                      const Vector& w, double b, const std::vector<Eigen::Index>& rows);

// Exact minimizer of the empirical objective where one exists.
Explanation fit_closed_form(const LfaInstance& instance, const PerturbationSet& pset);

struct IterativeConfig {
  int epochs = 500;
  int batch_size = 64;
  double learning_rate = 0.05;
  bool cosine_annealing = true;
  int patience = 50;
  // An epoch improves on the validation loss only by more than this
  // fraction of the best loss so far.
  double min_delta = 1e-4;
  // Return the best-validation parameters instead of the final ones.
  bool restore_best = false;
};

// Minibatch (proximal) gradient descent on the empirical objective over the
// training split with tail-averaged iterates. Stops once the validation loss
// has not improved for `patience` epochs.
Explanation fit_iterative(const LfaInstance& instance, const PerturbationSet& pset,
                          RandomStream& rng, const IterativeConfig& cfg = {});
Explanation fit_iterative(const LfaInstance& instance, const Model& f, const Vector& x0,
                          RandomStream& rng, const IterativeConfig& cfg = {});

// Samples the instance's neighborhood and fits it.
Explanation explain(const LfaInstance& instance, const Model& f, const Vector& x0,
                    RandomStream& rng, Solver solver = Solver::kClosedForm,
                    const IterativeConfig& cfg = {});

bool needs_gradients(const LfaInstance& instance);

struct ValidityReport {
  double mean_loss = 0.0;
  bool loss_vanishes = false;  // mean loss < 1e-12
  double offset = 0.0;         // C in f = g + C on the neighborhood
  double max_offset_deviation = 0.0;
  // The defining implication: a vanishing loss forces f = g + C.
  bool valid = false;
};

// Monte Carlo check of the loss validity condition for the pair (f, g) on
// a neighborhood. The surrogate g is evaluated at the perturbed input.
ValidityReport loss_is_valid_check(LossKind loss, const Model& f, const Model& g,
                                   const NeighborhoodSpec& spec, const Vector& x0,
                                   RandomStream& rng);

// SmoothGrad with an L0 penalty: hard threshold of the SmoothGrad closed form.
Explanation sparse_smoothgrad(const Model& f, const Vector& x0, double sigma, double lambda,
                              RandomStream& rng, int n_samples = 1000);

// Proximal map of lambda * penalty for a separable quadratic with curvature
// `curvature` around `center`.
double prox_penalty(double center, double curvature, const Regularization& reg);

}  // namespace lfa

#endif  // LFA_ENGINE_HPP_
