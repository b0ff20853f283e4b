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

#ifndef LFA_NEIGHBORHOODS_HPP_
#define LFA_NEIGHBORHOODS_HPP_

#include <optional>
#include <string>
#include <variant>

#include "lfa/core_math.hpp"
#include "lfa/models.hpp"
#include "lfa/random.hpp"

namespace lfa {

// Noise families.
struct GaussianAdditive {
  double sigma = 0.1;
};
// Scalar xi ~ Uniform(a, 1), broadcast to every coordinate.
struct UniformScalarMultiplicative {
  double a = 0.0;
};
struct BernoulliMask {
  double p = 0.5;
};
struct OneHotMask {};

using NoiseFamily =
    std::variant<GaussianAdditive, UniformScalarMultiplicative, BernoulliMask, OneHotMask>;

enum class CombineOp { kAdd, kElementwiseMultiply, kScalarMultiply };

enum class KernelDistance { kL2Squared, kCosine };

// Weighting kernels.
struct UniformKernel {};
struct ExponentialKernel {
  // Non-positive width means "use 0.75 * sqrt(d)".
  double width = 0.0;
  KernelDistance distance = KernelDistance::kL2Squared;
};
struct ShapleyKernel {
  // Weight used for the empty and the full coalition, where the Shapley
  // kernel is infinite.
  double clamp = 1e6;
};

using WeightKernel = std::variant<UniformKernel, ExponentialKernel, ShapleyKernel>;

struct NeighborhoodSpec {
  NoiseFamily noise = GaussianAdditive{};
  CombineOp combine = CombineOp::kAdd;
  WeightKernel kernel = UniformKernel{};
  int n_samples = 1000;
};

// Throws InvalidArgument when the noise/combine pairing or a parameter is
// out of range.
void validate(const NeighborhoodSpec& spec);

bool is_mask_noise(const NoiseFamily& noise);
bool is_additive(const NeighborhoodSpec& spec);

std::string to_string(CombineOp op);
std::string describe(const NoiseFamily& noise);
std::string describe(const WeightKernel& kernel);

// x0 (+) xi. Scalar noise is passed as a vector whose entries all equal the
// scalar.
Vector combine(const Vector& x0, const Vector& noise, CombineOp op);

double default_kernel_width(Eigen::Index d);

double shapley_kernel_weight(Eigen::Index m, Eigen::Index k, double clamp);

double kernel_weight(const WeightKernel& kernel, const Vector& x0, const Vector& noise,
                     const Vector& point);

// Sampled neighborhood around x0. Row i of every matrix belongs to sample i.
struct PerturbationSet {
  Vector x0;
  double f_x0 = 0.0;
  double f_origin = 0.0;  // f(0)
  CombineOp combine = CombineOp::kAdd;
  Matrix noise;    // n x d (scalar noise broadcast across columns)
  Matrix points;   // n x d, points.row(i) == combine(x0, noise.row(i))
  Vector weights;  // n, kernel weights
  Vector values;   // n, f(points.row(i))
  // n x d, gradient of f(x0 (+) xi) with respect to xi. Empty unless
  // gradients were requested.
  Matrix noise_gradients;
  // For one-hot masks: f(x0 * (1 - xi)). Empty otherwise.
  Vector complement_values;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return x0.size(); }
  bool has_gradients() const { return noise_gradients.rows() == points.rows(); }
};

PerturbationSet sample_perturbations(const NeighborhoodSpec& spec, const Model& f,
                                     const Vector& x0, RandomStream& rng, bool need_gradients);

// Gradient with respect to the noise, by the chain rule, from the gradient
// with respect to the input at the combined point.
Vector noise_gradient(const Vector& x0, const Vector& input_gradient, CombineOp op);

// One CSV row per sample: index, xi_*, x_*, weight, f.
std::string perturbations_to_csv(const PerturbationSet& pset);

}  // namespace lfa

#endif  // LFA_NEIGHBORHOODS_HPP_
