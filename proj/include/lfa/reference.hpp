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

#ifndef LFA_REFERENCE_HPP_
#define LFA_REFERENCE_HPP_

#include "lfa/core_math.hpp"
#include "lfa/models.hpp"
#include "lfa/neighborhoods.hpp"
#include "lfa/random.hpp"
#include "lfa/registry.hpp"

// Textbook implementations of the eight methods, written without the LFA
// engine. The baseline is the zero vector throughout.
namespace lfa::reference {

Vector vanilla_gradients(const Model& f, const Vector& x0);

Vector grad_x_input(const Model& f, const Vector& x0);

// Mean gradient over x0 + eps, eps ~ N(0, sigma^2 I).
Vector smoothgrad(const Model& f, const Vector& x0, double sigma, int n, RandomStream& rng);

// x0 .* (1/steps) sum_{t=0}^{steps-1} grad f((t/steps) x0).
Vector integrated_gradients(const Model& f, const Vector& x0, int steps);

// f(x0) - f(x0 with feature i set to 0).
Vector occlusion(const Model& f, const Vector& x0);

// Weighted least squares of f(x0 .* z) on Bernoulli(0.5) masks z with an
// exponential proximity kernel.
Vector lime(const Model& f, const Vector& x0, const ExponentialKernel& kernel, int n,
            RandomStream& rng);

// Weighted least squares on Bernoulli(0.5) masks with Shapley kernel
// weights; the empty and full coalitions get weight `clamp`.
Vector kernelshap(const Model& f, const Vector& x0, int n, double clamp, RandomStream& rng);

// Least squares of f(x0 + eps) on eps, eps ~ N(0, sigma^2 I).
Vector clime(const Model& f, const Vector& x0, double sigma, int n, RandomStream& rng);

struct ReferenceConfig {
  double sigma = 0.1;
  int n_samples = 1000;
  int ig_steps = 1000;
  ExponentialKernel lime_kernel;
  double shapley_clamp = 1e6;
};

// Dispatches on `method`. Sampling methods draw from rng.fork("sample"),
// the same child stream that explain() samples from, so a stream shared
// with the engine yields the same noise.
Vector explain(Method method, const Model& f, const Vector& x0, const RandomStream& rng,
               const ReferenceConfig& cfg = {});

}  // namespace lfa::reference

#endif  // LFA_REFERENCE_HPP_
