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

#ifndef LFA_REGISTRY_HPP_
#define LFA_REGISTRY_HPP_

#include <array>
#include <string>

#include "lfa/engine.hpp"

namespace lfa {

enum class Method {
  kCLime,
  kSmoothGrad,
  kVanillaGradients,
  kIntegratedGradients,
  kGradXInput,
  kLime,
  kKernelShap,
  kOcclusion,
};

inline constexpr std::array<Method, 8> kAllMethods = {
    Method::kCLime,      Method::kSmoothGrad, Method::kVanillaGradients, Method::kIntegratedGradients,
    Method::kGradXInput, Method::kLime,       Method::kKernelShap,       Method::kOcclusion,
};

// Stable identifiers: clime, smoothgrad, vanilla_gradients,
// integrated_gradients, grad_x_input, lime, kernelshap, occlusion.
std::string to_string(Method m);
Method method_from_string(const std::string& s);

// Additive-noise methods explain on the gradient scale.
bool is_additive_method(Method m);

struct MethodParams {
  double sigma = 0.1;             // C-LIME and SmoothGrad noise scale
  double sigma_min = 1e-6;        // Vanilla Gradients as the sigma -> 0 limit
  double ig_a = 0.0;              // Integrated Gradients: xi ~ Uniform(ig_a, 1)
  double gxi_a = 1.0 - 1e-6;      // Gradient x Input as the a -> 1 limit
  int n_samples = 1000;
  ExponentialKernel lime_kernel;  // width <= 0 selects 0.75 * sqrt(d)
  double shapley_clamp = 1e6;
  double ridge = kDefaultRidge;
  SurrogateParam param = SurrogateParam::kOfNoise;
  // Vanilla Gradients and Gradient x Input through their analytic forms
  // instead of the sampled limit instance.
  bool use_shortcuts = true;
};

LfaInstance registry(Method method, const MethodParams& params = {});

Explanation explain_method(Method method, const Model& f, const Vector& x0, RandomStream& rng,
                           const MethodParams& params = {}, Solver solver = Solver::kClosedForm,
                           const IterativeConfig& cfg = {});

}  // namespace lfa

#endif  // LFA_REGISTRY_HPP_
