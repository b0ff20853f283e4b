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

#include "lfa/registry.hpp"

#include <cmath>

namespace lfa {

std::string to_string(Method m) {
  switch (m) {
    case Method::kCLime: return "clime";
    case Method::kSmoothGrad: return "smoothgrad";
    case Method::kVanillaGradients: return "vanilla_gradients";
    case Method::kIntegratedGradients: return "integrated_gradients";
    case Method::kGradXInput: return "grad_x_input";
    case Method::kLime: return "lime";
    case Method::kKernelShap: return "kernelshap";
    case Method::kOcclusion: return "occlusion";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  for (const Method m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("unknown method '" + s + "'");
}

bool is_additive_method(Method m) {
  return m == Method::kCLime || m == Method::kSmoothGrad || m == Method::kVanillaGradients;
}

LfaInstance registry(Method method, const MethodParams& params) {
  if (params.n_samples < 2) throw InvalidArgument("n_samples must be at least 2");
  if (!(params.ridge >= 0)) throw InvalidArgument("ridge must be nonnegative");

  LfaInstance inst;
  inst.method = to_string(method);
  inst.param = params.param;
  inst.ridge = params.ridge;
  inst.neighborhood.n_samples = params.n_samples;
  auto& nb = inst.neighborhood;

  switch (method) {
    case Method::kCLime:
    case Method::kSmoothGrad:
    case Method::kVanillaGradients: {
      const double sigma = method == Method::kVanillaGradients ? params.sigma_min : params.sigma;
      if (!(sigma > 0)) throw InvalidArgument(inst.method + " needs sigma > 0");
      nb.noise = GaussianAdditive{sigma};
      nb.combine = CombineOp::kAdd;
      nb.kernel = UniformKernel{};
      if (method == Method::kCLime) {
        inst.loss = LossSpec::squared_error();
        inst.intercept = InterceptRule::kFree;
      } else {
        inst.loss = LossSpec::gradient_matching();
        inst.intercept = InterceptRule::kFixedAtZero;
      }
      break;
    }
    case Method::kIntegratedGradients:
    case Method::kGradXInput: {
      const double a = method == Method::kGradXInput ? params.gxi_a : params.ig_a;
      if (!(a >= 0.0 && a < 1.0)) throw InvalidArgument(inst.method + " needs 0 <= a < 1");
      nb.noise = UniformScalarMultiplicative{a};
      nb.combine = CombineOp::kScalarMultiply;
      nb.kernel = UniformKernel{};
      inst.loss = LossSpec::gradient_matching();
      inst.intercept = InterceptRule::kFixedAtZero;
      break;
    }
    case Method::kLime:
      nb.noise = BernoulliMask{0.5};
      nb.combine = CombineOp::kElementwiseMultiply;
      nb.kernel = params.lime_kernel;
      inst.loss = LossSpec::squared_error();
      inst.intercept = InterceptRule::kFree;
      break;
    case Method::kKernelShap:
      nb.noise = BernoulliMask{0.5};
      nb.combine = CombineOp::kElementwiseMultiply;
      nb.kernel = ShapleyKernel{params.shapley_clamp};
      inst.loss = LossSpec::squared_error();
      inst.intercept = InterceptRule::kFree;
      break;
    case Method::kOcclusion:
      nb.noise = OneHotMask{};
      nb.combine = CombineOp::kElementwiseMultiply;
      nb.kernel = UniformKernel{};
      inst.loss = LossSpec::squared_error();
      inst.intercept = InterceptRule::kFixedAtZero;
      inst.target = TargetRule::kOcclusionDelta;
      break;
  }
  validate(inst);
  return inst;
}

Explanation explain_method(Method method, const Model& f, const Vector& x0, RandomStream& rng,
                           const MethodParams& params, Solver solver, const IterativeConfig& cfg) {
  const bool shortcut = params.use_shortcuts && params.param == SurrogateParam::kOfNoise &&
                        (method == Method::kVanillaGradients || method == Method::kGradXInput);
  if (!shortcut) return explain(registry(method, params), f, x0, rng, solver, cfg);

  const LfaInstance inst = registry(method, params);
  Explanation e;
  e.method = inst.method;
  e.x0 = x0;
  e.scale = scale_of(inst);
  const Vector grad = f.gradient(x0);
  if (method == Method::kVanillaGradients) {
    e.weights = grad;
    e.intercept = f.predict(x0);
  } else {
    e.weights = x0.cwiseProduct(grad);
    e.intercept = f.predict(Vector::Zero(x0.size()));
  }
  if (!e.weights.allFinite()) throw NumericalFailure("model gradient is not finite at x0");
  e.diagnostics.solver = Solver::kClosedForm;
  e.diagnostics.seed = rng.seed();
  e.diagnostics.n_used = 0;
  return e;
}

}  // namespace lfa
