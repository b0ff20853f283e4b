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

#include "lfa/neighborhoods.hpp"

#include <cmath>
#include <sstream>

#include "lfa/model_io.hpp"

namespace lfa {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

bool is_mask_noise(const NoiseFamily& noise) {
  return std::holds_alternative<BernoulliMask>(noise) || std::holds_alternative<OneHotMask>(noise);
}

bool is_additive(const NeighborhoodSpec& spec) { return spec.combine == CombineOp::kAdd; }

void validate(const NeighborhoodSpec& spec) {
  if (spec.n_samples < 2) throw InvalidArgument("a neighborhood needs at least 2 samples");
  std::visit(Overloaded{
                 [](const GaussianAdditive& g) {
                   if (!(g.sigma > 0) || !std::isfinite(g.sigma)) {
                     throw InvalidArgument("gaussian noise needs sigma > 0");
                   }
                 },
                 [](const UniformScalarMultiplicative& u) {
                   if (!(u.a >= 0.0 && u.a < 1.0)) {
                     throw InvalidArgument("uniform scalar noise needs 0 <= a < 1");
                   }
                 },
                 [](const BernoulliMask& b) {
                   if (!(b.p > 0.0 && b.p < 1.0)) {
                     throw InvalidArgument("bernoulli mask needs 0 < p < 1");
                   }
                 },
                 [](const OneHotMask&) {},
             },
             spec.noise);

  const bool scalar = std::holds_alternative<UniformScalarMultiplicative>(spec.noise);
  if (scalar != (spec.combine == CombineOp::kScalarMultiply)) {
    throw InvalidArgument("scalar multiplication pairs only with scalar uniform noise");
  }
  if (spec.combine == CombineOp::kElementwiseMultiply && !is_mask_noise(spec.noise)) {
    throw InvalidArgument("elementwise multiplication pairs only with mask noise");
  }

  std::visit(Overloaded{
                 [](const UniformKernel&) {},
                 [](const ExponentialKernel& k) {
                   if (!std::isfinite(k.width)) throw InvalidArgument("kernel width must be finite");
                 },
                 [&](const ShapleyKernel& k) {
                   if (!(k.clamp > 0) || !std::isfinite(k.clamp)) {
                     throw InvalidArgument("shapley clamp must be positive and finite");
                   }
                   if (!is_mask_noise(spec.noise)) {
                     throw InvalidArgument("the shapley kernel is defined on binary masks only");
                   }
                 },
             },
             spec.kernel);
}

std::string to_string(CombineOp op) {
  switch (op) {
    case CombineOp::kAdd: return "add";
    case CombineOp::kElementwiseMultiply: return "elementwise_multiply";
    case CombineOp::kScalarMultiply: return "scalar_multiply";
  }
  return "add";
}

std::string describe(const NoiseFamily& noise) {
  return std::visit(Overloaded{
                        [](const GaussianAdditive& g) {
                          return "gaussian(sigma=" + format_double(g.sigma) + ")";
                        },
                        [](const UniformScalarMultiplicative& u) {
                          return "uniform_scalar(a=" + format_double(u.a) + ")";
                        },
                        [](const BernoulliMask& b) {
                          return "bernoulli_mask(p=" + format_double(b.p) + ")";
                        },
                        [](const OneHotMask&) { return std::string("one_hot_mask"); },
                    },
                    noise);
}

std::string describe(const WeightKernel& kernel) {
  return std::visit(
      Overloaded{
          [](const UniformKernel&) { return std::string("uniform"); },
          [](const ExponentialKernel& k) {
            return "exponential(width=" + (k.width > 0 ? format_double(k.width) : "default") +
                   ",distance=" + (k.distance == KernelDistance::kL2Squared ? "l2sq" : "cosine") +
                   ")";
          },
          [](const ShapleyKernel& k) { return "shapley(clamp=" + format_double(k.clamp) + ")"; },
      },
      kernel);
}

Vector combine(const Vector& x0, const Vector& noise, CombineOp op) {
  check_same_size(x0, noise);
  switch (op) {
    case CombineOp::kAdd: return x0 + noise;
    case CombineOp::kElementwiseMultiply:
      for (Eigen::Index i = 0; i < noise.size(); ++i) {
        if (noise(i) != 0.0 && noise(i) != 1.0) {
          throw InvalidArgument("elementwise multiplication expects a binary mask");
        }
      }
      return x0.cwiseProduct(noise);
    case CombineOp::kScalarMultiply:
      if ((noise.array() != noise(0)).any()) {
        throw InvalidArgument("scalar multiplication expects a constant noise vector");
      }
      return noise(0) * x0;
  }
  return x0;
}

Vector noise_gradient(const Vector& x0, const Vector& input_gradient, CombineOp op) {
  check_same_size(x0, input_gradient);
  if (op == CombineOp::kAdd) return input_gradient;
  return input_gradient.cwiseProduct(x0);
}

double default_kernel_width(Eigen::Index d) { return 0.75 * std::sqrt(static_cast<double>(d)); }

double shapley_kernel_weight(Eigen::Index m, Eigen::Index k, double clamp) {
  if (k < 0 || k > m || m < 1) throw InvalidArgument("coalition size out of range");
  if (k == 0 || k == m) return clamp;
  double binom = 1.0;
  for (Eigen::Index i = 1; i <= k; ++i) {
    binom *= static_cast<double>(m - k + i) / static_cast<double>(i);
  }
  const double w = static_cast<double>(m - 1) /
                   (binom * static_cast<double>(k) * static_cast<double>(m - k));
  return std::min(w, clamp);
}

double kernel_weight(const WeightKernel& kernel, const Vector& x0, const Vector& noise,
                     const Vector& point) {
  return std::visit(
      Overloaded{
          [](const UniformKernel&) { return 1.0; },
          [&](const ExponentialKernel& k) {
            const double width = k.width > 0 ? k.width : default_kernel_width(x0.size());
            double dist = 0.0;
            if (k.distance == KernelDistance::kL2Squared) {
              dist = (x0 - point).squaredNorm();
            } else if (x0.norm() > 0 && point.norm() > 0) {
              dist = cosine_distance(x0, point);
            } else {
              // No angle to a zero vector; treat it as orthogonal.
              dist = 1.0;
            }
            return std::exp(-dist / (width * width));
          },
          [&](const ShapleyKernel& k) {
            const auto ones = static_cast<Eigen::Index>((noise.array() != 0.0).count());
            return shapley_kernel_weight(noise.size(), ones, k.clamp);
          },
      },
      kernel);
}

PerturbationSet sample_perturbations(const NeighborhoodSpec& spec, const Model& f,
                                     const Vector& x0, RandomStream& rng, bool need_gradients) {
  validate(spec);
  if (x0.size() != f.input_dim()) {
    throw DimensionMismatch("x0 has dimension " + std::to_string(x0.size()) +
                            " but the model expects " + std::to_string(f.input_dim()));
  }
  if (!x0.allFinite()) throw InvalidArgument("x0 must be finite");

  const Eigen::Index n = spec.n_samples;
  const Eigen::Index d = x0.size();
  PerturbationSet p;
  p.x0 = x0;
  p.f_x0 = f.predict(x0);
  p.f_origin = f.predict(Vector::Zero(x0.size()));
  p.combine = spec.combine;
  p.noise.resize(n, d);

  // Draw all noise first so that the draw order does not depend on model
  // evaluation.
  for (Eigen::Index i = 0; i < n; ++i) {
    std::visit(Overloaded{
                   [&](const GaussianAdditive& g) {
                     for (Eigen::Index j = 0; j < d; ++j) p.noise(i, j) = g.sigma * rng.normal();
                   },
                   [&](const UniformScalarMultiplicative& u) {
                     p.noise.row(i).setConstant(rng.uniform(u.a, 1.0));
                   },
                   [&](const BernoulliMask& b) {
                     for (Eigen::Index j = 0; j < d; ++j) p.noise(i, j) = rng.bernoulli(b.p) ? 1.0 : 0.0;
                   },
                   [&](const OneHotMask&) {
                     p.noise.row(i).setZero();
                     p.noise(i, i % d) = 1.0;
                   },
               },
               spec.noise);
  }

  p.points.resize(n, d);
  p.weights.resize(n);
  p.values.resize(n);
  if (need_gradients) p.noise_gradients.resize(n, d);
  const bool one_hot = std::holds_alternative<OneHotMask>(spec.noise);
  if (one_hot) p.complement_values.resize(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector xi = p.noise.row(i).transpose();
    const Vector point = combine(x0, xi, spec.combine);
    p.points.row(i) = point.transpose();
    p.weights(i) = kernel_weight(spec.kernel, x0, xi, point);
    p.values(i) = f.predict(point);
    if (need_gradients) {
      p.noise_gradients.row(i) = noise_gradient(x0, f.gradient(point), spec.combine).transpose();
    }
    if (one_hot) {
      const Vector removed = x0.cwiseProduct((Vector::Ones(d) - xi));
      p.complement_values(i) = f.predict(removed);
    }
  }
  if (!p.values.allFinite() || !p.weights.allFinite()) {
    throw NumericalFailure("model or kernel produced non-finite values on the neighborhood");
  }
  return p;
}

std::string perturbations_to_csv(const PerturbationSet& pset) {
  std::ostringstream out;
  const Eigen::Index d = pset.dim();
  out << "index";
  for (Eigen::Index j = 0; j < d; ++j) out << ",xi_" << j;
  for (Eigen::Index j = 0; j < d; ++j) out << ",x_" << j;
  out << ",weight,f\n";
  for (Eigen::Index i = 0; i < pset.size(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(pset.noise(i, j));
    for (Eigen::Index j = 0; j < d; ++j) out << ',' << format_double(pset.points(i, j));
    out << ',' << format_double(pset.weights(i)) << ',' << format_double(pset.values(i)) << '\n';
  }
  return out.str();
}

}  // namespace lfa
