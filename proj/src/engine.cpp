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

#include "lfa/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace lfa {

LossSpec LossSpec::regularized(LossSpec base, double lambda, Penalty penalty) {
  if (base.regularization) throw InvalidArgument("loss is already regularized");
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw InvalidArgument("regularization strength must be positive");
  }
  base.regularization = Regularization{lambda, penalty};
  return base;
}

std::string to_string(Scale s) {
  return s == Scale::kGradient ? "gradient" : "gradient_times_input";
}
std::string to_string(Solver s) { return s == Solver::kClosedForm ? "closed_form" : "iterative"; }
std::string to_string(SurrogateParam p) {
  return p == SurrogateParam::kOfNoise ? "of_noise" : "of_perturbed_input";
}
std::string to_string(LossKind k) {
  return k == LossKind::kSquaredError ? "squared_error" : "gradient_matching";
}

void validate(const LfaInstance& inst) {
  validate(inst.neighborhood);
  if (!(inst.ridge >= 0) || !std::isfinite(inst.ridge)) {
    throw InvalidArgument("ridge must be finite and nonnegative");
  }
  if (inst.loss.kind == LossKind::kGradientMatching && is_mask_noise(inst.neighborhood.noise)) {
    throw InvalidArgument("gradient matching needs continuous noise");
  }
  if (inst.target == TargetRule::kOcclusionDelta &&
      !std::holds_alternative<OneHotMask>(inst.neighborhood.noise)) {
    throw InvalidArgument("occlusion deltas are defined for one-hot masks only");
  }
  if (inst.loss.regularization && !(inst.loss.regularization->lambda > 0)) {
    throw InvalidArgument("regularization strength must be positive");
  }
}

Scale scale_of(const LfaInstance& inst) {
  if (inst.param == SurrogateParam::kOfPerturbedInput) return Scale::kGradient;
  return is_additive(inst.neighborhood) ? Scale::kGradient : Scale::kGradientTimesInput;
}

bool needs_gradients(const LfaInstance& inst) {
  return inst.loss.kind == LossKind::kGradientMatching;
}

SampleSplit split_samples(Eigen::Index n) {
  SampleSplit s;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto r = i % 10;
    if (r < 8) {
      s.train.push_back(i);
    } else if (r == 8) {
      s.validation.push_back(i);
    } else {
      s.test.push_back(i);
    }
  }
  return s;
}

PerturbationSet subset(const PerturbationSet& pset, const std::vector<Eigen::Index>& rows) {
  PerturbationSet out;
  out.x0 = pset.x0;
  out.f_x0 = pset.f_x0;
  out.f_origin = pset.f_origin;
  out.combine = pset.combine;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index d = pset.dim();
  out.noise.resize(n, d);
  out.points.resize(n, d);
  out.weights.resize(n);
  out.values.resize(n);
  if (pset.has_gradients()) out.noise_gradients.resize(n, d);
  if (pset.complement_values.size() > 0) out.complement_values.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index i = rows[static_cast<std::size_t>(k)];
    out.noise.row(k) = pset.noise.row(i);
    out.points.row(k) = pset.points.row(i);
    out.weights(k) = pset.weights(i);
    out.values(k) = pset.values(i);
    if (pset.has_gradients()) out.noise_gradients.row(k) = pset.noise_gradients.row(i);
    if (pset.complement_values.size() > 0) out.complement_values(k) = pset.complement_values(i);
  }
  return out;
}

namespace {

const Matrix& surrogate_design(const LfaInstance& inst, const PerturbationSet& pset) {
  return inst.param == SurrogateParam::kOfNoise ? pset.noise : pset.points;
}

Vector regression_targets(const LfaInstance& inst, const PerturbationSet& pset) {
  if (inst.target == TargetRule::kOcclusionDelta) {
    if (pset.complement_values.size() != pset.size()) {
      throw InvalidArgument("perturbation set lacks occlusion complements");
    }
    return Vector::Constant(pset.size(), pset.f_x0) - pset.complement_values;
  }
  return pset.values;
}

double fixed_intercept(const LfaInstance& inst, const PerturbationSet& pset) {
  if (inst.target == TargetRule::kOcclusionDelta) return 0.0;
  if (inst.param == SurrogateParam::kOfNoise && pset.combine == CombineOp::kAdd) {
    return pset.f_x0;
  }
  return pset.f_origin;
}

// d(g)/d(xi) = w .* map.
Vector gradient_map(const LfaInstance& inst, const PerturbationSet& pset) {
  if (inst.param == SurrogateParam::kOfNoise || pset.combine == CombineOp::kAdd) {
    return Vector::Ones(pset.dim());
  }
  if ((pset.x0.array() == 0.0).any()) {
    throw DegenerateVector(
        "a surrogate of the perturbed input under multiplicative noise needs every x0 "
        "coordinate nonzero");
  }
  return pset.x0;
}

void check_pset(const LfaInstance& inst, const PerturbationSet& pset) {
  if (pset.size() < 1) throw InvalidArgument("empty perturbation set");
  if (needs_gradients(inst) && !pset.has_gradients()) {
    throw InvalidArgument("gradient matching needs a perturbation set with gradients");
  }
  if (pset.combine != inst.neighborhood.combine) {
    throw InvalidArgument("perturbation set was drawn with a different combination operator");
  }
}

double penalty_value(const Vector& w, const Regularization& reg) {
  if (reg.penalty == Penalty::kL0) {
    return reg.lambda * static_cast<double>((w.array() != 0.0).count());
  }
  return reg.lambda * w.cwiseAbs().sum();
}

void fill_diagnostics(const LfaInstance& inst, const PerturbationSet& pset, Explanation& e) {
  const SampleSplit split = split_samples(pset.size());
  auto loss_on = [&](const std::vector<Eigen::Index>& rows) {
    return rows.empty() ? 0.0 : empirical_loss(inst, pset, e.weights, e.intercept, rows);
  };
  e.diagnostics.train_loss = loss_on(split.train);
  e.diagnostics.validation_loss = loss_on(split.validation);
  e.diagnostics.test_loss = loss_on(split.test);
  e.diagnostics.ridge = inst.ridge;
}

}  // namespace

double prox_penalty(double center, double curvature, const Regularization& reg) {
  if (reg.penalty == Penalty::kL0) {
    return 0.5 * curvature * center * center > reg.lambda ? center : 0.0;
  }
  const double shrink = reg.lambda / curvature;
  if (center > shrink) return center - shrink;
  if (center < -shrink) return center + shrink;
  return 0.0;
}

double empirical_loss(const LfaInstance& inst, const PerturbationSet& pset, const Vector& w,
                      double b, const std::vector<Eigen::Index>& rows) {
  check_pset(inst, pset);
  double num = 0.0;
  double den = 0.0;
  if (inst.loss.kind == LossKind::kGradientMatching) {
    const Vector map = gradient_map(inst, pset);
    const Vector gw = w.cwiseProduct(map);
    for (const auto i : rows) {
      const double pi = pset.weights(i);
      num += pi * (pset.noise_gradients.row(i).transpose() - gw).squaredNorm();
      den += pi;
    }
  } else {
    const Matrix& u = surrogate_design(inst, pset);
    const Vector y = regression_targets(inst, pset);
    for (const auto i : rows) {
      const double pi = pset.weights(i);
      const double r = y(i) - u.row(i).dot(w) - b;
      num += pi * r * r;
      den += pi;
    }
  }
  return den > 0 ? num / den : 0.0;
}

Explanation fit_closed_form(const LfaInstance& inst, const PerturbationSet& pset) {
  validate(inst);
  check_pset(inst, pset);
  const Eigen::Index d = pset.dim();

  Explanation e;
  e.method = inst.method;
  e.x0 = pset.x0;
  e.scale = scale_of(inst);
  e.diagnostics.solver = Solver::kClosedForm;
  e.diagnostics.n_used = pset.size();

  if (inst.loss.kind == LossKind::kGradientMatching) {
    // 0.5 * mean_pi |G_i - w .* s|^2 is separable: w_j = mean(G_j) / s_j,
    // curvature s_j^2.
    const Vector map = gradient_map(inst, pset);
    const double total = pset.weights.sum();
    if (!(total > 0)) throw InvalidArgument("kernel weights sum to zero");
    const Vector mean_grad = (pset.noise_gradients.transpose() * pset.weights) / total;
    Vector w = mean_grad.cwiseQuotient(map);
    if (inst.loss.regularization) {
      for (Eigen::Index j = 0; j < d; ++j) {
        w(j) = prox_penalty(w(j), map(j) * map(j), *inst.loss.regularization);
      }
    }
    e.weights = w;
    if (inst.intercept == InterceptRule::kFixedAtZero) {
      e.intercept = fixed_intercept(inst, pset);
    } else {
      // Gradient matching leaves b free; take the weighted least-squares
      // offset of the values.
      const Matrix& u = surrogate_design(inst, pset);
      const Vector y = regression_targets(inst, pset);
      e.intercept = (pset.weights.array() * (y - u * w).array()).sum() / total;
    }
  } else {
    if (inst.loss.regularization) {
      throw InvalidArgument("a regularized squared-error instance has no closed form");
    }
    const Vector y = regression_targets(inst, pset);
    const bool one_hot_occlusion = std::holds_alternative<OneHotMask>(inst.neighborhood.noise) &&
                                   inst.target == TargetRule::kOcclusionDelta &&
                                   inst.param == SurrogateParam::kOfNoise;
    if (one_hot_occlusion) {
      // Each one-hot row isolates one coordinate: w_j is the mean delta of
      // the rows that switch feature j.
      Vector sum = Vector::Zero(d);
      Vector count = Vector::Zero(d);
      for (Eigen::Index i = 0; i < pset.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
          if (pset.noise(i, j) != 0.0) {
            sum(j) += pset.weights(i) * y(i);
            count(j) += pset.weights(i);
          }
        }
      }
      if ((count.array() <= 0.0).any()) {
        throw InvalidArgument("occlusion needs at least one sample per feature (n >= d)");
      }
      e.weights = sum.cwiseQuotient(count);
      e.intercept = 0.0;
    } else {
      WlsProblem<double> p;
      p.design = surrogate_design(inst, pset);
      p.weights = pset.weights;
      p.ridge = inst.ridge;
      p.fit_intercept = inst.intercept == InterceptRule::kFree;
      const double b0 = p.fit_intercept ? 0.0 : fixed_intercept(inst, pset);
      p.targets = y.array() - b0;
      const auto sol = weighted_ridge_ls(p);
      e.weights = sol.weights;
      e.intercept = p.fit_intercept ? sol.intercept : b0;
    }
  }
  if (!e.weights.allFinite() || !std::isfinite(e.intercept)) {
    throw NumericalFailure("closed-form fit produced non-finite weights");
  }
  fill_diagnostics(inst, pset, e);
  return e;
}

Explanation fit_iterative(const LfaInstance& inst, const PerturbationSet& pset,
                          RandomStream& rng, const IterativeConfig& cfg) {
  validate(inst);
  check_pset(inst, pset);
  if (pset.size() < 10) throw InvalidArgument("iterative fitting needs at least 10 samples");
  if (cfg.epochs <= 0 || cfg.batch_size <= 0 || !(cfg.learning_rate > 0) || cfg.patience <= 0) {
    throw InvalidArgument("iterative fit settings must be positive");
  }

  const Eigen::Index d = pset.dim();
  const SampleSplit split = split_samples(pset.size());
  const bool gm = inst.loss.kind == LossKind::kGradientMatching;
  const bool free_b = inst.intercept == InterceptRule::kFree && !gm;
  const auto& reg = inst.loss.regularization;

  const Matrix& u = surrogate_design(inst, pset);
  const Vector y = regression_targets(inst, pset);
  const Vector map = gm ? gradient_map(inst, pset) : Vector::Ones(d);
  const double b_fixed = fixed_intercept(inst, pset);

  // Weighted training means for centering and the diagonal preconditioner.
  double wsum = 0.0;
  Vector center = Vector::Zero(d);
  double y_mean = 0.0;
  for (const auto i : split.train) {
    wsum += pset.weights(i);
    center += pset.weights(i) * u.row(i).transpose();
    y_mean += pset.weights(i) * y(i);
  }
  if (!(wsum > 0)) throw InvalidArgument("training split carries zero kernel weight");
  center /= wsum;
  y_mean /= wsum;
  if (!free_b) center.setZero();
  // The closed form penalizes a sum over unit-mean weights; per sample that
  // is ridge / n.
  const double ridge = inst.ridge / static_cast<double>(split.train.size());

  Vector curvature(d);
  if (gm) {
    curvature = map.cwiseProduct(map);
  } else {
    curvature.setZero();
    for (const auto i : split.train) {
      curvature += pset.weights(i) * (u.row(i).transpose() - center).cwiseAbs2();
    }
    curvature /= wsum;
    curvature.array() += ridge;
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(curvature(j) > 1e-300)) curvature(j) = 1.0;
  }

  // Parameters: w and, for a free intercept, c in g = w.(u - center) + c.
  Vector w = Vector::Zero(d);
  double c = free_b ? y_mean : 0.0;
  auto intercept_of = [&](const Vector& ww, double cc) {
    if (gm) return inst.intercept == InterceptRule::kFixedAtZero ? b_fixed : 0.0;
    return free_b ? cc - ww.dot(center) : b_fixed;
  };
  auto objective = [&](const Vector& ww, double cc, const std::vector<Eigen::Index>& rows) {
    double v = empirical_loss(inst, pset, ww, intercept_of(ww, cc), rows);
    if (reg) v = 0.5 * v + penalty_value(ww, *reg);
    return v;
  };

  std::vector<Eigen::Index> order = split.train;
  const std::vector<Eigen::Index>& monitor = split.validation.empty() ? split.train : split.validation;
  Vector best_w = w;
  double best_c = c;
  double best_val = objective(w, c, monitor);
  Vector last_w = w;
  double last_c = c;
  int since_best = 0;
  int epochs_run = 0;

  // Tail (Polyak) averaging: the candidate is the mean iterate since the
  // last restart, with restarts at epochs 1, 2, 4, 8, ... so that the
  // average always spans at least the latter half of training. Gradient
  // matching is separable with exact diagonal curvature, so its penalty is
  // applied once to the averaged smooth iterate. Squared-error proximal
  // steps keep the raw iterate, whose support is exact.
  Vector sum_w = Vector::Zero(d);
  double sum_c = 0.0;
  long steps_averaged = 0;
  int next_restart = 1;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch == next_restart) {
      sum_w.setZero();
      sum_c = 0.0;
      steps_averaged = 0;
      next_restart *= 2;
    }
    double lr = cfg.learning_rate;
    if (cfg.cosine_annealing) {
      lr = 0.5 * cfg.learning_rate * (1.0 + std::cos(std::numbers::pi * epoch / cfg.epochs));
    }
    for (std::size_t i = order.size(); i-- > 1;) {
      const auto j = static_cast<std::size_t>(rng.choice(i + 1));
      std::swap(order[i], order[j]);
    }
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Vector gw = Vector::Zero(d);
      double gc = 0.0;
      double bw = 0.0;
      const double b = intercept_of(w, c);
      for (std::size_t k = start; k < stop; ++k) {
        const Eigen::Index i = order[k];
        const double pi = pset.weights(i);
        if (pi == 0.0) continue;
        bw += pi;
        if (gm) {
          const Vector r = pset.noise_gradients.row(i).transpose() - w.cwiseProduct(map);
          gw -= pi * r.cwiseProduct(map);
        } else {
          const Vector ui = u.row(i).transpose() - center;
          const double r = y(i) - w.dot(ui) - (free_b ? c : b);
          gw -= pi * r * ui;
          gc -= pi * r;
        }
      }
      if (bw == 0.0) continue;
      gw /= bw;
      gc /= bw;
      if (!gm && !reg) gw += ridge * w;
      w -= lr * gw.cwiseQuotient(curvature);
      if (free_b) c -= lr * gc;
      if (reg && !gm) {
        for (Eigen::Index j = 0; j < d; ++j) w(j) = prox_penalty(w(j), curvature(j) / lr, *reg);
      }
      sum_w += w;
      sum_c += c;
      ++steps_averaged;
    }
    ++epochs_run;
    if (!w.allFinite() || !std::isfinite(c)) {
      throw NumericalFailure("iterative fit diverged at epoch " + std::to_string(epoch) +
                             "; lower the learning rate");
    }
    const bool averaged = (!reg || gm) && steps_averaged > 0;
    Vector cand_w = averaged ? Vector(sum_w / static_cast<double>(steps_averaged)) : w;
    if (reg && gm) {
      for (Eigen::Index j = 0; j < d; ++j) cand_w(j) = prox_penalty(cand_w(j), curvature(j), *reg);
    }
    const double cand_c = averaged ? sum_c / static_cast<double>(steps_averaged) : c;
    const double val = objective(cand_w, cand_c, monitor);
    if (!std::isfinite(val)) {
      throw NumericalFailure("iterative fit produced a non-finite loss at epoch " +
                             std::to_string(epoch));
    }
    last_w = cand_w;
    last_c = cand_c;
    if (val < best_val) {
      if (val < best_val - cfg.min_delta * std::abs(best_val)) since_best = -1;
      best_val = val;
      best_w = cand_w;
      best_c = cand_c;
    }
    if (++since_best >= cfg.patience) break;
  }

  Explanation e;
  e.method = inst.method;
  e.x0 = pset.x0;
  e.scale = scale_of(inst);
  if (!cfg.restore_best) {
    best_w = last_w;
    best_c = last_c;
  }
  e.weights = best_w;
  e.intercept = intercept_of(best_w, best_c);
  e.diagnostics.solver = Solver::kIterative;
  e.diagnostics.n_used = static_cast<Eigen::Index>(split.train.size());
  e.diagnostics.seed = rng.seed();
  e.diagnostics.epochs_run = epochs_run;
  fill_diagnostics(inst, pset, e);
  return e;
}

Explanation fit_iterative(const LfaInstance& inst, const Model& f, const Vector& x0,
                          RandomStream& rng, const IterativeConfig& cfg) {
  RandomStream sample_rng = rng.fork("sample");
  RandomStream fit_rng = rng.fork("fit");
  const PerturbationSet pset =
      sample_perturbations(inst.neighborhood, f, x0, sample_rng, needs_gradients(inst));
  Explanation e = fit_iterative(inst, pset, fit_rng, cfg);
  e.diagnostics.seed = rng.seed();
  return e;
}

Explanation explain(const LfaInstance& inst, const Model& f, const Vector& x0, RandomStream& rng,
                    Solver solver, const IterativeConfig& cfg) {
  if (solver == Solver::kIterative) return fit_iterative(inst, f, x0, rng, cfg);
  RandomStream sample_rng = rng.fork("sample");
  const PerturbationSet pset =
      sample_perturbations(inst.neighborhood, f, x0, sample_rng, needs_gradients(inst));
  Explanation e = fit_closed_form(inst, pset);
  e.diagnostics.seed = rng.seed();
  return e;
}

ValidityReport loss_is_valid_check(LossKind loss, const Model& f, const Model& g,
                                   const NeighborhoodSpec& spec, const Vector& x0,
                                   RandomStream& rng) {
  if (g.input_dim() != f.input_dim()) {
    throw DimensionMismatch("f and g disagree on input dimension");
  }
  const bool gm = loss == LossKind::kGradientMatching;
  const PerturbationSet pset = sample_perturbations(spec, f, x0, rng, gm);

  ValidityReport r;
  r.offset = gm ? f.predict(x0) - g.predict(x0) : 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < pset.size(); ++i) {
    const Vector point = pset.points.row(i).transpose();
    const double gv = g.predict(point);
    if (gm) {
      const Vector gg = noise_gradient(x0, g.gradient(point), spec.combine);
      total += (pset.noise_gradients.row(i).transpose() - gg).squaredNorm();
    } else {
      const double diff = pset.values(i) - gv;
      total += diff * diff;
    }
    r.max_offset_deviation =
        std::max(r.max_offset_deviation, std::abs(pset.values(i) - gv - r.offset));
  }
  r.mean_loss = total / static_cast<double>(pset.size());
  r.loss_vanishes = r.mean_loss < 1e-12;
  r.valid = !r.loss_vanishes || r.max_offset_deviation < 1e-6;
  return r;
}

Explanation sparse_smoothgrad(const Model& f, const Vector& x0, double sigma, double lambda,
                              RandomStream& rng, int n_samples) {
  if (!(sigma > 0)) throw InvalidArgument("sparse smoothgrad needs sigma > 0");
  LfaInstance inst;
  inst.method = "sparse_smoothgrad";
  inst.neighborhood = {GaussianAdditive{sigma}, CombineOp::kAdd, UniformKernel{}, n_samples};
  inst.loss = LossSpec::regularized(LossSpec::gradient_matching(), lambda, Penalty::kL0);
  inst.param = SurrogateParam::kOfNoise;
  inst.intercept = InterceptRule::kFixedAtZero;
  return explain(inst, f, x0, rng, Solver::kClosedForm);
}

}  // namespace lfa
