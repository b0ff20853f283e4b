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

#include "lfa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "lfa/parallel.hpp"

namespace lfa {
namespace {

bool is_mask_method(Method m) {
  return m == Method::kLime || m == Method::kKernelShap || m == Method::kOcclusion;
}

bool multiples_of_pi(const Vector& w, const Vector& x0) {
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double t = w(i) * x0(i) / std::numbers::pi;
    if (std::abs(t - std::round(t)) > 1e-9) return false;
  }
  return true;
}

void fill_distances(RecoveryReport& r) {
  const Vector diff = r.weights - r.target_weights;
  r.l1 = diff.cwiseAbs().sum();
  r.linf = diff.cwiseAbs().maxCoeff();
  r.relative_l1 = r.l1 / std::max(r.target_weights.cwiseAbs().sum(), 1e-12);
  r.cosine = (r.weights.norm() > 0 && r.target_weights.norm() > 0)
                 ? cosine_distance(r.weights, r.target_weights)
                 : std::numeric_limits<double>::quiet_NaN();
  r.l1_to_model_weights = l1_distance(r.weights, r.model_weights);
  r.l1_to_weights_times_input = l1_distance(r.weights, r.model_weights.cwiseProduct(r.x0));
}

Vector clamp_to_box(const Vector& x, const DomainBox& box) {
  return x.cwiseMax(box.lo).cwiseMin(box.hi);
}

}  // namespace

// ---------------------------------------------------------------------------
// Model recovery

std::string to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::kLinear: return "linear";
    case ModelFamily::kLogistic: return "logistic";
    case ModelFamily::kSinusoid: return "sinusoid";
  }
  return "linear";
}

ModelFamily family_from_string(const std::string& s) {
  if (s == "linear") return ModelFamily::kLinear;
  if (s == "logistic") return ModelFamily::kLogistic;
  if (s == "sinusoid") return ModelFamily::kSinusoid;
  throw InvalidArgument("unknown model family '" + s + "'");
}

std::string to_string(RecoveryTarget t) {
  switch (t) {
    case RecoveryTarget::kModelWeights: return "w_f";
    case RecoveryTarget::kWeightsTimesInput: return "w_f_times_x0";
    case RecoveryTarget::kZero: return "zero";
  }
  return "w_f";
}

Vector family_weights(const Model& f, ModelFamily family) {
  switch (family) {
    case ModelFamily::kLinear:
      if (const auto* m = dynamic_cast<const LinearModel*>(&f)) return m->weights();
      break;
    case ModelFamily::kLogistic:
      if (const auto* m = dynamic_cast<const LogisticModel*>(&f)) return m->weights();
      break;
    case ModelFamily::kSinusoid:
      if (const auto* m = dynamic_cast<const SinusoidModel*>(&f)) return m->frequencies();
      break;
  }
  throw InvalidArgument("model of kind '" + f.kind() + "' is not in the " + to_string(family) +
                        " family");
}

RecoveryReport check_recovery(Method method, ModelFamily family, const Model& f, const Vector& x0,
                              RandomStream& rng, const MethodParams& params) {
  RecoveryReport r;
  r.method = to_string(method);
  r.family = family;
  r.model_weights = family_weights(f, family);
  r.x0 = x0;
  r.weights = explain_method(method, f, x0, rng, params).weights;

  if (family == ModelFamily::kSinusoid && is_mask_method(method) &&
      multiples_of_pi(r.model_weights, x0)) {
    r.target = RecoveryTarget::kZero;
    r.target_weights = Vector::Zero(x0.size());
    r.threshold = 1e-8;
  } else if (is_additive_method(method)) {
    r.target = RecoveryTarget::kModelWeights;
    r.target_weights = r.model_weights;
    r.threshold = 1e-3;
  } else {
    r.target = RecoveryTarget::kWeightsTimesInput;
    r.target_weights = r.model_weights.cwiseProduct(x0);
    r.threshold = 1e-2;
  }
  fill_distances(r);
  r.recovered = r.target == RecoveryTarget::kZero ? r.linf < r.threshold
                                                  : r.relative_l1 < r.threshold;
  return r;
}

RecoveryReport reparam_recovery_check(Method method, const Model& f, const Vector& x0,
                                      RandomStream& rng, MethodParams params) {
  if (method != Method::kIntegratedGradients && method != Method::kGradXInput &&
      method != Method::kLime && method != Method::kKernelShap) {
    throw InvalidArgument("reparameterized recovery covers integrated_gradients, grad_x_input, "
                          "lime and kernelshap only");
  }
  if (x0.size() != f.input_dim()) throw DimensionMismatch("x0 does not match the model dimension");
  if ((x0.array() == 0.0).any()) {
    throw DegenerateVector("x0 has a zero coordinate; the perturbed-input surrogate cannot "
                           "resolve its weight");
  }
  params.param = SurrogateParam::kOfPerturbedInput;

  RecoveryReport r;
  r.method = to_string(method);
  r.family = ModelFamily::kLinear;
  r.model_weights = family_weights(f, ModelFamily::kLinear);
  r.x0 = x0;
  r.weights = explain_method(method, f, x0, rng, params).weights;
  r.target = RecoveryTarget::kModelWeights;
  r.target_weights = r.model_weights;
  r.threshold = 1e-3;
  fill_distances(r);
  r.recovered = r.linf < r.threshold;
  return r;
}

// ---------------------------------------------------------------------------
// Class distance and the no-free-lunch construction

std::string to_string(PointwiseLoss l) {
  switch (l) {
    case PointwiseLoss::kAbsolute: return "absolute";
    case PointwiseLoss::kSquared: return "squared";
    case PointwiseLoss::kHalfSquared: return "half_squared";
  }
  return "half_squared";
}

PointwiseLoss pointwise_loss_from_string(const std::string& s) {
  if (s == "absolute") return PointwiseLoss::kAbsolute;
  if (s == "squared") return PointwiseLoss::kSquared;
  if (s == "half_squared") return PointwiseLoss::kHalfSquared;
  throw InvalidArgument("unknown pointwise loss '" + s + "'");
}

double apply_loss(PointwiseLoss loss, double r) {
  switch (loss) {
    case PointwiseLoss::kAbsolute: return std::abs(r);
    case PointwiseLoss::kSquared: return r * r;
    case PointwiseLoss::kHalfSquared: return 0.5 * r * r;
  }
  return 0.5 * r * r;
}

DomainBox DomainBox::cube(Eigen::Index d, double lo, double hi) {
  return {Vector::Constant(d, lo), Vector::Constant(d, hi)};
}

void validate(const DomainBox& box) {
  check_same_size(box.lo, box.hi);
  if (box.lo.size() == 0) throw InvalidArgument("domain box has no dimensions");
  if (!box.lo.allFinite() || !box.hi.allFinite()) {
    throw InvalidArgument("domain box must be bounded");
  }
  if ((box.hi.array() <= box.lo.array()).any()) {
    throw InvalidArgument("domain box needs lo < hi in every coordinate");
  }
}

Matrix search_points(const DomainBox& box, const DistanceSearchConfig& cfg, RandomStream& rng) {
  validate(box);
  const Eigen::Index d = box.lo.size();
  if (d == 1) {
    if (cfg.grid_1d < 2) throw InvalidArgument("grid_1d must be at least 2");
    Matrix pts(cfg.grid_1d, 1);
    pts.col(0) = Vector::LinSpaced(cfg.grid_1d, box.lo(0), box.hi(0));
    return pts;
  }
  if (d == 2) {
    if (cfg.grid_2d < 2) throw InvalidArgument("grid_2d must be at least 2");
    const Vector a = Vector::LinSpaced(cfg.grid_2d, box.lo(0), box.hi(0));
    const Vector b = Vector::LinSpaced(cfg.grid_2d, box.lo(1), box.hi(1));
    Matrix pts(static_cast<Eigen::Index>(cfg.grid_2d) * cfg.grid_2d, 2);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
      for (Eigen::Index j = 0; j < b.size(); ++j) pts.row(k++) << a(i), b(j);
    return pts;
  }
  if (cfg.random_points < 1) throw InvalidArgument("random_points must be positive");
  const Eigen::Index corners = d <= 10 ? (Eigen::Index{1} << d) : 0;
  Matrix pts(cfg.random_points + corners, d);
  for (Eigen::Index i = 0; i < cfg.random_points; ++i)
    for (Eigen::Index j = 0; j < d; ++j) pts(i, j) = rng.uniform(box.lo(j), box.hi(j));
  for (Eigen::Index c = 0; c < corners; ++c)
    for (Eigen::Index j = 0; j < d; ++j)
      pts(cfg.random_points + c, j) = ((c >> j) & 1) ? box.hi(j) : box.lo(j);
  return pts;
}

Vector maximize_loss(const Model& f, const Vector& w, double b, const DomainBox& box,
                     const Matrix& candidates, const DistanceSearchConfig& cfg) {
  validate(box);
  if (candidates.rows() == 0) throw InvalidArgument("no candidate points to search");
  auto residual = [&](const Vector& x) { return std::abs(f.predict(x) - w.dot(x) - b); };

  std::vector<std::pair<double, Eigen::Index>> ranked;
  ranked.reserve(static_cast<std::size_t>(candidates.rows()));
  for (Eigen::Index i = 0; i < candidates.rows(); ++i) {
    ranked.emplace_back(residual(candidates.row(i).transpose()), i);
  }
  const auto starts = std::min<std::size_t>(std::max(cfg.refine_starts, 1), ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(starts),
                    ranked.end(), [](const auto& p, const auto& q) {
                      return p.first > q.first || (p.first == q.first && p.second < q.second);
                    });

  Vector best = candidates.row(ranked[0].second).transpose();
  double best_val = ranked[0].first;
  const double width = (box.hi - box.lo).minCoeff();
  for (std::size_t s = 0; s < starts; ++s) {
    Vector x = candidates.row(ranked[s].second).transpose();
    double val = ranked[s].first;
    double step = 0.01 * width;
    for (int it = 0; it < cfg.refine_steps && step > 1e-12 * width; ++it) {
      const double r = f.predict(x) - w.dot(x) - b;
      const Vector g = (r >= 0 ? 1.0 : -1.0) * (f.gradient(x) - w);
      const double gn = g.norm();
      if (!(gn > 0)) break;
      const Vector trial = clamp_to_box(x + step * g / gn, box);
      const double tv = residual(trial);
      if (tv > val) {
        x = trial;
        val = tv;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (val > best_val) {
      best_val = val;
      best = x;
    }
  }
  return best;
}

ClassDistance estimate_class_distance(const Model& f, const DomainBox& box, RandomStream& rng,
                                      const DistanceSearchConfig& cfg) {
  validate(box);
  if (box.lo.size() != f.input_dim()) {
    throw DimensionMismatch("domain box does not match the model dimension");
  }
  if (cfg.max_iterations < 1) throw InvalidArgument("max_iterations must be positive");
  const Matrix pts = search_points(box, cfg, rng);
  const Eigen::Index m = pts.rows();
  Vector y(m);
  for (Eigen::Index i = 0; i < m; ++i) y(i) = f.predict(pts.row(i).transpose());

  // Lawson's reweighted least squares converges to the discrete minimax
  // fit. The weighted L2 residual is a lower bound on the minimax residual
  // and the max residual an upper bound; stop when they meet.
  WlsProblem<double> p;
  p.design = pts;
  p.targets = y;
  p.weights = Vector::Constant(m, 1.0 / static_cast<double>(m));
  p.ridge = 0.0;
  p.fit_intercept = true;

  ClassDistance out;
  double best_upper = std::numeric_limits<double>::infinity();
  constexpr int kStallWindow = 50;
  int last_improvement = 0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    WlsSolution<double> sol;
    try {
      sol = weighted_ridge_ls(p);
    } catch (const RankDeficient&) {
      break;
    }
    const Vector r = y - pts * sol.weights - Vector::Constant(m, sol.intercept);
    const Vector abs_r = r.cwiseAbs();
    const double upper = abs_r.maxCoeff();
    const double lower = std::sqrt(p.weights.dot(r.cwiseAbs2()));
    out.iterations = it + 1;
    if (upper < best_upper - cfg.tolerance * 1e-3 * upper) last_improvement = it;
    if (upper < best_upper) {
      best_upper = upper;
      out.weights = sol.weights;
      out.intercept = sol.intercept;
    }
    // The lower bound tightens slowly once the weights concentrate on the
    // alternation points; a stalled upper bound also ends the search.
    const bool stalled = it - last_improvement >= kStallWindow;
    if (upper < 1e-14 || (upper - lower) <= cfg.tolerance * upper || stalled) {
      out.converged = true;
      break;
    }
    Vector next = p.weights.cwiseProduct(abs_r);
    const double total = next.sum();
    if (!(total > 0)) {
      out.converged = true;
      break;
    }
    p.weights = next / total;
  }
  if (out.weights.size() == 0) throw NumericalFailure("minimax linear fit failed");

  out.argmax = maximize_loss(f, out.weights, out.intercept, box, pts, cfg);
  out.residual = std::max(
      best_upper, std::abs(f.predict(out.argmax) - out.weights.dot(out.argmax) - out.intercept));
  out.d_hat = apply_loss(cfg.loss, out.residual);
  return out;
}

NflReport nfl_construct(const Model& f, const Vector& x0, const NeighborhoodSpec& z1,
                        const DomainBox& box, RandomStream& rng, const NflConfig& cfg) {
  validate(box);
  if (x0.size() != f.input_dim() || box.lo.size() != x0.size()) {
    throw DimensionMismatch("x0, model and domain box disagree on dimension");
  }
  if ((x0.array() < box.lo.array()).any() || (x0.array() > box.hi.array()).any()) {
    throw InvalidArgument("x0 lies outside the domain box");
  }
  if (cfg.z2_samples < 1) throw InvalidArgument("z2_samples must be positive");
  if (!(cfg.tolerance >= 0 && cfg.tolerance < 1)) {
    throw InvalidArgument("tolerance must be in [0, 1)");
  }

  NflReport rep;
  rep.x0 = x0;
  rep.tolerance = cfg.tolerance;
  rep.z1 = describe(z1.noise) + "," + to_string(z1.combine) + "," + describe(z1.kernel) +
           ",n=" + std::to_string(z1.n_samples);

  LfaInstance inst;
  inst.method = "nfl_surrogate";
  inst.neighborhood = z1;
  inst.loss = LossSpec::squared_error();
  inst.param = SurrogateParam::kOfPerturbedInput;
  inst.intercept = InterceptRule::kFree;
  RandomStream z1_rng = rng.fork("z1");
  const PerturbationSet pset = sample_perturbations(z1, f, x0, z1_rng, false);
  const Explanation g = fit_closed_form(inst, pset);
  rep.g_weights = g.weights;
  rep.g_intercept = g.intercept;
  for (Eigen::Index i = 0; i < pset.size(); ++i) {
    const double r = pset.values(i) - pset.points.row(i).dot(g.weights) - g.intercept;
    rep.eps_hat = std::max(rep.eps_hat, apply_loss(cfg.search.loss, r));
  }

  RandomStream search_rng = rng.fork("search");
  const Matrix cands = search_points(box, cfg.search, search_rng);
  rep.x_adv = maximize_loss(f, g.weights, g.intercept, box, cands, cfg.search);

  RandomStream z2_rng = rng.fork("z2");
  auto loss_at = [&](double t) {
    const Vector x = x0 + t * (rep.x_adv - x0);
    return apply_loss(cfg.search.loss, f.predict(x) - g.weights.dot(x) - g.intercept);
  };
  rep.z2_max_loss = loss_at(1.0);
  for (int i = 0; i < cfg.z2_samples; ++i) {
    rep.z2_max_loss = std::max(rep.z2_max_loss, loss_at(z2_rng.uniform()));
  }
  rep.z2 = "additive segment x0 + t*(x_adv - x0), t~Uniform(0,1), n=" +
           std::to_string(cfg.z2_samples) + " plus endpoint";

  RandomStream dist_rng = rng.fork("distance");
  rep.distance = estimate_class_distance(f, box, dist_rng, cfg.search);
  rep.inequality_held = rep.z2_max_loss >= (1.0 - cfg.tolerance) * rep.distance.d_hat - 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// Equivalence matrices

double safe_cosine_distance(const Vector& a, const Vector& b) {
  const bool za = !(a.norm() > 0);
  const bool zb = !(b.norm() > 0);
  if (za && zb) return 0.0;
  if (za || zb) return 1.0;
  return cosine_distance(a, b);
}

std::vector<Eigen::Index> EquivalenceResult::row_argmin() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < l1.rows(); ++i) {
    Eigen::Index j = 0;
    l1.row(i).minCoeff(&j);
    out.push_back(j);
  }
  return out;
}

bool EquivalenceResult::diagonal_dominant() const {
  for (Eigen::Index i = 0; i < l1.rows(); ++i) {
    if ((l1.row(i).array() < l1(i, i)).any()) return false;
  }
  return true;
}

reference::ReferenceConfig reference_config(const EquivalenceConfig& cfg) {
  reference::ReferenceConfig r;
  r.sigma = cfg.params.sigma;
  r.n_samples = cfg.params.n_samples;
  r.ig_steps = cfg.ig_steps;
  r.lime_kernel = cfg.params.lime_kernel;
  r.shapley_clamp = cfg.params.shapley_clamp;
  return r;
}

EquivalenceResult equivalence_matrix(const Model& f, const Matrix& points,
                                     const std::vector<Method>& methods, const RandomStream& rng,
                                     const EquivalenceConfig& cfg) {
  if (points.rows() < 1) throw InvalidArgument("equivalence needs at least one point");
  if (methods.empty()) throw InvalidArgument("equivalence needs at least one method");
  if (points.cols() != f.input_dim()) {
    throw DimensionMismatch("points do not match the model dimension");
  }
  const auto k = static_cast<Eigen::Index>(methods.size());
  const Eigen::Index n = points.rows();
  const reference::ReferenceConfig rcfg = reference_config(cfg);

  std::vector<Matrix> l1(static_cast<std::size_t>(n));
  std::vector<Matrix> cos(static_cast<std::size_t>(n));
  parallel_for(n, cfg.threads, [&](Eigen::Index p) {
    const Vector x = points.row(p).transpose();
    std::vector<Vector> ref(methods.size());
    std::vector<Vector> lfa(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const RandomStream stream = rng.fork(to_string(methods[m]), static_cast<std::uint64_t>(p));
      ref[m] = reference::explain(methods[m], f, x, stream, rcfg);
      RandomStream engine_stream = stream;
      lfa[m] = explain_method(methods[m], f, x, engine_stream, cfg.params).weights;
    }
    Matrix a(k, k);
    Matrix c(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        a(i, j) = l1_distance(ref[static_cast<std::size_t>(i)], lfa[static_cast<std::size_t>(j)]);
        c(i, j) = safe_cosine_distance(ref[static_cast<std::size_t>(i)],
                                       lfa[static_cast<std::size_t>(j)]);
      }
    }
    l1[static_cast<std::size_t>(p)] = std::move(a);
    cos[static_cast<std::size_t>(p)] = std::move(c);
  });

  EquivalenceResult out;
  out.methods = methods;
  out.n_points = n;
  out.l1 = Matrix::Zero(k, k);
  out.cosine = Matrix::Zero(k, k);
  for (Eigen::Index p = 0; p < n; ++p) {
    out.l1 += l1[static_cast<std::size_t>(p)];
    out.cosine += cos[static_cast<std::size_t>(p)];
  }
  out.l1 /= static_cast<double>(n);
  out.cosine /= static_cast<double>(n);
  return out;
}

ClusterSeparation cluster_separation(const EquivalenceResult& r, const Matrix& distances,
                                     const std::vector<Method>& a, const std::vector<Method>& b) {
  auto index_of = [&](Method m) -> Eigen::Index {
    const auto it = std::find(r.methods.begin(), r.methods.end(), m);
    if (it == r.methods.end()) throw InvalidArgument("method " + to_string(m) + " not in matrix");
    return it - r.methods.begin();
  };
  std::vector<int> group(r.methods.size(), -1);
  for (const Method m : a) group[static_cast<std::size_t>(index_of(m))] = 0;
  for (const Method m : b) group[static_cast<std::size_t>(index_of(m))] = 1;

  double within = 0.0;
  double cross = 0.0;
  int nw = 0;
  int nc = 0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = 0; j < group.size(); ++j) {
      if (group[i] < 0 || group[j] < 0 || i == j) continue;
      const double v = distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (group[i] == group[j]) {
        within += v;
        ++nw;
      } else {
        cross += v;
        ++nc;
      }
    }
  }
  if (nw == 0 || nc == 0) throw InvalidArgument("clusters need off-diagonal and cross entries");
  return {within / nw, cross / nc};
}

// ---------------------------------------------------------------------------
// Perturbation tests

std::string to_string(PerturbNoise n) {
  return n == PerturbNoise::kBinaryZero ? "binary_zero" : "gaussian";
}

PerturbNoise perturb_noise_from_string(const std::string& s) {
  if (s == "binary_zero") return PerturbNoise::kBinaryZero;
  if (s == "gaussian") return PerturbNoise::kGaussian;
  throw InvalidArgument("unknown perturbation noise '" + s + "'");
}

std::vector<Eigen::Index> bottom_k(const Vector& w, int k) {
  if (k < 0 || k >= w.size()) {
    throw InvalidArgument("k must satisfy 0 <= k < d (k=" + std::to_string(k) +
                          ", d=" + std::to_string(w.size()) + ")");
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(w.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return std::abs(w(a)) < std::abs(w(b)); });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

double perturbation_delta(const Model& f, const Vector& x0,
                          const std::vector<Eigen::Index>& features, const PerturbConfig& cfg,
                          RandomStream& rng) {
  const double base = f.predict(x0);
  if (cfg.noise == PerturbNoise::kBinaryZero) {
    Vector x = x0;
    for (const auto j : features) x(j) = 0.0;
    return std::abs(f.predict(x) - base);
  }
  if (cfg.trials < 1) throw InvalidArgument("gaussian perturbation needs at least one trial");
  if (!(cfg.sigma > 0)) throw InvalidArgument("gaussian perturbation needs sigma > 0");
  double total = 0.0;
  for (int t = 0; t < cfg.trials; ++t) {
    // Draw every coordinate so that draws line up across feature sets.
    Vector z(x0.size());
    for (Eigen::Index j = 0; j < x0.size(); ++j) z(j) = rng.normal();
    Vector x = x0;
    for (const auto j : features) x(j) += cfg.sigma * z(j);
    total += std::abs(f.predict(x) - base);
  }
  return total / cfg.trials;
}

PerturbCurve perturbation_test(const Model& f, const Matrix& points,
                               const std::vector<Vector>& attributions, const std::string& method,
                               const PerturbConfig& cfg, const RandomStream& rng) {
  if (static_cast<Eigen::Index>(attributions.size()) != points.rows()) {
    throw DimensionMismatch("one attribution per point is required");
  }
  if (cfg.ks.empty()) throw InvalidArgument("perturbation test needs at least one k");
  for (std::size_t i = 1; i < cfg.ks.size(); ++i) {
    if (cfg.ks[i] <= cfg.ks[i - 1]) throw InvalidArgument("k values must be strictly increasing");
  }
  PerturbCurve c;
  c.method = method;
  c.noise = cfg.noise;
  c.ks = cfg.ks;
  const auto nk = static_cast<Eigen::Index>(cfg.ks.size());
  c.per_point = Matrix::Zero(points.rows(), nk);
  for (Eigen::Index p = 0; p < points.rows(); ++p) {
    const Vector x0 = points.row(p).transpose();
    const Vector& w = attributions[static_cast<std::size_t>(p)];
    check_same_size(w, x0);
    for (Eigen::Index ki = 0; ki < nk; ++ki) {
      const int k = cfg.ks[static_cast<std::size_t>(ki)];
      RandomStream s = rng.fork("point", static_cast<std::uint64_t>(p)).fork("k", static_cast<std::uint64_t>(k));
      c.per_point(p, ki) = perturbation_delta(f, x0, bottom_k(w, k), cfg, s);
    }
  }
  for (Eigen::Index ki = 0; ki < nk; ++ki) c.mean_abs_delta.push_back(c.per_point.col(ki).mean());
  return c;
}

std::vector<SignTest> sign_test(const std::vector<PerturbCurve>& a,
                                const std::vector<PerturbCurve>& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("sign test needs two nonempty groups");
  const auto& ref = a.front();
  for (const auto* group : {&a, &b}) {
    for (const auto& c : *group) {
      if (c.ks != ref.ks || c.per_point.rows() != ref.per_point.rows()) {
        throw InvalidArgument("curves in a sign test must share points and k values");
      }
    }
  }
  auto group_mean = [](const std::vector<PerturbCurve>& g, Eigen::Index p, Eigen::Index ki) {
    double s = 0.0;
    for (const auto& c : g) s += c.per_point(p, ki);
    return s / static_cast<double>(g.size());
  };
  std::vector<SignTest> out;
  for (std::size_t ki = 0; ki < ref.ks.size(); ++ki) {
    SignTest t;
    t.k = ref.ks[ki];
    t.points = static_cast<int>(ref.per_point.rows());
    for (Eigen::Index p = 0; p < ref.per_point.rows(); ++p) {
      const auto col = static_cast<Eigen::Index>(ki);
      if (group_mean(a, p, col) <= group_mean(b, p, col)) ++t.wins;
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace lfa
