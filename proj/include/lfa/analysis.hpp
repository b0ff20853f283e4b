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

#ifndef LFA_ANALYSIS_HPP_
#define LFA_ANALYSIS_HPP_

#include <string>
#include <vector>

#include "lfa/engine.hpp"
#include "lfa/reference.hpp"
#include "lfa/registry.hpp"

namespace lfa {

// ---------------------------------------------------------------------------
// Model recovery

enum class ModelFamily { kLinear, kLogistic, kSinusoid };
enum class RecoveryTarget { kModelWeights, kWeightsTimesInput, kZero };

std::string to_string(ModelFamily f);
ModelFamily family_from_string(const std::string& s);
std::string to_string(RecoveryTarget t);

struct RecoveryReport {
  std::string method;
  ModelFamily family = ModelFamily::kLinear;
  Vector x0;
  Vector model_weights;  // w_f (frequencies for the sinusoid)
  Vector weights;        // recovered w_g
  RecoveryTarget target = RecoveryTarget::kModelWeights;
  Vector target_weights;
  double l1 = 0.0;
  double relative_l1 = 0.0;  // l1 / max(|target|_1, 1e-12)
  double linf = 0.0;
  // Cosine distance to the target; NaN when either vector is zero.
  double cosine = 0.0;
  double l1_to_model_weights = 0.0;
  double l1_to_weights_times_input = 0.0;
  // Relative L1 for nonzero targets, absolute L-infinity for a zero target.
  double threshold = 0.0;
  bool recovered = false;
};

// Weight vector of a recovery-comparable model; throws InvalidArgument when
// `f` is not of `family`.
Vector family_weights(const Model& f, ModelFamily family);

// Explains f at x0 and compares against the expected recovery target:
// w_f for additive methods, w_f .* x0 for multiplicative and mask methods,
// and zero for a mask method on a sinusoid whose w_i x0_i are multiples
// of pi. Threshold 1e-3 relative L1 for additive methods, 1e-2 otherwise,
// 1e-8 absolute for a zero target.
RecoveryReport check_recovery(Method method, ModelFamily family, const Model& f, const Vector& x0,
                              RandomStream& rng, const MethodParams& params = {});

// The same methods with the surrogate read on the perturbed input. Expects
// w_f within 1e-3 L-infinity. Throws DegenerateVector when x0 has a zero
// coordinate.
RecoveryReport reparam_recovery_check(Method method, const Model& f, const Vector& x0,
                                      RandomStream& rng, MethodParams params = {});

// ---------------------------------------------------------------------------
// Class distance and the no-free-lunch construction

// Pointwise loss l(f, g, x) applied to r = f(x) - g(x).
enum class PointwiseLoss { kAbsolute, kSquared, kHalfSquared };
std::string to_string(PointwiseLoss l);
PointwiseLoss pointwise_loss_from_string(const std::string& s);
double apply_loss(PointwiseLoss loss, double residual);

struct DomainBox {
  Vector lo;
  Vector hi;
  static DomainBox cube(Eigen::Index d, double lo, double hi);
};
void validate(const DomainBox& box);

struct DistanceSearchConfig {
  PointwiseLoss loss = PointwiseLoss::kHalfSquared;
  int grid_1d = 2001;
  int grid_2d = 201;         // per axis
  int random_points = 10000;  // d >= 3
  int max_iterations = 2000;  // Lawson reweighting passes
  double tolerance = 1e-4;    // relative gap between the Lawson bounds
  int refine_starts = 5;
  int refine_steps = 100;
};

// Best uniform linear approximation g(x) = w.x + b of f over a box.
struct ClassDistance {
  double d_hat = 0.0;      // loss applied to the minimax residual
  double residual = 0.0;   // max |f - g| at the minimizer
  Vector weights;
  double intercept = 0.0;
  Vector argmax;           // where the residual peaks
  int iterations = 0;
  bool converged = false;  // false: budget exhausted before stabilizing
};

// Search points: a uniform grid in one and two dimensions, random points
// plus the box corners otherwise.
Matrix search_points(const DomainBox& box, const DistanceSearchConfig& cfg, RandomStream& rng);

// argmax_x loss(f(x) - (w.x + b)) over the box: best search point refined by
// projected gradient ascent.
Vector maximize_loss(const Model& f, const Vector& w, double b, const DomainBox& box,
                     const Matrix& candidates, const DistanceSearchConfig& cfg);

ClassDistance estimate_class_distance(const Model& f, const DomainBox& box, RandomStream& rng,
                                      const DistanceSearchConfig& cfg = {});

struct NflConfig {
  DistanceSearchConfig search;
  int z2_samples = 10000;
  double tolerance = 0.05;  // relative slack on d_hat
};

struct NflReport {
  Vector x0;
  std::string z1;  // benign neighborhood descriptor
  Vector g_weights;
  double g_intercept = 0.0;
  double eps_hat = 0.0;  // max loss of g* on the benign samples
  Vector x_adv;
  std::string z2;  // adversarial neighborhood descriptor
  double z2_max_loss = 0.0;
  ClassDistance distance;
  double tolerance = 0.05;
  bool inequality_held = false;  // z2_max_loss >= (1 - tolerance) * d_hat
};

// Fits g* on the benign neighborhood z1 with squared error on the perturbed
// input, locates x_adv, and evaluates g* on the segment x0 + t (x_adv - x0),
// t ~ Uniform(0, 1), with the endpoint t = 1 always included.
NflReport nfl_construct(const Model& f, const Vector& x0, const NeighborhoodSpec& z1,
                        const DomainBox& box, RandomStream& rng, const NflConfig& cfg = {});

// ---------------------------------------------------------------------------
// Reference-vs-LFA equivalence matrices

struct EquivalenceConfig {
  MethodParams params;
  int ig_steps = 1000;
  int threads = 1;
};

// Row i: reference implementation of methods[i]; column j: LFA instance of
// methods[j]. Entries are means over the points.
struct EquivalenceResult {
  std::vector<Method> methods;
  Matrix l1;
  Matrix cosine;
  Eigen::Index n_points = 0;

  std::vector<Eigen::Index> row_argmin() const;
  bool diagonal_dominant() const;
};

// Cosine distance with zero vectors mapped to 0 (both zero) or 1 (one zero).
double safe_cosine_distance(const Vector& a, const Vector& b);

reference::ReferenceConfig reference_config(const EquivalenceConfig& cfg);

// Reference and engine for the same method share the stream
// rng.fork(method, point), and therefore their noise.
EquivalenceResult equivalence_matrix(const Model& f, const Matrix& points,
                                     const std::vector<Method>& methods, const RandomStream& rng,
                                     const EquivalenceConfig& cfg = {});

struct ClusterSeparation {
  double within = 0.0;  // mean over off-diagonal same-cluster entries
  double cross = 0.0;   // mean over cross-cluster entries
};
ClusterSeparation cluster_separation(const EquivalenceResult& r, const Matrix& distances,
                                     const std::vector<Method>& a, const std::vector<Method>& b);

// ---------------------------------------------------------------------------
// Bottom-k perturbation tests

enum class PerturbNoise { kBinaryZero, kGaussian };
std::string to_string(PerturbNoise n);
PerturbNoise perturb_noise_from_string(const std::string& s);

struct PerturbConfig {
  std::vector<int> ks = {1, 2, 3};
  PerturbNoise noise = PerturbNoise::kBinaryZero;
  double sigma = 0.1;
  int trials = 100;
};

struct PerturbCurve {
  std::string method;
  PerturbNoise noise = PerturbNoise::kBinaryZero;
  std::vector<int> ks;
  std::vector<double> mean_abs_delta;  // per k
  Matrix per_point;                    // points x ks
};

// Indices of the k smallest |w_i|, ties to the lower index.
std::vector<Eigen::Index> bottom_k(const Vector& w, int k);

// Mean |f(x) - f(x0)| after perturbing `features` of x0.
double perturbation_delta(const Model& f, const Vector& x0,
                          const std::vector<Eigen::Index>& features, const PerturbConfig& cfg,
                          RandomStream& rng);

// Row p of `points` is explained by attributions[p]. Gaussian noise for
// (point p, k) comes from rng.fork("point", p).fork("k", k), so every
// method sees the same draws.
PerturbCurve perturbation_test(const Model& f, const Matrix& points,
                               const std::vector<Vector>& attributions, const std::string& method,
                               const PerturbConfig& cfg, const RandomStream& rng);

struct SignTest {
  int k = 0;
  int wins = 0;  // points where group a's mean delta <= group b's
  int points = 0;
};

// Per-point comparison of the group means of two sets of curves.
std::vector<SignTest> sign_test(const std::vector<PerturbCurve>& a,
                                const std::vector<PerturbCurve>& b);

}  // namespace lfa

#endif  // LFA_ANALYSIS_HPP_
