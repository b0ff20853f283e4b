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

#include "lfa/reports.hpp"

#include <cmath>
#include <sstream>

#include "lfa/model_io.hpp"

namespace lfa {
namespace {

// NaN and infinities become null.
OrderedJson number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_double(v) : ""; }

std::string penalty_name(Penalty p) { return p == Penalty::kL0 ? "l0" : "l1"; }

}  // namespace

OrderedJson numbers_to_json(const Vector& v) {
  OrderedJson out = OrderedJson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

OrderedJson matrix_to_json_rows(const Matrix& m) {
  OrderedJson out = OrderedJson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(numbers_to_json(m.row(i).transpose()));
  return out;
}

OrderedJson neighborhood_to_json(const NeighborhoodSpec& spec) {
  OrderedJson j;
  j["noise"] = describe(spec.noise);
  j["combine"] = to_string(spec.combine);
  j["kernel"] = describe(spec.kernel);
  j["n_samples"] = spec.n_samples;
  return j;
}

OrderedJson instance_to_json(const LfaInstance& inst) {
  OrderedJson j;
  j["method"] = inst.method;
  j["neighborhood"] = neighborhood_to_json(inst.neighborhood);
  OrderedJson loss;
  loss["kind"] = to_string(inst.loss.kind);
  if (inst.loss.regularization) {
    loss["lambda"] = inst.loss.regularization->lambda;
    loss["penalty"] = penalty_name(inst.loss.regularization->penalty);
  }
  j["loss"] = loss;
  j["param"] = to_string(inst.param);
  j["intercept_rule"] = inst.intercept == InterceptRule::kFree ? "free" : "fixed_at_zero";
  j["target"] = inst.target == TargetRule::kValue ? "value" : "occlusion_delta";
  j["ridge"] = inst.ridge;
  return j;
}

OrderedJson explanation_to_json(const Explanation& e) {
  OrderedJson j;
  j["method"] = e.method;
  j["x0"] = numbers_to_json(e.x0);
  j["weights"] = numbers_to_json(e.weights);
  j["intercept"] = number(e.intercept);
  j["scale"] = to_string(e.scale);
  OrderedJson d;
  d["solver"] = to_string(e.diagnostics.solver);
  d["train_loss"] = number(e.diagnostics.train_loss);
  d["validation_loss"] = number(e.diagnostics.validation_loss);
  d["test_loss"] = number(e.diagnostics.test_loss);
  d["n_used"] = e.diagnostics.n_used;
  d["seed"] = e.diagnostics.seed;
  d["epochs_run"] = e.diagnostics.epochs_run;
  d["ridge"] = e.diagnostics.ridge;
  j["diagnostics"] = d;
  return j;
}

OrderedJson recovery_to_json(const RecoveryReport& r) {
  OrderedJson j;
  j["method"] = r.method;
  j["family"] = to_string(r.family);
  j["x0"] = numbers_to_json(r.x0);
  j["model_weights"] = numbers_to_json(r.model_weights);
  j["weights"] = numbers_to_json(r.weights);
  j["target"] = to_string(r.target);
  j["target_weights"] = numbers_to_json(r.target_weights);
  j["l1"] = number(r.l1);
  j["relative_l1"] = number(r.relative_l1);
  j["linf"] = number(r.linf);
  j["cosine"] = number(r.cosine);
  j["l1_to_model_weights"] = number(r.l1_to_model_weights);
  j["l1_to_weights_times_input"] = number(r.l1_to_weights_times_input);
  j["threshold"] = r.threshold;
  j["recovered"] = r.recovered;
  return j;
}

OrderedJson class_distance_to_json(const ClassDistance& c, PointwiseLoss loss) {
  OrderedJson j;
  j["loss"] = to_string(loss);
  j["d_hat"] = number(c.d_hat);
  j["max_residual"] = number(c.residual);
  j["weights"] = numbers_to_json(c.weights);
  j["intercept"] = number(c.intercept);
  j["argmax"] = numbers_to_json(c.argmax);
  j["iterations"] = c.iterations;
  j["converged"] = c.converged;
  return j;
}

OrderedJson nfl_to_json(const NflReport& r, PointwiseLoss loss) {
  OrderedJson j;
  j["x0"] = numbers_to_json(r.x0);
  j["z1"] = r.z1;
  j["g_weights"] = numbers_to_json(r.g_weights);
  j["g_intercept"] = number(r.g_intercept);
  j["eps_hat"] = number(r.eps_hat);
  j["x_adv"] = numbers_to_json(r.x_adv);
  j["z2"] = r.z2;
  j["z2_max_loss"] = number(r.z2_max_loss);
  j["class_distance"] = class_distance_to_json(r.distance, loss);
  j["tolerance"] = r.tolerance;
  j["inequality_held"] = r.inequality_held;
  return j;
}

OrderedJson equivalence_to_json(const EquivalenceResult& r) {
  OrderedJson j;
  OrderedJson names = OrderedJson::array();
  for (const Method m : r.methods) names.push_back(to_string(m));
  j["methods"] = names;
  j["n_points"] = r.n_points;
  j["l1"] = matrix_to_json_rows(r.l1);
  j["cosine"] = matrix_to_json_rows(r.cosine);
  OrderedJson argmin = OrderedJson::array();
  for (const auto a : r.row_argmin()) argmin.push_back(to_string(r.methods[static_cast<std::size_t>(a)]));
  j["row_argmin"] = argmin;
  j["diagonal_dominant"] = r.diagonal_dominant();
  return j;
}

OrderedJson curve_to_json(const PerturbCurve& c) {
  OrderedJson j;
  j["method"] = c.method;
  j["noise"] = to_string(c.noise);
  j["k"] = c.ks;
  OrderedJson means = OrderedJson::array();
  for (const double v : c.mean_abs_delta) means.push_back(number(v));
  j["mean_abs_delta"] = means;
  return j;
}

OrderedJson sign_test_to_json(const std::vector<SignTest>& tests) {
  OrderedJson out = OrderedJson::array();
  for (const auto& t : tests) out.push_back({{"k", t.k}, {"wins", t.wins}, {"points", t.points}});
  return out;
}

std::string equivalence_to_csv(const EquivalenceResult& r) {
  std::ostringstream out;
  out << "reference,instance,l1,cosine\n";
  for (std::size_t i = 0; i < r.methods.size(); ++i) {
    for (std::size_t j = 0; j < r.methods.size(); ++j) {
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(j);
      out << to_string(r.methods[i]) << ',' << to_string(r.methods[j]) << ','
          << csv_number(r.l1(a, b)) << ',' << csv_number(r.cosine(a, b)) << '\n';
    }
  }
  return out.str();
}

std::string matrix_to_csv(const EquivalenceResult& r, const Matrix& m) {
  std::ostringstream out;
  out << "reference";
  for (const Method x : r.methods) out << ',' << to_string(x);
  out << '\n';
  for (std::size_t i = 0; i < r.methods.size(); ++i) {
    out << to_string(r.methods[i]);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << ',' << csv_number(m(static_cast<Eigen::Index>(i), j));
    }
    out << '\n';
  }
  return out.str();
}

std::string curves_to_csv(const std::vector<PerturbCurve>& curves) {
  std::ostringstream out;
  out << "method,noise,k,mean_abs_delta\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.ks.size(); ++i) {
      out << c.method << ',' << to_string(c.noise) << ',' << c.ks[i] << ','
          << csv_number(c.mean_abs_delta[i]) << '\n';
    }
  }
  return out.str();
}

std::string curve_points_to_csv(const std::vector<PerturbCurve>& curves) {
  std::ostringstream out;
  out << "method,noise,point,k,abs_delta\n";
  for (const auto& c : curves) {
    for (Eigen::Index p = 0; p < c.per_point.rows(); ++p) {
      for (std::size_t i = 0; i < c.ks.size(); ++i) {
        out << c.method << ',' << to_string(c.noise) << ',' << p << ',' << c.ks[i] << ','
            << csv_number(c.per_point(p, static_cast<Eigen::Index>(i))) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace lfa
