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

#ifndef LFA_REPORTS_HPP_
#define LFA_REPORTS_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lfa/analysis.hpp"
#include "lfa/engine.hpp"

// JSON and CSV renderings of explanations and analysis reports. Objects keep
// insertion order so that serialized reports are byte-stable.
namespace lfa {

using OrderedJson = nlohmann::ordered_json;

OrderedJson numbers_to_json(const Vector& v);
OrderedJson matrix_to_json_rows(const Matrix& m);
OrderedJson neighborhood_to_json(const NeighborhoodSpec& spec);
OrderedJson instance_to_json(const LfaInstance& inst);

OrderedJson explanation_to_json(const Explanation& e);
OrderedJson recovery_to_json(const RecoveryReport& r);
OrderedJson class_distance_to_json(const ClassDistance& c, PointwiseLoss loss);
OrderedJson nfl_to_json(const NflReport& r, PointwiseLoss loss);
OrderedJson equivalence_to_json(const EquivalenceResult& r);
OrderedJson curve_to_json(const PerturbCurve& c);
OrderedJson sign_test_to_json(const std::vector<SignTest>& tests);

// One row per cell: reference, instance, l1, cosine.
std::string equivalence_to_csv(const EquivalenceResult& r);
// Square matrix with method names on both axes.
std::string matrix_to_csv(const EquivalenceResult& r, const Matrix& m);
// One row per (method, k): method, noise, k, mean_abs_delta.
std::string curves_to_csv(const std::vector<PerturbCurve>& curves);
// One row per (method, point, k): method, noise, point, k, abs_delta.
std::string curve_points_to_csv(const std::vector<PerturbCurve>& curves);

}  // namespace lfa

#endif  // LFA_REPORTS_HPP_
