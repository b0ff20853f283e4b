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

#ifndef LFA_MODEL_IO_HPP_
#define LFA_MODEL_IO_HPP_

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "lfa/models.hpp"

namespace lfa {

// Doubles are stored as shortest round-trip decimal strings so that
// load(save(m)) is bit-exact.
std::string format_double(double v);
double parse_double(const std::string& s);

nlohmann::json model_to_json(const Model& model);
std::unique_ptr<Model> model_from_json(const nlohmann::json& doc);

void save_model(const Model& model, const std::string& path);
std::unique_ptr<Model> load_model(const std::string& path);

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& arr);

}  // namespace lfa

#endif  // LFA_MODEL_IO_HPP_
