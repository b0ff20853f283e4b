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

#include "lfa/model_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace lfa {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw InvalidArgument("cannot serialize a non-finite value");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("not a decimal number: '" + s + "'");
  }
  return v;
}

nlohmann::json vector_to_json(const Vector& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(format_double(v(i)));
  return arr;
}

Vector vector_from_json(const nlohmann::json& arr) {
  if (!arr.is_array()) throw ParseError("expected an array of decimal strings");
  Vector v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& e = arr[i];
    if (e.is_string()) {
      v(static_cast<Eigen::Index>(i)) = parse_double(e.get<std::string>());
    } else if (e.is_number()) {
      v(static_cast<Eigen::Index>(i)) = e.get<double>();
    } else {
      throw ParseError("expected a number at position " + std::to_string(i));
    }
  }
  return v;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(vector_to_json(m.row(r).transpose()));
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array() || rows.empty()) throw ParseError("expected a nonempty matrix");
  const Vector first = vector_from_json(rows[0]);
  Matrix m(static_cast<Eigen::Index>(rows.size()), first.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vector row = vector_from_json(rows[r]);
    if (row.size() != m.cols()) throw ParseError("ragged matrix rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

double scalar_from_json(const nlohmann::json& v) {
  if (v.is_string()) return parse_double(v.get<std::string>());
  if (v.is_number()) return v.get<double>();
  throw ParseError("expected a decimal string");
}

}  // namespace

nlohmann::json model_to_json(const Model& model) {
  nlohmann::json doc;
  doc["kind"] = model.kind();
  if (const auto* m = dynamic_cast<const LinearModel*>(&model)) {
    doc["weights"] = vector_to_json(m->weights());
    doc["intercept"] = format_double(m->intercept());
  } else if (const auto* m = dynamic_cast<const LogisticModel*>(&model)) {
    doc["weights"] = vector_to_json(m->weights());
    doc["intercept"] = format_double(m->intercept());
  } else if (const auto* m = dynamic_cast<const SinusoidModel*>(&model)) {
    doc["frequencies"] = vector_to_json(m->frequencies());
  } else if (const auto* m = dynamic_cast<const QuadraticModel*>(&model)) {
    doc["curvature"] = vector_to_json(m->curvature());
    doc["linear"] = vector_to_json(m->linear());
    doc["intercept"] = format_double(m->intercept());
  } else if (const auto* m = dynamic_cast<const MlpModel*>(&model)) {
    auto layers = nlohmann::json::array();
    for (const auto& l : m->layers()) {
      layers.push_back({{"activation", to_string(l.activation)},
                        {"weights", matrix_to_json(l.weights)},
                        {"bias", vector_to_json(l.bias)}});
    }
    doc["layers"] = std::move(layers);
  } else {
    throw InvalidArgument("model kind '" + model.kind() + "' is not serializable");
  }
  return doc;
}

std::unique_ptr<Model> model_from_json(const nlohmann::json& doc) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "linear") {
      return std::make_unique<LinearModel>(vector_from_json(doc.at("weights")),
                                           scalar_from_json(doc.at("intercept")));
    }
    if (kind == "logistic") {
      return std::make_unique<LogisticModel>(vector_from_json(doc.at("weights")),
                                             scalar_from_json(doc.at("intercept")));
    }
    if (kind == "sinusoid") {
      return std::make_unique<SinusoidModel>(vector_from_json(doc.at("frequencies")));
    }
    if (kind == "quadratic") {
      return std::make_unique<QuadraticModel>(vector_from_json(doc.at("curvature")),
                                              vector_from_json(doc.at("linear")),
                                              scalar_from_json(doc.at("intercept")));
    }
    if (kind == "mlp") {
      std::vector<DenseLayer> layers;
      for (const auto& l : doc.at("layers")) {
        layers.push_back({matrix_from_json(l.at("weights")), vector_from_json(l.at("bias")),
                          activation_from_string(l.at("activation").get<std::string>())});
      }
      return std::make_unique<MlpModel>(std::move(layers));
    }
    throw ParseError("unknown model kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << model_to_json(model).dump(2) << '\n';
}

std::unique_ptr<Model> load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open model file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace lfa
