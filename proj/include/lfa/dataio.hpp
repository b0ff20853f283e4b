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

#ifndef LFA_DATAIO_HPP_
#define LFA_DATAIO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lfa/core_math.hpp"

namespace lfa {

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Parsed CSV with one target column. Missing feature cells hold NaN and are
// false in `observed`.
struct RawTable {
  std::vector<std::string> feature_names;
  std::string target_name;
  Matrix features;  // n x d
  Vector targets;   // n
  BoolMatrix observed;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index missing_count() const;
};

struct CsvOptions {
  std::string target_column;  // empty selects the last column
  std::string missing_marker;  // a cell equal to this is missing
};

// RFC-4180 records: comma separated, double-quoted fields with "" escapes,
// LF or CRLF line endings.
std::vector<std::vector<std::string>> parse_csv_records(const std::string& text);

// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(const std::string& field);

RawTable parse_csv(const std::string& text, const CsvOptions& opts = {});
RawTable load_csv(const std::filesystem::path& path, const CsvOptions& opts = {});

// Writes features then the target column, missing cells as the marker.
std::string table_to_csv(const RawTable& table, const std::string& missing_marker = "");

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

// Fills each missing cell with the mean of its column over the k nearest
// complete rows. Distance uses only the features the incomplete row
// observes: sqrt(d / shared * sum of squared differences). Ties go to the
// lower row index. Observed cells are never changed.
RawTable knn_impute(const RawTable& raw, int k = 5);

// Per feature: mean, then min and max of the centered column.
struct NormalizationRecord {
  Vector mean;
  Vector min;
  Vector max;
};

struct Dataset {
  std::vector<std::string> feature_names;
  std::string target_name;
  Matrix features;  // n x d, in [0, 1]
  Vector targets;
  NormalizationRecord normalization;
  // Known generating function, for synthetic data.
  std::string generator;
  Vector true_weights;
  double true_intercept = 0.0;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }
};

NormalizationRecord fit_normalization(const Matrix& features);

// Center, then map the centered [min, max] to [0, 1]; constant columns map
// to 0.5. Values outside the fitted range are clamped to [0, 1].
Matrix apply_normalization(const NormalizationRecord& rec, const Matrix& features);
Matrix invert_normalization(const NormalizationRecord& rec, const Matrix& normalized);

// Normalizes a complete table. With `fit_rows`, statistics come from those
// rows only (train-only normalization).
Dataset normalize(const RawTable& complete, const std::vector<Eigen::Index>* fit_rows = nullptr);

Dataset select_rows(const Dataset& data, const std::vector<Eigen::Index>& rows);

// Seeded shuffle, then the first round(n * fraction) rows (at least one,
// at most n - 1) form the training set.
std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(
    Eigen::Index n, double fraction, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

enum class SynthKind { kLinearRegression, kLogisticBlobs, kFriedmanLike };
std::string to_string(SynthKind k);
SynthKind synth_kind_from_string(const std::string& s);

struct SynthSpec {
  SynthKind kind = SynthKind::kLinearRegression;
  int n = 1000;
  int d = 5;
  double noise = 0.0;       // target noise standard deviation
  double separation = 4.0;  // distance between blob centers
  std::uint64_t seed = 0;
};

// Features are drawn, normalized, and targets computed from the normalized
// features:
//   linear-regression  y = w.x + b + noise
//   logistic-blobs     two unit-variance blobs; ground truth is the Bayes
//                      log-odds expressed on the normalized features
//   friedman-like      Friedman #1 on the first five features, divided by 10
Dataset synth_generate(const SynthSpec& spec);

}  // namespace lfa

#endif  // LFA_DATAIO_HPP_
