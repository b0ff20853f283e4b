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

#include "lfa/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "lfa/model_io.hpp"
#include "lfa/random.hpp"

namespace lfa {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

Eigen::Index RawTable::missing_count() const {
  return static_cast<Eigen::Index>((!observed).count());
}

std::vector<std::vector<std::string>> parse_csv_records(const std::string& text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A blank line carries no data.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field_started) {
          throw ParseError("line " + std::to_string(line) + ": stray quote inside a field");
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',': end_field(); break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field at end of input");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

RawTable parse_csv(const std::string& text, const CsvOptions& opts) {
  const auto records = parse_csv_records(text);
  if (records.empty()) throw ParseError("csv has no header row");
  const auto& header = records.front();
  const std::size_t cols = header.size();
  if (cols < 2) throw ParseError("csv needs at least one feature and one target column");
  if (records.size() == 1) throw InvalidArgument("dataset is empty (header only)");

  std::size_t target = cols - 1;
  if (!opts.target_column.empty()) {
    const auto it = std::find(header.begin(), header.end(), opts.target_column);
    if (it == header.end()) {
      throw InvalidArgument("target column '" + opts.target_column + "' not in header");
    }
    target = static_cast<std::size_t>(it - header.begin());
  }

  RawTable t;
  t.target_name = header[target];
  for (std::size_t c = 0; c < cols; ++c) {
    if (c != target) t.feature_names.push_back(header[c]);
  }
  const auto n = static_cast<Eigen::Index>(records.size() - 1);
  const auto d = static_cast<Eigen::Index>(cols - 1);
  t.features.resize(n, d);
  t.targets.resize(n);
  t.observed.resize(n, d);

  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& rec = records[static_cast<std::size_t>(r) + 1];
    const std::string where = "row " + std::to_string(r + 2);
    if (rec.size() != cols) {
      throw ParseError(where + ": expected " + std::to_string(cols) + " columns, found " +
                       std::to_string(rec.size()));
    }
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::string& cell = rec[c];
      const bool missing = cell == opts.missing_marker;
      double v = 0.0;
      if (!missing && !parse_number(cell, v)) {
        throw ParseError(where + ", column '" + header[c] + "': cannot parse '" + cell + "'");
      }
      if (c == target) {
        if (missing) throw ParseError(where + ": target value is missing");
        t.targets(r) = v;
      } else {
        t.features(r, j) = missing ? std::numeric_limits<double>::quiet_NaN() : v;
        t.observed(r, j) = !missing;
        ++j;
      }
    }
  }
  return t;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw NumericalFailure("write to '" + path.string() + "' failed");
}

RawTable load_csv(const std::filesystem::path& path, const CsvOptions& opts) {
  return parse_csv(read_text_file(path), opts);
}

std::string table_to_csv(const RawTable& table, const std::string& missing_marker) {
  std::ostringstream out;
  for (const auto& name : table.feature_names) out << csv_escape(name) << ',';
  out << csv_escape(table.target_name) << '\n';
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    for (Eigen::Index j = 0; j < table.features.cols(); ++j) {
      out << (table.observed(r, j) ? format_double(table.features(r, j))
                                   : csv_escape(missing_marker))
          << ',';
    }
    out << format_double(table.targets(r)) << '\n';
  }
  return out.str();
}

RawTable knn_impute(const RawTable& raw, int k) {
  if (k < 1) throw InvalidArgument("k must be positive");
  const Eigen::Index n = raw.rows();
  const Eigen::Index d = raw.features.cols();
  std::vector<Eigen::Index> complete;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (raw.observed.row(r).all()) complete.push_back(r);
  }
  if (static_cast<Eigen::Index>(k) >= static_cast<Eigen::Index>(complete.size())) {
    throw InvalidArgument("knn imputation with k=" + std::to_string(k) + " needs more than " +
                          std::to_string(k) + " complete rows; found " +
                          std::to_string(complete.size()));
  }
  if (raw.missing_count() == 0) return raw;

  RawTable out = raw;
  for (Eigen::Index r = 0; r < n; ++r) {
    if (raw.observed.row(r).all()) continue;
    const auto shared = raw.observed.row(r).count();
    if (shared == 0) {
      throw InvalidArgument("row " + std::to_string(r) + " has no observed feature");
    }
    std::vector<std::pair<double, Eigen::Index>> dist;
    for (const auto c : complete) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        if (!raw.observed(r, j)) continue;
        const double diff = raw.features(r, j) - raw.features(c, j);
        s += diff * diff;
      }
      dist.emplace_back(std::sqrt(static_cast<double>(d) / static_cast<double>(shared) * s), c);
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    for (Eigen::Index j = 0; j < d; ++j) {
      if (raw.observed(r, j)) continue;
      double mean = 0.0;
      for (int i = 0; i < k; ++i) mean += raw.features(dist[static_cast<std::size_t>(i)].second, j);
      out.features(r, j) = mean / k;
      out.observed(r, j) = true;
    }
  }
  return out;
}

NormalizationRecord fit_normalization(const Matrix& features) {
  if (features.rows() == 0) throw InvalidArgument("cannot normalize an empty table");
  if (!features.allFinite()) throw InvalidArgument("normalization needs a complete table");
  NormalizationRecord rec;
  rec.mean = features.colwise().mean().transpose();
  const Matrix centered = features.rowwise() - rec.mean.transpose();
  rec.min = centered.colwise().minCoeff().transpose();
  rec.max = centered.colwise().maxCoeff().transpose();
  return rec;
}

Matrix apply_normalization(const NormalizationRecord& rec, const Matrix& features) {
  if (features.cols() != rec.mean.size()) {
    throw DimensionMismatch("normalization record does not match the feature count");
  }
  Matrix out(features.rows(), features.cols());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double range = rec.max(j) - rec.min(j);
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      out(i, j) = range > 0
                      ? std::clamp((features(i, j) - rec.mean(j) - rec.min(j)) / range, 0.0, 1.0)
                      : 0.5;
    }
  }
  return out;
}

Matrix invert_normalization(const NormalizationRecord& rec, const Matrix& normalized) {
  if (normalized.cols() != rec.mean.size()) {
    throw DimensionMismatch("normalization record does not match the feature count");
  }
  Matrix out(normalized.rows(), normalized.cols());
  for (Eigen::Index j = 0; j < normalized.cols(); ++j) {
    const double range = rec.max(j) - rec.min(j);
    for (Eigen::Index i = 0; i < normalized.rows(); ++i) {
      out(i, j) = range > 0 ? normalized(i, j) * range + rec.min(j) + rec.mean(j) : rec.mean(j);
    }
  }
  return out;
}

Dataset normalize(const RawTable& complete, const std::vector<Eigen::Index>* fit_rows) {
  if (complete.missing_count() > 0 || !complete.features.allFinite()) {
    throw InvalidArgument("normalization needs a complete table; impute first");
  }
  Dataset ds;
  ds.feature_names = complete.feature_names;
  ds.target_name = complete.target_name;
  if (fit_rows) {
    if (fit_rows->empty()) throw InvalidArgument("normalization needs at least one fit row");
    Matrix sub(static_cast<Eigen::Index>(fit_rows->size()), complete.features.cols());
    for (std::size_t i = 0; i < fit_rows->size(); ++i) {
      sub.row(static_cast<Eigen::Index>(i)) = complete.features.row((*fit_rows)[i]);
    }
    ds.normalization = fit_normalization(sub);
  } else {
    ds.normalization = fit_normalization(complete.features);
  }
  ds.features = apply_normalization(ds.normalization, complete.features);
  ds.targets = complete.targets;
  return ds;
}

Dataset select_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
  Dataset out = data;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), data.dim());
  out.targets.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);
    out.targets(static_cast<Eigen::Index>(i)) = data.targets(rows[i]);
  }
  return out;
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(
    Eigen::Index n, double fraction, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("splitting needs at least 2 rows");
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw InvalidArgument("split fraction must lie in (0, 1)");
  }
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  RandomStream rng(seed);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const auto j = static_cast<Eigen::Index>(rng.choice(static_cast<std::uint64_t>(i + 1)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  const auto n_train = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * fraction)), 1, n - 1);
  std::vector<Eigen::Index> train(idx.begin(), idx.begin() + n_train);
  std::vector<Eigen::Index> test(idx.begin() + n_train, idx.end());
  return {train, test};
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  const auto [train, test] = split_indices(data.rows(), fraction, seed);
  return {select_rows(data, train), select_rows(data, test)};
}

std::string to_string(SynthKind k) {
  switch (k) {
    case SynthKind::kLinearRegression: return "linear-regression";
    case SynthKind::kLogisticBlobs: return "logistic-blobs";
    case SynthKind::kFriedmanLike: return "friedman-like";
  }
  return "linear-regression";
}

SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "linear-regression") return SynthKind::kLinearRegression;
  if (s == "logistic-blobs") return SynthKind::kLogisticBlobs;
  if (s == "friedman-like") return SynthKind::kFriedmanLike;
  throw InvalidArgument("unknown synthetic dataset kind '" + s + "'");
}

Dataset synth_generate(const SynthSpec& spec) {
  if (spec.n < 1 || spec.d < 1) throw InvalidArgument("synthetic data needs n, d >= 1");
  if (!(spec.noise >= 0) || !std::isfinite(spec.noise)) {
    throw InvalidArgument("noise must be finite and nonnegative");
  }
  RandomStream root(spec.seed);
  RandomStream feat_rng = root.fork("features");
  RandomStream truth_rng = root.fork("truth");
  RandomStream noise_rng = root.fork("noise");
  const Eigen::Index n = spec.n;
  const Eigen::Index d = spec.d;

  RawTable raw;
  for (Eigen::Index j = 0; j < d; ++j) raw.feature_names.push_back("x" + std::to_string(j));
  raw.target_name = "y";
  raw.features.resize(n, d);
  raw.targets = Vector::Zero(n);
  raw.observed = BoolMatrix::Constant(n, d, true);

  Vector direction;
  if (spec.kind == SynthKind::kLogisticBlobs) {
    direction.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) direction(j) = truth_rng.normal();
    direction /= direction.norm();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double label = (i % 2 == 0) ? 1.0 : 0.0;
      const double sign = label > 0 ? 1.0 : -1.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        raw.features(i, j) = sign * 0.5 * spec.separation * direction(j) + feat_rng.normal();
      }
      raw.targets(i) = label;
    }
  } else {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) raw.features(i, j) = feat_rng.uniform();
  }

  Dataset ds = normalize(raw);
  ds.generator = to_string(spec.kind);
  const auto& rec = ds.normalization;
  switch (spec.kind) {
    case SynthKind::kLinearRegression: {
      ds.true_weights.resize(d);
      for (Eigen::Index j = 0; j < d; ++j) ds.true_weights(j) = truth_rng.uniform(-2.0, 2.0);
      ds.true_intercept = truth_rng.uniform(-1.0, 1.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        ds.targets(i) = ds.features.row(i).dot(ds.true_weights) + ds.true_intercept +
                        spec.noise * noise_rng.normal();
      }
      break;
    }
    case SynthKind::kLogisticBlobs: {
      // Log-odds s u.x_raw with x_raw = x * range + (min + mean).
      const Vector range = rec.max - rec.min;
      const Vector offset = rec.min + rec.mean;
      ds.true_weights = spec.separation * direction.cwiseProduct(range);
      ds.true_intercept = spec.separation * direction.dot(offset);
      break;
    }
    case SynthKind::kFriedmanLike: {
      auto col = [&](Eigen::Index i, Eigen::Index j) { return j < d ? ds.features(i, j) : 0.0; };
      for (Eigen::Index i = 0; i < n; ++i) {
        const double y = 10.0 * std::sin(std::numbers::pi * col(i, 0) * col(i, 1)) +
                         20.0 * (col(i, 2) - 0.5) * (col(i, 2) - 0.5) + 10.0 * col(i, 3) +
                         5.0 * col(i, 4);
        ds.targets(i) = y / 10.0 + spec.noise * noise_rng.normal();
      }
      break;
    }
  }
  return ds;
}

}  // namespace lfa
