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

#ifndef LFA_CLI_HPP_
#define LFA_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lfa/analysis.hpp"
#include "lfa/dataio.hpp"
#include "lfa/registry.hpp"
#include "lfa/reports.hpp"
#include "lfa/training.hpp"

namespace lfa::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

std::string artifact_version();

struct DatasetConfig {
  std::string source = "synth";  // synth | csv
  SynthSpec synth;
  std::filesystem::path path;
  CsvOptions csv;
  int knn_k = 5;
  bool normalize_train_only = false;
  double split_fraction = 0.8;
  std::uint64_t split_seed = 0;
};

struct ModelConfig {
  std::string source = "train";  // train | file | generator | inline
  Architecture architecture = Architecture::default_regression_net();
  TrainConfig train;
  std::filesystem::path path;
  nlohmann::json spec;  // inline model document
};

struct PointsConfig {
  std::string from = "test";  // test | train | explicit
  int count = 20;
  int start = 0;
  Matrix values;
};

struct NflSettings {
  Vector x0;
  Vector box_lo;
  Vector box_hi;
  double z1_sigma = 0.01;
  int z1_samples = 1000;
  NflConfig nfl;
};

struct PerturbSettings {
  std::vector<int> ks = {1, 2, 3};
  std::vector<PerturbNoise> noises = {PerturbNoise::kBinaryZero, PerturbNoise::kGaussian};
  double sigma = 0.1;
  int trials = 100;
  std::vector<Method> group_a = {Method::kLime, Method::kKernelShap, Method::kOcclusion,
                                 Method::kIntegratedGradients, Method::kGradXInput};
  std::vector<Method> group_b = {Method::kSmoothGrad, Method::kVanillaGradients};
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  int threads = 1;
  DatasetConfig dataset;
  ModelConfig model;
  PointsConfig points;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  MethodParams method_params;
  Solver solver = Solver::kClosedForm;
  IterativeConfig iterative;
  int ig_steps = 1000;
  std::vector<Method> cluster_a = {Method::kSmoothGrad, Method::kVanillaGradients, Method::kCLime};
  std::vector<Method> cluster_b = {Method::kLime, Method::kKernelShap, Method::kOcclusion,
                                   Method::kIntegratedGradients, Method::kGradXInput};
  std::optional<ModelFamily> recover_family;
  bool recover_reparam = true;
  NflSettings nfl;
  PerturbSettings perturb;
};

// Strict parse: unknown keys, wrong types and out-of-range values raise
// ConfigError. Seeds of the dataset, split and trainer default to `seed`.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

// Fully resolved configuration, echoed into every report.
OrderedJson config_to_json(const RunConfig& cfg);

struct RunOptions {
  bool timestamp = true;
};

// Subcommands. Each writes its outputs under cfg.output_dir and returns the
// paths written.
std::vector<std::filesystem::path> cmd_train(const RunConfig& cfg, const RunOptions& opts);
std::vector<std::filesystem::path> cmd_explain(const RunConfig& cfg, const RunOptions& opts);
std::vector<std::filesystem::path> cmd_equivalence(const RunConfig& cfg, const RunOptions& opts);
std::vector<std::filesystem::path> cmd_recover(const RunConfig& cfg, const RunOptions& opts);
std::vector<std::filesystem::path> cmd_nfl(const RunConfig& cfg, const RunOptions& opts);
std::vector<std::filesystem::path> cmd_perturb_test(const RunConfig& cfg, const RunOptions& opts);

// `error: code=<code> message="<message>"`
std::string error_line(const std::string& code, const std::string& message);

// Entry point of the `lfa` binary. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lfa::cli

#endif  // LFA_CLI_HPP_
