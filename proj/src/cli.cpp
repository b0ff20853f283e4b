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

#include "lfa/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "lfa/model_io.hpp"
#include "lfa/parallel.hpp"

#ifndef LFA_VERSION
#define LFA_VERSION "0.0.0"
#endif

namespace lfa::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string artifact_version() { return LFA_VERSION; }

// ---------------------------------------------------------------------------
// Strict configuration reading

namespace {

class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) fail("must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!doc_.contains(key)) fail_key(key, "is required");
    return doc_.at(key);
  }

  std::string string(const std::string& key, const std::string& def) {
    if (!has(key)) return def;
    const json& v = doc_.at(key);
    if (!v.is_string()) fail_key(key, "must be a string");
    return v.get<std::string>();
  }

  std::string choice(const std::string& key, const std::string& def,
                     const std::vector<std::string>& allowed) {
    const std::string v = string(key, def);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail_key(key, "must be one of: " + list);
    }
    return v;
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const json& v = doc_.at(key);
    if (!v.is_number()) fail_key(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail_key(key, "must be finite");
    return d;
  }

  long long integer(const std::string& key, long long def) {
    if (!has(key)) return def;
    const json& v = doc_.at(key);
    if (!v.is_number_integer()) fail_key(key, "must be an integer");
    return v.get<long long>();
  }

  int positive(const std::string& key, int def) {
    const long long v = integer(key, def);
    if (v < 1 || v > 1'000'000'000) fail_key(key, "must be a positive integer");
    return static_cast<int>(v);
  }

  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const json& v = doc_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      fail_key(key, "must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool def) {
    if (!has(key)) return def;
    const json& v = doc_.at(key);
    if (!v.is_boolean()) fail_key(key, "must be true or false");
    return v.get<bool>();
  }

  Vector vector(const std::string& key) {
    const json& v = at(key);
    return to_vector(v, key);
  }

  // A number is broadcast to `d` entries.
  Vector vector_or_scalar(const std::string& key, Eigen::Index d, double def) {
    if (!has(key)) return Vector::Constant(d, def);
    const json& v = doc_.at(key);
    if (v.is_number()) return Vector::Constant(d, v.get<double>());
    Vector out = to_vector(v, key);
    if (out.size() != d) fail_key(key, "must have " + std::to_string(d) + " entries");
    return out;
  }

  Matrix matrix(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array() || v.empty()) fail_key(key, "must be a nonempty array of rows");
    const Vector first = to_vector(v.at(0), key);
    Matrix m(static_cast<Eigen::Index>(v.size()), first.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vector row = to_vector(v.at(i), key);
      if (row.size() != first.size()) fail_key(key, "rows must have equal length");
      m.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
    return m;
  }

  std::vector<int> int_list(const std::string& key, std::vector<int> def) {
    if (!has(key)) return def;
    const json& v = doc_.at(key);
    if (!v.is_array()) fail_key(key, "must be an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) fail_key(key, "must be an array of integers");
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::vector<std::string> string_list(const std::string& key, std::vector<std::string> def) {
    if (!has(key)) return def;
    const json& v = doc_.at(key);
    if (!v.is_array()) fail_key(key, "must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) fail_key(key, "must be an array of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  std::vector<Method> methods(const std::string& key, std::vector<Method> def) {
    if (!has(key)) return def;
    std::vector<Method> out;
    for (const auto& name : string_list(key, {})) {
      try {
        out.push_back(method_from_string(name));
      } catch (const InvalidArgument&) {
        fail_key(key, "names unknown method '" + name + "'");
      }
    }
    if (out.empty()) fail_key(key, "must list at least one method");
    return out;
  }

  Section child(const std::string& key) {
    if (!has(key)) return Section(empty_object(), path_ + "." + key);
    return Section(doc_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (const auto& [key, value] : doc_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + path_ + "." + key + "'");
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + " " + what); }
  [[noreturn]] void fail_key(const std::string& key, const std::string& what) const {
    throw ConfigError(path_ + "." + key + " " + what);
  }

 private:
  static const json& empty_object() {
    static const json e = json::object();
    return e;
  }

  Vector to_vector(const json& v, const std::string& key) const {
    if (!v.is_array() || v.empty()) fail_key(key, "must be a nonempty array of numbers");
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail_key(key, "must be a nonempty array of numbers");
      out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    if (!out.allFinite()) fail_key(key, "must contain finite numbers");
    return out;
  }

  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

Activation parse_activation(Section& s, const std::string& key, Activation def) {
  const std::string v =
      s.choice(key, to_string(def), {"identity", "tanh", "relu", "sigmoid"});
  return activation_from_string(v);
}

void parse_dataset(Section s, RunConfig& cfg) {
  DatasetConfig& d = cfg.dataset;
  d.source = s.choice("source", "synth", {"synth", "csv"});
  if (d.source == "synth") {
    d.synth.kind = synth_kind_from_string(
        s.choice("kind", "friedman-like", {"linear-regression", "logistic-blobs", "friedman-like"}));
    d.synth.n = s.positive("n", 1000);
    d.synth.d = s.positive("d", 5);
    d.synth.noise = s.number("noise", 0.0);
    if (d.synth.noise < 0) s.fail_key("noise", "must be nonnegative");
    d.synth.separation = s.number("separation", 4.0);
    d.synth.seed = s.u64("seed", cfg.seed);
  } else {
    d.path = s.string("path", "");
    if (d.path.empty()) s.fail_key("path", "is required for csv datasets");
    d.csv.target_column = s.string("target_column", "");
    d.csv.missing_marker = s.string("missing_marker", "");
    d.knn_k = s.positive("knn_k", 5);
    d.normalize_train_only = s.boolean("normalize_train_only", false);
  }
  d.split_fraction = s.number("split_fraction", 0.8);
  if (!(d.split_fraction > 0 && d.split_fraction < 1)) {
    s.fail_key("split_fraction", "must lie strictly between 0 and 1");
  }
  d.split_seed = s.u64("split_seed", cfg.seed);
  s.finish();
}

void parse_model(Section s, RunConfig& cfg) {
  ModelConfig& m = cfg.model;
  m.source = s.choice("source", "train", {"train", "file", "generator", "inline"});
  if (m.source == "train") {
    const std::string arch = s.choice("architecture", "mlp", {"mlp", "linear", "logistic"});
    if (arch == "linear") {
      m.architecture = Architecture::linear();
    } else if (arch == "logistic") {
      m.architecture = Architecture::logistic();
    } else {
      m.architecture = Architecture::default_regression_net();
      m.architecture.hidden = s.int_list("hidden", m.architecture.hidden);
      for (const int w : m.architecture.hidden) {
        if (w < 1) s.fail_key("hidden", "widths must be positive");
      }
      m.architecture.hidden_activation =
          parse_activation(s, "hidden_activation", Activation::kTanh);
      m.architecture.output_activation =
          parse_activation(s, "output_activation", Activation::kIdentity);
      if (m.architecture.output_activation != Activation::kIdentity &&
          m.architecture.output_activation != Activation::kSigmoid) {
        s.fail_key("output_activation", "must be identity or sigmoid");
      }
    }
    m.train.epochs = s.positive("epochs", 200);
    m.train.batch_size = s.positive("batch_size", 64);
    m.train.learning_rate = s.number("learning_rate", 0.05);
    if (!(m.train.learning_rate > 0)) s.fail_key("learning_rate", "must be positive");
    m.train.momentum = s.number("momentum", 0.9);
    if (!(m.train.momentum >= 0 && m.train.momentum < 1)) {
      s.fail_key("momentum", "must lie in [0, 1)");
    }
    m.train.cosine_annealing = s.boolean("cosine_annealing", true);
    m.train.seed = s.u64("seed", cfg.seed);
  } else if (m.source == "file") {
    m.path = s.string("path", "");
    if (m.path.empty()) s.fail_key("path", "is required for file models");
  } else if (m.source == "inline") {
    m.spec = s.at("spec");
    try {
      (void)model_from_json(m.spec);
    } catch (const Error& e) {
      s.fail_key("spec", std::string("is not a valid model: ") + e.what());
    }
  }
  s.finish();
}

void parse_points(Section s, RunConfig& cfg) {
  PointsConfig& p = cfg.points;
  p.from = s.choice("from", "test", {"test", "train", "explicit"});
  if (p.from == "explicit") {
    p.values = s.matrix("values");
    p.count = static_cast<int>(p.values.rows());
  } else {
    p.count = s.positive("count", 20);
    const long long start = s.integer("start", 0);
    if (start < 0) s.fail_key("start", "must be nonnegative");
    p.start = static_cast<int>(start);
  }
  s.finish();
}

void parse_method_params(Section s, RunConfig& cfg) {
  MethodParams& p = cfg.method_params;
  p.sigma = s.number("sigma", 0.1);
  p.sigma_min = s.number("sigma_min", 1e-6);
  p.ig_a = s.number("ig_a", 0.0);
  p.gxi_a = s.number("gxi_a", 1.0 - 1e-6);
  p.n_samples = s.positive("n_samples", 1000);
  p.lime_kernel.width = s.number("lime_kernel_width", 0.0);
  p.lime_kernel.distance =
      s.choice("lime_kernel_distance", "l2sq", {"l2sq", "cosine"}) == "l2sq"
          ? KernelDistance::kL2Squared
          : KernelDistance::kCosine;
  p.shapley_clamp = s.number("shapley_clamp", 1e6);
  p.ridge = s.number("ridge", kDefaultRidge);
  p.use_shortcuts = s.boolean("use_shortcuts", true);
  p.param = s.choice("param", "of_noise", {"of_noise", "of_perturbed_input"}) == "of_noise"
                ? SurrogateParam::kOfNoise
                : SurrogateParam::kOfPerturbedInput;
  if (!(p.sigma > 0)) s.fail_key("sigma", "must be positive");
  if (!(p.sigma_min > 0)) s.fail_key("sigma_min", "must be positive");
  if (!(p.ig_a >= 0 && p.ig_a < 1)) s.fail_key("ig_a", "must lie in [0, 1)");
  if (!(p.gxi_a >= 0 && p.gxi_a < 1)) s.fail_key("gxi_a", "must lie in [0, 1)");
  if (p.n_samples < 10) s.fail_key("n_samples", "must be at least 10");
  if (!(p.shapley_clamp > 0)) s.fail_key("shapley_clamp", "must be positive");
  if (!(p.ridge >= 0)) s.fail_key("ridge", "must be nonnegative");
  s.finish();
}

void parse_explain(Section s, RunConfig& cfg) {
  cfg.solver = s.choice("solver", "closed_form", {"closed_form", "iterative"}) == "closed_form"
                   ? Solver::kClosedForm
                   : Solver::kIterative;
  IterativeConfig& it = cfg.iterative;
  it.epochs = s.positive("epochs", 500);
  it.batch_size = s.positive("batch_size", 64);
  it.learning_rate = s.number("learning_rate", 0.05);
  if (!(it.learning_rate > 0)) s.fail_key("learning_rate", "must be positive");
  it.cosine_annealing = s.boolean("cosine_annealing", true);
  it.patience = s.positive("patience", 50);
  it.min_delta = s.number("min_delta", 1e-4);
  if (!(it.min_delta >= 0)) s.fail_key("min_delta", "must be nonnegative");
  it.restore_best = s.boolean("restore_best", false);
  s.finish();
}

void parse_equivalence(Section s, RunConfig& cfg) {
  cfg.ig_steps = s.positive("ig_steps", 1000);
  cfg.cluster_a = s.methods("cluster_a", cfg.cluster_a);
  cfg.cluster_b = s.methods("cluster_b", cfg.cluster_b);
  s.finish();
}

void parse_recover(Section s, RunConfig& cfg) {
  if (s.has("family")) {
    cfg.recover_family =
        family_from_string(s.choice("family", "linear", {"linear", "logistic", "sinusoid"}));
  }
  cfg.recover_reparam = s.boolean("reparam", true);
  s.finish();
}

void parse_nfl(Section s, RunConfig& cfg) {
  NflSettings& n = cfg.nfl;
  n.x0 = s.has("x0") ? s.vector("x0") : Vector::Zero(1);
  const Eigen::Index d = n.x0.size();
  n.box_lo = s.vector_or_scalar("box_lo", d, -std::numbers::pi);
  n.box_hi = s.vector_or_scalar("box_hi", d, std::numbers::pi);
  n.z1_sigma = s.number("z1_sigma", 0.01);
  if (!(n.z1_sigma > 0)) s.fail_key("z1_sigma", "must be positive");
  n.z1_samples = s.positive("z1_samples", 1000);
  if (n.z1_samples < 2) s.fail_key("z1_samples", "must be at least 2");
  n.nfl.search.loss = pointwise_loss_from_string(
      s.choice("loss", "half_squared", {"absolute", "squared", "half_squared"}));
  n.nfl.search.grid_1d = s.positive("grid_1d", 2001);
  n.nfl.search.grid_2d = s.positive("grid_2d", 201);
  n.nfl.search.random_points = s.positive("random_points", 10000);
  n.nfl.search.max_iterations = s.positive("max_iterations", 2000);
  n.nfl.search.tolerance = s.number("lawson_tolerance", 1e-4);
  n.nfl.z2_samples = s.positive("z2_samples", 10000);
  n.nfl.tolerance = s.number("tolerance", 0.05);
  if (!(n.nfl.tolerance >= 0 && n.nfl.tolerance < 1)) {
    s.fail_key("tolerance", "must lie in [0, 1)");
  }
  s.finish();
}

void parse_perturb(Section s, RunConfig& cfg) {
  PerturbSettings& p = cfg.perturb;
  p.ks = s.int_list("ks", p.ks);
  if (p.ks.empty()) s.fail_key("ks", "must list at least one k");
  for (std::size_t i = 0; i < p.ks.size(); ++i) {
    if (p.ks[i] < 0 || (i > 0 && p.ks[i] <= p.ks[i - 1])) {
      s.fail_key("ks", "must be nonnegative and strictly increasing");
    }
  }
  const auto noises = s.string_list("noises", {"binary_zero", "gaussian"});
  p.noises.clear();
  for (const auto& n : noises) {
    if (n != "binary_zero" && n != "gaussian") s.fail_key("noises", "entries must be binary_zero or gaussian");
    p.noises.push_back(perturb_noise_from_string(n));
  }
  if (p.noises.empty()) s.fail_key("noises", "must list at least one noise");
  p.sigma = s.number("sigma", 0.1);
  if (!(p.sigma > 0)) s.fail_key("sigma", "must be positive");
  p.trials = s.positive("trials", 100);
  p.group_a = s.methods("group_a", p.group_a);
  p.group_b = s.methods("group_b", p.group_b);
  s.finish();
}

OrderedJson methods_json(const std::vector<Method>& ms) {
  OrderedJson out = OrderedJson::array();
  for (const Method m : ms) out.push_back(to_string(m));
  return out;
}

}  // namespace

RunConfig parse_config(const json& doc) {
  Section root(doc, "config");
  if (!root.has("schema_version")) throw ConfigError("config.schema_version is required");
  const long long version = root.integer("schema_version", 0);
  if (version != kSchemaVersion) {
    throw ConfigError("config.schema_version must be " + std::to_string(kSchemaVersion));
  }
  RunConfig cfg;
  cfg.seed = root.u64("seed", 0);
  cfg.output_dir = root.string("output_dir", "out");
  cfg.threads = root.positive("threads", 1);
  parse_dataset(root.child("dataset"), cfg);
  parse_model(root.child("model"), cfg);
  parse_points(root.child("points"), cfg);
  cfg.methods = root.methods("methods", cfg.methods);
  parse_method_params(root.child("method_params"), cfg);
  parse_explain(root.child("explain"), cfg);
  parse_equivalence(root.child("equivalence"), cfg);
  parse_recover(root.child("recover"), cfg);
  parse_nfl(root.child("nfl"), cfg);
  parse_perturb(root.child("perturb"), cfg);
  root.finish();
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(doc);
}

OrderedJson config_to_json(const RunConfig& cfg) {
  OrderedJson j;
  j["schema_version"] = kSchemaVersion;
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir.string();

  OrderedJson ds;
  ds["source"] = cfg.dataset.source;
  if (cfg.dataset.source == "synth") {
    ds["kind"] = to_string(cfg.dataset.synth.kind);
    ds["n"] = cfg.dataset.synth.n;
    ds["d"] = cfg.dataset.synth.d;
    ds["noise"] = cfg.dataset.synth.noise;
    ds["separation"] = cfg.dataset.synth.separation;
    ds["seed"] = cfg.dataset.synth.seed;
  } else {
    ds["path"] = cfg.dataset.path.string();
    ds["target_column"] = cfg.dataset.csv.target_column;
    ds["missing_marker"] = cfg.dataset.csv.missing_marker;
    ds["knn_k"] = cfg.dataset.knn_k;
    ds["normalize_train_only"] = cfg.dataset.normalize_train_only;
  }
  ds["split_fraction"] = cfg.dataset.split_fraction;
  ds["split_seed"] = cfg.dataset.split_seed;
  j["dataset"] = ds;

  OrderedJson md;
  md["source"] = cfg.model.source;
  if (cfg.model.source == "train") {
    OrderedJson hidden = OrderedJson::array();
    for (const int w : cfg.model.architecture.hidden) hidden.push_back(w);
    md["hidden"] = hidden;
    md["hidden_activation"] = to_string(cfg.model.architecture.hidden_activation);
    md["output_activation"] = to_string(cfg.model.architecture.output_activation);
    md["epochs"] = cfg.model.train.epochs;
    md["batch_size"] = cfg.model.train.batch_size;
    md["learning_rate"] = cfg.model.train.learning_rate;
    md["momentum"] = cfg.model.train.momentum;
    md["cosine_annealing"] = cfg.model.train.cosine_annealing;
    md["seed"] = cfg.model.train.seed;
  } else if (cfg.model.source == "file") {
    md["path"] = cfg.model.path.string();
  } else if (cfg.model.source == "inline") {
    md["spec"] = OrderedJson::parse(cfg.model.spec.dump());
  }
  j["model"] = md;

  OrderedJson pts;
  pts["from"] = cfg.points.from;
  if (cfg.points.from == "explicit") {
    pts["values"] = matrix_to_json_rows(cfg.points.values);
  } else {
    pts["count"] = cfg.points.count;
    pts["start"] = cfg.points.start;
  }
  j["points"] = pts;
  j["methods"] = methods_json(cfg.methods);

  const MethodParams& p = cfg.method_params;
  j["method_params"] = {
      {"sigma", p.sigma},
      {"sigma_min", p.sigma_min},
      {"ig_a", p.ig_a},
      {"gxi_a", p.gxi_a},
      {"n_samples", p.n_samples},
      {"lime_kernel_width", p.lime_kernel.width},
      {"lime_kernel_distance", p.lime_kernel.distance == KernelDistance::kL2Squared ? "l2sq" : "cosine"},
      {"shapley_clamp", p.shapley_clamp},
      {"ridge", p.ridge},
      {"use_shortcuts", p.use_shortcuts},
      {"param", to_string(p.param)},
  };
  j["explain"] = {
      {"solver", to_string(cfg.solver)},
      {"epochs", cfg.iterative.epochs},
      {"batch_size", cfg.iterative.batch_size},
      {"learning_rate", cfg.iterative.learning_rate},
      {"cosine_annealing", cfg.iterative.cosine_annealing},
      {"patience", cfg.iterative.patience},
      {"min_delta", cfg.iterative.min_delta},
      {"restore_best", cfg.iterative.restore_best},
  };
  j["equivalence"] = {{"ig_steps", cfg.ig_steps},
                      {"cluster_a", methods_json(cfg.cluster_a)},
                      {"cluster_b", methods_json(cfg.cluster_b)}};
  OrderedJson rec;
  if (cfg.recover_family) rec["family"] = to_string(*cfg.recover_family);
  rec["reparam"] = cfg.recover_reparam;
  j["recover"] = rec;
  const auto& n = cfg.nfl;
  j["nfl"] = {
      {"x0", numbers_to_json(n.x0)},
      {"box_lo", numbers_to_json(n.box_lo)},
      {"box_hi", numbers_to_json(n.box_hi)},
      {"z1_sigma", n.z1_sigma},
      {"z1_samples", n.z1_samples},
      {"loss", to_string(n.nfl.search.loss)},
      {"grid_1d", n.nfl.search.grid_1d},
      {"grid_2d", n.nfl.search.grid_2d},
      {"random_points", n.nfl.search.random_points},
      {"max_iterations", n.nfl.search.max_iterations},
      {"lawson_tolerance", n.nfl.search.tolerance},
      {"z2_samples", n.nfl.z2_samples},
      {"tolerance", n.nfl.tolerance},
  };
  OrderedJson noises = OrderedJson::array();
  for (const auto nz : cfg.perturb.noises) noises.push_back(to_string(nz));
  j["perturb"] = {
      {"ks", cfg.perturb.ks},
      {"noises", noises},
      {"sigma", cfg.perturb.sigma},
      {"trials", cfg.perturb.trials},
      {"group_a", methods_json(cfg.perturb.group_a)},
      {"group_b", methods_json(cfg.perturb.group_b)},
  };
  return j;
}

// ---------------------------------------------------------------------------
// Pipeline pieces

namespace {

struct Context {
  std::optional<Dataset> train;
  std::optional<Dataset> test;
  ModelPtr model;
  std::optional<TrainHistory> history;
};

std::pair<Dataset, Dataset> build_dataset(const DatasetConfig& d) {
  if (d.source == "synth") {
    const Dataset all = synth_generate(d.synth);
    return split(all, d.split_fraction, d.split_seed);
  }
  const RawTable raw = load_csv(d.path, d.csv);
  const RawTable complete = knn_impute(raw, d.knn_k);
  const auto [train_idx, test_idx] = split_indices(complete.rows(), d.split_fraction, d.split_seed);
  const Dataset all = normalize(complete, d.normalize_train_only ? &train_idx : nullptr);
  return {select_rows(all, train_idx), select_rows(all, test_idx)};
}

bool needs_dataset(const RunConfig& cfg) {
  return cfg.model.source == "train" || cfg.model.source == "generator" ||
         cfg.points.from != "explicit";
}

Context build_context(const RunConfig& cfg, bool want_model = true) {
  Context ctx;
  if (needs_dataset(cfg)) {
    auto [tr, te] = build_dataset(cfg.dataset);
    ctx.train = std::move(tr);
    ctx.test = std::move(te);
  }
  if (!want_model) return ctx;
  const auto& m = cfg.model;
  if (m.source == "train") {
    TrainHistory h;
    MlpModel net =
        train_sgd(ctx.train->features, ctx.train->targets, m.architecture, m.train, &h);
    ctx.history = std::move(h);
    if (m.architecture.hidden.empty()) {
      ctx.model = ModelPtr(simplify(net));
    } else {
      ctx.model = std::make_shared<MlpModel>(std::move(net));
    }
  } else if (m.source == "file") {
    ctx.model = ModelPtr(load_model(m.path.string()));
  } else if (m.source == "inline") {
    ctx.model = ModelPtr(model_from_json(m.spec));
  } else {
    const Dataset& ds = *ctx.train;
    if (ds.generator == to_string(SynthKind::kLinearRegression)) {
      ctx.model = std::make_shared<LinearModel>(ds.true_weights, ds.true_intercept);
    } else if (ds.generator == to_string(SynthKind::kLogisticBlobs)) {
      ctx.model = std::make_shared<LogisticModel>(ds.true_weights, ds.true_intercept);
    } else {
      throw InvalidArgument("model.source generator needs a linear-regression or logistic-blobs "
                            "synthetic dataset");
    }
  }
  return ctx;
}

Matrix select_points(const RunConfig& cfg, const Context& ctx) {
  if (cfg.points.from == "explicit") return cfg.points.values;
  const Dataset& ds = cfg.points.from == "test" ? *ctx.test : *ctx.train;
  const Eigen::Index start = cfg.points.start;
  const Eigen::Index count = cfg.points.count;
  if (start + count > ds.rows()) {
    throw InvalidArgument("points: requested rows [" + std::to_string(start) + ", " +
                          std::to_string(start + count) + ") but the " + cfg.points.from +
                          " split has " + std::to_string(ds.rows()) + " rows");
  }
  return ds.features.middleRows(start, count);
}

std::string timestamp_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

OrderedJson envelope(const std::string& command, const RunConfig& cfg, const RunOptions& opts) {
  OrderedJson j;
  j["artifact"] = {{"name", "lfa"}, {"version", artifact_version()}};
  j["command"] = command;
  j["seed"] = cfg.seed;
  if (opts.timestamp) j["generated_at"] = timestamp_utc();
  j["config"] = config_to_json(cfg);
  return j;
}

fs::path write_output(const RunConfig& cfg, const std::string& name, const std::string& text) {
  fs::create_directories(cfg.output_dir);
  const fs::path p = cfg.output_dir / name;
  write_text_file(p, text);
  return p;
}

fs::path write_json(const RunConfig& cfg, const std::string& name, const OrderedJson& doc) {
  return write_output(cfg, name, doc.dump(2) + "\n");
}

OrderedJson model_summary(const Model& m) {
  return {{"kind", m.kind()},
          {"input_dim", m.input_dim()},
          {"output", m.output_kind() == OutputKind::kProbability ? "probability" : "regression"}};
}

void check_model_dim(const Model& m, const Matrix& points) {
  if (points.cols() != m.input_dim()) {
    throw DimensionMismatch("points have dimension " + std::to_string(points.cols()) +
                            " but the model expects " + std::to_string(m.input_dim()));
  }
}

std::vector<std::vector<Explanation>> explain_all(const RunConfig& cfg, const Model& f,
                                                  const Matrix& points,
                                                  const std::vector<Method>& methods,
                                                  const RandomStream& root) {
  std::vector<std::vector<Explanation>> out(methods.size(),
                                            std::vector<Explanation>(static_cast<std::size_t>(points.rows())));
  parallel_for(points.rows(), cfg.threads, [&](Eigen::Index p) {
    const Vector x = points.row(p).transpose();
    for (std::size_t m = 0; m < methods.size(); ++m) {
      RandomStream s = root.fork(to_string(methods[m]), static_cast<std::uint64_t>(p));
      out[m][static_cast<std::size_t>(p)] =
          explain_method(methods[m], f, x, s, cfg.method_params, cfg.solver, cfg.iterative);
    }
  });
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Subcommands

std::vector<fs::path> cmd_train(const RunConfig& cfg, const RunOptions& opts) {
  if (cfg.model.source != "train") {
    throw InvalidArgument("the train command needs model.source = train");
  }
  const Context ctx = build_context(cfg);
  const Model& f = *ctx.model;

  OrderedJson metrics = envelope("train", cfg, opts);
  metrics["model"] = model_summary(f);
  metrics["n_train"] = ctx.train->rows();
  metrics["n_test"] = ctx.test->rows();
  metrics["train_mse"] = mean_squared_error(f, ctx.train->features, ctx.train->targets);
  metrics["test_mse"] = mean_squared_error(f, ctx.test->features, ctx.test->targets);
  if (f.output_kind() == OutputKind::kProbability) {
    metrics["train_accuracy"] = accuracy(f, ctx.train->features, ctx.train->targets);
    metrics["test_accuracy"] = accuracy(f, ctx.test->features, ctx.test->targets);
  }
  const auto& losses = ctx.history->epoch_loss;
  metrics["first_epoch_loss"] = losses.front();
  metrics["last_epoch_loss"] = losses.back();
  metrics["epoch_loss"] = losses;
  if (ctx.train->true_weights.size() > 0) {
    metrics["generator"] = {{"kind", ctx.train->generator},
                            {"weights", numbers_to_json(ctx.train->true_weights)},
                            {"intercept", ctx.train->true_intercept}};
  }

  std::vector<fs::path> written;
  fs::create_directories(cfg.output_dir);
  const fs::path model_path = cfg.output_dir / "model.json";
  save_model(f, model_path.string());
  written.push_back(model_path);
  written.push_back(write_json(cfg, "metrics.json", metrics));
  return written;
}

std::vector<fs::path> cmd_explain(const RunConfig& cfg, const RunOptions& opts) {
  const Context ctx = build_context(cfg);
  const Matrix points = select_points(cfg, ctx);
  check_model_dim(*ctx.model, points);
  const RandomStream root = RandomStream(cfg.seed).fork("explain");
  const auto results = explain_all(cfg, *ctx.model, points, cfg.methods, root);

  OrderedJson doc = envelope("explain", cfg, opts);
  doc["model"] = model_summary(*ctx.model);
  OrderedJson instances = OrderedJson::array();
  for (const Method m : cfg.methods) instances.push_back(instance_to_json(registry(m, cfg.method_params)));
  doc["instances"] = instances;
  OrderedJson list = OrderedJson::array();
  for (Eigen::Index p = 0; p < points.rows(); ++p) {
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      OrderedJson e = explanation_to_json(results[m][static_cast<std::size_t>(p)]);
      e["point"] = p;
      list.push_back(std::move(e));
    }
  }
  doc["explanations"] = list;
  return {write_json(cfg, "explanations.json", doc)};
}

std::vector<fs::path> cmd_equivalence(const RunConfig& cfg, const RunOptions& opts) {
  const Context ctx = build_context(cfg);
  const Matrix points = select_points(cfg, ctx);
  check_model_dim(*ctx.model, points);
  EquivalenceConfig ec;
  ec.params = cfg.method_params;
  ec.ig_steps = cfg.ig_steps;
  ec.threads = cfg.threads;
  const RandomStream root = RandomStream(cfg.seed).fork("equivalence");
  const EquivalenceResult r = equivalence_matrix(*ctx.model, points, cfg.methods, root, ec);

  OrderedJson doc = envelope("equivalence", cfg, opts);
  doc["model"] = model_summary(*ctx.model);
  doc["equivalence"] = equivalence_to_json(r);
  bool clusters_present = true;
  for (const auto* group : {&cfg.cluster_a, &cfg.cluster_b}) {
    for (const Method m : *group) {
      if (std::find(cfg.methods.begin(), cfg.methods.end(), m) == cfg.methods.end()) {
        clusters_present = false;
      }
    }
  }
  if (clusters_present) {
    const ClusterSeparation l1 = cluster_separation(r, r.l1, cfg.cluster_a, cfg.cluster_b);
    const ClusterSeparation cs = cluster_separation(r, r.cosine, cfg.cluster_a, cfg.cluster_b);
    doc["clusters"] = {
        {"a", methods_json(cfg.cluster_a)},
        {"b", methods_json(cfg.cluster_b)},
        {"l1_within", l1.within},
        {"l1_cross", l1.cross},
        {"cosine_within", cs.within},
        {"cosine_cross", cs.cross},
        {"separated", l1.within < l1.cross},
    };
  }
  return {write_output(cfg, "equivalence_l1.csv", matrix_to_csv(r, r.l1)),
          write_output(cfg, "equivalence_cosine.csv", matrix_to_csv(r, r.cosine)),
          write_output(cfg, "equivalence_cells.csv", equivalence_to_csv(r)),
          write_json(cfg, "equivalence.json", doc)};
}

std::vector<fs::path> cmd_recover(const RunConfig& cfg, const RunOptions& opts) {
  const Context ctx = build_context(cfg);
  const Matrix points = select_points(cfg, ctx);
  const Model& f = *ctx.model;
  check_model_dim(f, points);

  ModelFamily family = ModelFamily::kLinear;
  if (cfg.recover_family) {
    family = *cfg.recover_family;
  } else if (f.kind() == "linear" || f.kind() == "logistic" || f.kind() == "sinusoid") {
    family = family_from_string(f.kind());
  } else {
    throw InvalidArgument("recovery needs a linear, logistic or sinusoid model; got '" +
                          f.kind() + "'");
  }
  (void)family_weights(f, family);

  const RandomStream root = RandomStream(cfg.seed).fork("recover");
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::vector<RecoveryReport>> reports(cfg.methods.size(),
                                                   std::vector<RecoveryReport>(n));
  parallel_for(points.rows(), cfg.threads, [&](Eigen::Index p) {
    const Vector x = points.row(p).transpose();
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      RandomStream s = root.fork(to_string(cfg.methods[m]), static_cast<std::uint64_t>(p));
      reports[m][static_cast<std::size_t>(p)] =
          check_recovery(cfg.methods[m], family, f, x, s, cfg.method_params);
    }
  });

  OrderedJson doc = envelope("recover", cfg, opts);
  doc["model"] = model_summary(f);
  doc["family"] = to_string(family);
  OrderedJson summary = OrderedJson::array();
  OrderedJson list = OrderedJson::array();
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    int recovered = 0;
    double worst = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const RecoveryReport& r = reports[m][p];
      if (r.recovered) ++recovered;
      worst = std::max(worst, r.target == RecoveryTarget::kZero ? r.linf : r.relative_l1);
      OrderedJson e = recovery_to_json(r);
      e["point"] = p;
      list.push_back(std::move(e));
    }
    summary.push_back({{"method", to_string(cfg.methods[m])},
                       {"target", to_string(reports[m].front().target)},
                       {"recovered", recovered},
                       {"points", n},
                       {"worst_error", worst}});
  }
  doc["summary"] = summary;
  doc["reports"] = list;

  if (cfg.recover_reparam && family == ModelFamily::kLinear) {
    const RandomStream reparam_root = RandomStream(cfg.seed).fork("reparam");
    OrderedJson rp = OrderedJson::array();
    for (const Method m : {Method::kIntegratedGradients, Method::kGradXInput, Method::kLime,
                           Method::kKernelShap}) {
      for (Eigen::Index p = 0; p < points.rows(); ++p) {
        RandomStream s = reparam_root.fork(to_string(m), static_cast<std::uint64_t>(p));
        try {
          OrderedJson e = recovery_to_json(
              reparam_recovery_check(m, f, points.row(p).transpose(), s, cfg.method_params));
          e["point"] = p;
          rp.push_back(std::move(e));
        } catch (const DegenerateVector& err) {
          rp.push_back({{"method", to_string(m)}, {"point", p}, {"error", err.code()},
                        {"message", err.what()}});
        }
      }
    }
    doc["reparameterized"] = rp;
  }
  return {write_json(cfg, "recovery.json", doc)};
}

std::vector<fs::path> cmd_nfl(const RunConfig& cfg, const RunOptions& opts) {
  if (cfg.model.source == "train" || cfg.model.source == "generator") {
    // Model built from the dataset pipeline.
  }
  const Context ctx = build_context(cfg);
  const Model& f = *ctx.model;
  const auto& n = cfg.nfl;
  if (n.x0.size() != f.input_dim()) {
    throw DimensionMismatch("nfl.x0 has dimension " + std::to_string(n.x0.size()) +
                            " but the model expects " + std::to_string(f.input_dim()));
  }
  const DomainBox box{n.box_lo, n.box_hi};
  const NeighborhoodSpec z1{GaussianAdditive{n.z1_sigma}, CombineOp::kAdd, UniformKernel{},
                            n.z1_samples};
  RandomStream rng = RandomStream(cfg.seed).fork("nfl");
  const NflReport r = nfl_construct(f, n.x0, z1, box, rng, n.nfl);

  OrderedJson doc = envelope("nfl", cfg, opts);
  doc["model"] = model_summary(f);
  doc["box"] = {{"lo", numbers_to_json(box.lo)}, {"hi", numbers_to_json(box.hi)}};
  doc["nfl"] = nfl_to_json(r, n.nfl.search.loss);
  return {write_json(cfg, "nfl.json", doc)};
}

std::vector<fs::path> cmd_perturb_test(const RunConfig& cfg, const RunOptions& opts) {
  const Context ctx = build_context(cfg);
  const Matrix points = select_points(cfg, ctx);
  const Model& f = *ctx.model;
  check_model_dim(f, points);
  for (const int k : cfg.perturb.ks) {
    if (k >= f.input_dim()) {
      throw InvalidArgument("perturb.ks must stay below the input dimension " +
                            std::to_string(f.input_dim()));
    }
  }

  const RandomStream root(cfg.seed);
  const auto results = explain_all(cfg, f, points, cfg.methods, root.fork("perturb-explain"));
  const RandomStream noise_root = root.fork("perturb-noise");

  std::vector<PerturbCurve> curves;
  OrderedJson doc = envelope("perturb-test", cfg, opts);
  doc["model"] = model_summary(f);
  OrderedJson by_noise = OrderedJson::array();
  for (const PerturbNoise noise : cfg.perturb.noises) {
    PerturbConfig pc;
    pc.ks = cfg.perturb.ks;
    pc.noise = noise;
    pc.sigma = cfg.perturb.sigma;
    pc.trials = cfg.perturb.trials;
    std::vector<PerturbCurve> these;
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      std::vector<Vector> attr;
      for (const auto& e : results[m]) attr.push_back(e.weights);
      these.push_back(perturbation_test(f, points, attr, to_string(cfg.methods[m]), pc, noise_root));
    }
    OrderedJson block;
    block["noise"] = to_string(noise);
    OrderedJson cj = OrderedJson::array();
    for (const auto& c : these) cj.push_back(curve_to_json(c));
    block["curves"] = cj;

    auto pick = [&](const std::vector<Method>& group) {
      std::vector<PerturbCurve> out;
      for (const Method g : group) {
        for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
          if (cfg.methods[m] == g) out.push_back(these[m]);
        }
      }
      return out;
    };
    const auto a = pick(cfg.perturb.group_a);
    const auto b = pick(cfg.perturb.group_b);
    if (!a.empty() && !b.empty()) {
      block["group_a_at_or_below_group_b"] = sign_test_to_json(sign_test(a, b));
      block["group_b_at_or_below_group_a"] = sign_test_to_json(sign_test(b, a));
    }
    by_noise.push_back(block);
    curves.insert(curves.end(), these.begin(), these.end());
  }
  doc["group_a"] = methods_json(cfg.perturb.group_a);
  doc["group_b"] = methods_json(cfg.perturb.group_b);
  doc["results"] = by_noise;
  return {write_output(cfg, "perturb_curves.csv", curves_to_csv(curves)),
          write_output(cfg, "perturb_points.csv", curve_points_to_csv(curves)),
          write_json(cfg, "perturb.json", doc)};
}

// ---------------------------------------------------------------------------
// Entry point

std::string error_line(const std::string& code, const std::string& message) {
  std::string escaped;
  for (const char c : message) {
    if (c == '"' || c == '\\') {
      escaped.push_back('\\');
      escaped.push_back(c);
    } else if (c == '\n' || c == '\r') {
      escaped.push_back(' ');
    } else {
      escaped.push_back(c);
    }
  }
  return "error: code=" + code + " message=\"" + escaped + "\"";
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Local function approximation explanations and analysis harnesses", "lfa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", artifact_version());

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  bool no_timestamp = false;

  using Command = std::vector<fs::path> (*)(const RunConfig&, const RunOptions&);
  const std::vector<std::tuple<std::string, std::string, Command>> commands = {
      {"train", "Train a model on the configured dataset", &cmd_train},
      {"explain", "Explain the selected points with the configured methods", &cmd_explain},
      {"equivalence", "Reference-vs-LFA distance matrices", &cmd_equivalence},
      {"recover", "Model recovery checks on a linear, logistic or sinusoid model", &cmd_recover},
      {"nfl", "No-free-lunch construction", &cmd_nfl},
      {"perturb-test", "Bottom-k perturbation tests", &cmd_perturb_test},
  };
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required();
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--out", out_dir, "Override the output directory");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--no-timestamp", no_timestamp, "Omit timestamps from reports");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << artifact_version() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << error_line("usage", e.what()) << "\n";
    return kExitConfig;
  }

  Command fn = nullptr;
  for (const auto& [name, help, f] : commands) {
    if (app.got_subcommand(name)) fn = f;
  }

  RunConfig cfg;
  try {
    cfg = load_config(config_path);
    if (seed) {
      // Seeds derived from the run seed follow the override.
      const std::uint64_t old = cfg.seed;
      cfg.seed = *seed;
      if (cfg.dataset.synth.seed == old) cfg.dataset.synth.seed = *seed;
      if (cfg.dataset.split_seed == old) cfg.dataset.split_seed = *seed;
      if (cfg.model.train.seed == old) cfg.model.train.seed = *seed;
    }
    if (out_dir) cfg.output_dir = *out_dir;
    if (threads) cfg.threads = *threads;
  } catch (const Error& e) {
    err << error_line(e.code(), e.what()) << "\n";
    return kExitConfig;
  }

  try {
    RunOptions opts;
    opts.timestamp = !no_timestamp;
    for (const auto& p : fn(cfg, opts)) out << p.string() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    err << error_line(e.code(), e.what()) << "\n";
  } catch (const fs::filesystem_error& e) {
    err << error_line("io_error", e.what()) << "\n";
  } catch (const std::exception& e) {
    err << error_line("internal", e.what()) << "\n";
  }
  return kExitRuntime;
}

}  // namespace lfa::cli
