// Copyright 2026 The fermiborn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/// \file persist.hpp
/// \brief JSON model checkpoints, optimizer state, and run configuration.
///
/// Doubles are written in the shortest form that parses back to the same
/// value, so save/load round-trips exactly.

#pragma once

#include <cstdint>
#include <filesystem>
#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fermiborn/dataset.hpp"
#include "fermiborn/error.hpp"
#include "fermiborn/loss.hpp"
#include "fermiborn/model.hpp"
#include "fermiborn/trainer.hpp"

namespace fermiborn {

using Json = nlohmann::json;

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline void require_keys(const Json& j, const std::string& where, std::initializer_list<const char*> required,
                         std::initializer_list<const char*> optional = {}) {
  if (!j.is_object()) throw InvalidInput(where + ": expected an object");
  std::set<std::string> known;
  for (const char* k : required) {
    known.insert(k);
    if (!j.contains(k)) throw InvalidInput(where + ": missing key '" + k + "'");
  }
  for (const char* k : optional) known.insert(k);
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw InvalidInput(where + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
T get_as(const Json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(where + "." + key + ": " + e.what());
  }
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json(const std::string& text, const std::string& where) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto end = std::min(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
    throw ParseError(where + ": " + e.what(), static_cast<int>(line));
  }
}

}  // namespace detail

inline Json model_to_json(const FbmModel& model) {
  Json theta = Json::array();
  for (Index l = 0; l < model.layers(); ++l) {
    const auto layer = model.ansatz.layer(l);
    theta.push_back(std::vector<double>(layer.begin(), layer.end()));
  }
  return Json{{"version", kModelFormatVersion},
              {"N", model.registers()},
              {"k", model.k},
              {"m", model.m},
              {"layers", model.layers()},
              {"alpha", model.magic.values()},
              {"theta", theta},
              {"seed", model.seed},
              {"epoch", model.epoch}};
}

inline FbmModel model_from_json(const Json& j) {
  const std::string where = "model";
  detail::require_keys(j, where, {"version", "N", "k", "m", "layers", "alpha", "theta", "seed", "epoch"});
  if (detail::get_as<int>(j, "version", where) != kModelFormatVersion) throw InvalidInput("model: unsupported version");
  const auto n = detail::get_as<Index>(j, "N", where);
  const auto layers = detail::get_as<Index>(j, "layers", where);
  if (n < 1 || layers < 1) throw InvalidInput("model: N and layers must be positive");
  FbmModel m;
  m.k = detail::get_as<int>(j, "k", where);
  m.m = detail::get_as<int>(j, "m", where);
  m.seed = detail::get_as<std::uint64_t>(j, "seed", where);
  m.epoch = detail::get_as<std::int64_t>(j, "epoch", where);
  const auto alpha = detail::get_as<std::vector<double>>(j, "alpha", where);
  if (static_cast<Index>(alpha.size()) != n) throw InvalidInput("model: alpha must have N entries");
  m.magic = MagicAngles(alpha);
  const auto theta = detail::get_as<std::vector<std::vector<double>>>(j, "theta", where);
  if (static_cast<Index>(theta.size()) != layers) throw InvalidInput("model: theta must have one row per layer");
  std::vector<double> flat;
  for (const auto& row : theta) flat.insert(flat.end(), row.begin(), row.end());
  m.ansatz = FloAnsatz(4 * n, layers, std::move(flat));
  m.validate();
  return m;
}

inline void save_model(const FbmModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, model_to_json(model).dump(2) + "\n");
}

inline FbmModel load_model(const std::filesystem::path& path) {
  return model_from_json(detail::parse_json(detail::read_text(path), path.string()));
}

inline Json optimizer_to_json(const OptimizerState& s) {
  return Json{{"version", 1}, {"step", s.step_count}, {"first_moment", s.first_moment}, {"second_moment", s.second_moment}};
}

inline OptimizerState optimizer_from_json(const Json& j) {
  const std::string where = "optimizer";
  detail::require_keys(j, where, {"version", "step", "first_moment", "second_moment"});
  OptimizerState s;
  s.step_count = detail::get_as<std::int64_t>(j, "step", where);
  s.first_moment = detail::get_as<std::vector<double>>(j, "first_moment", where);
  s.second_moment = detail::get_as<std::vector<double>>(j, "second_moment", where);
  if (s.first_moment.size() != s.second_moment.size()) throw InvalidInput("optimizer: moment sizes differ");
  return s;
}

/// One entry of training.kernels; sigma "median" expands to two bandwidths.
struct KernelConfig {
  KernelKind kind = KernelKind::Gaussian;
  std::optional<double> sigma;
  bool median = false;
  int ell_max = 2;
  int n_ops = 100;
  bool enumerate = false;
};

struct RunConfig {
  // model
  std::optional<Index> registers;
  int k = 3;
  int m = 1;
  Index layers = 1;
  std::uint64_t model_seed = 0;
  // training
  int epochs = 100;
  double learning_rate = 0.01;
  std::vector<KernelConfig> kernels;
  bool resample = true;
  int engine_ell_max = 5;
  std::uint64_t training_seed = 0;
  std::size_t median_subsample = 1000000;
  // data
  std::filesystem::path train_path;
  std::filesystem::path test_path;
  double split = 0.0;
  // output
  std::filesystem::path directory = "run";
  int checkpoint_every = 0;
};

inline RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base = {}) {
  detail::require_keys(j, "config", {"model", "training", "data"}, {"output"});
  RunConfig c;
  const Json& jm = j.at("model");
  detail::require_keys(jm, "model", {}, {"N", "k", "m", "layers", "seed"});
  if (jm.contains("N")) c.registers = detail::get_as<Index>(jm, "N", "model");
  if (jm.contains("k")) c.k = detail::get_as<int>(jm, "k", "model");
  if (jm.contains("m")) c.m = detail::get_as<int>(jm, "m", "model");
  if (jm.contains("layers")) c.layers = detail::get_as<Index>(jm, "layers", "model");
  if (jm.contains("seed")) c.model_seed = detail::get_as<std::uint64_t>(jm, "seed", "model");
  if (c.k + c.m != 4 || c.k < 1) throw InvalidInput("model: k + m must equal 4 with k >= 1");
  if (c.layers < 1) throw InvalidInput("model: layers must be positive");
  if (c.registers && *c.registers < 1) throw InvalidInput("model: N must be positive");

  const Json& jt = j.at("training");
  detail::require_keys(jt, "training", {"epochs", "learning_rate", "kernels"},
                       {"resample", "ell_max", "seed", "median_subsample"});
  c.epochs = detail::get_as<int>(jt, "epochs", "training");
  c.learning_rate = detail::get_as<double>(jt, "learning_rate", "training");
  if (jt.contains("resample")) c.resample = detail::get_as<bool>(jt, "resample", "training");
  if (jt.contains("ell_max")) c.engine_ell_max = detail::get_as<int>(jt, "ell_max", "training");
  if (jt.contains("seed")) c.training_seed = detail::get_as<std::uint64_t>(jt, "seed", "training");
  if (jt.contains("median_subsample")) c.median_subsample = detail::get_as<std::size_t>(jt, "median_subsample", "training");
  if (c.epochs < 1) throw InvalidInput("training: epochs must be at least 1");
  if (!(c.learning_rate > 0.0)) throw InvalidInput("training: learning_rate must be positive");
  if (!jt.at("kernels").is_array() || jt.at("kernels").empty()) throw InvalidInput("training.kernels: expected a nonempty array");
  for (const Json& jk : jt.at("kernels")) {
    detail::require_keys(jk, "kernel", {"kind"}, {"sigma", "ell_max", "n_ops", "enumerate"});
    KernelConfig kc;
    const auto kind = detail::get_as<std::string>(jk, "kind", "kernel");
    if (kind == "gaussian") {
      kc.kind = KernelKind::Gaussian;
    } else if (kind == "linear") {
      kc.kind = KernelKind::Linear;
    } else {
      throw InvalidInput("kernel.kind: expected 'gaussian' or 'linear', got '" + kind + "'");
    }
    if (jk.contains("sigma")) {
      const Json& s = jk.at("sigma");
      if (s.is_string() && s.get<std::string>() == "median") {
        kc.median = true;
      } else if (s.is_number()) {
        kc.sigma = s.get<double>();
        if (!(*kc.sigma > 0.0)) throw InvalidInput("kernel.sigma must be positive");
      } else {
        throw InvalidInput("kernel.sigma: expected a number or \"median\"");
      }
    } else if (kc.kind == KernelKind::Gaussian) {
      throw InvalidInput("kernel: gaussian kernels need a sigma");
    }
    if (jk.contains("ell_max")) kc.ell_max = detail::get_as<int>(jk, "ell_max", "kernel");
    if (jk.contains("n_ops")) kc.n_ops = detail::get_as<int>(jk, "n_ops", "kernel");
    if (jk.contains("enumerate")) kc.enumerate = detail::get_as<bool>(jk, "enumerate", "kernel");
    if (kc.ell_max < 1 || kc.n_ops < 1) throw InvalidInput("kernel: ell_max and n_ops must be positive");
    c.kernels.push_back(kc);
  }

  const Json& jd = j.at("data");
  detail::require_keys(jd, "data", {"train"}, {"test", "split"});
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  c.train_path = resolve(detail::get_as<std::string>(jd, "train", "data"));
  if (jd.contains("test")) c.test_path = resolve(detail::get_as<std::string>(jd, "test", "data"));
  if (jd.contains("split")) c.split = detail::get_as<double>(jd, "split", "data");
  if (c.split < 0.0 || c.split >= 1.0) throw InvalidInput("data.split must lie in [0, 1)");

  if (j.contains("output")) {
    const Json& jo = j.at("output");
    detail::require_keys(jo, "output", {}, {"directory", "checkpoint_every"});
    if (jo.contains("directory")) c.directory = resolve(detail::get_as<std::string>(jo, "directory", "output"));
    if (jo.contains("checkpoint_every")) c.checkpoint_every = detail::get_as<int>(jo, "checkpoint_every", "output");
    if (c.checkpoint_every < 0) throw InvalidInput("output.checkpoint_every must be nonnegative");
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(detail::parse_json(detail::read_text(path), path.string()), path.parent_path());
}

/// Kernel specs with "median" bandwidths resolved on `data`; also returns the
/// resolved pair when one was needed.
inline std::pair<std::vector<KernelSpec>, std::optional<std::pair<double, double>>> resolve_kernels(
    const RunConfig& config, const BitDataset& data) {
  std::vector<KernelSpec> specs;
  std::optional<std::pair<double, double>> med;
  for (const KernelConfig& kc : config.kernels) {
    KernelSpec ks;
    ks.kind = kc.kind;
    ks.ell_max = kc.kind == KernelKind::Linear ? 1 : kc.ell_max;
    ks.n_ops = kc.n_ops;
    ks.enumerate = kc.enumerate;
    if (kc.median) {
      if (!med) {
        Rng rng = derived_rng(config.training_seed, 0x6d656469616eULL);
        med = median_heuristic(data, config.median_subsample, rng);
      }
      ks.sigma = med->first;
      specs.push_back(ks);
      ks.sigma = med->second;
      specs.push_back(ks);
    } else {
      ks.sigma = kc.sigma.value_or(1.0);
      specs.push_back(ks);
    }
  }
  return {specs, med};
}

}  // namespace fermiborn
