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

// fermiborn: generate | train | eval | export | oracle-check
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fermiborn/fermiborn.hpp"

namespace fs = std::filesystem;
using namespace fermiborn;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::pair<int, int> parse_size(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw InvalidInput("size must look like ROWSxCOLS, got '" + s + "'");
  try {
    std::size_t used = 0;
    const int r = std::stoi(s.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("rows");
    const std::string cs = s.substr(x + 1);
    const int c = std::stoi(cs, &used);
    if (used != cs.size()) throw std::invalid_argument("cols");
    if (r < 1 || c < 1) throw std::invalid_argument("nonpositive");
    return {r, c};
  } catch (const std::exception&) {
    throw InvalidInput("size must look like ROWSxCOLS, got '" + s + "'");
  }
}

std::string matrix_csv(const RealMatrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + format_double(m(i, j));
    out += "\n";
  }
  return out;
}

std::string history_csv(const std::vector<std::string>& prior, const TrainHistory& h) {
  std::string out = "epoch,loss,grad_norm,seconds\n";
  for (const auto& line : prior) out += line + "\n";
  for (std::size_t i = 0; i < h.size(); ++i) {
    out += std::to_string(h.first_epoch + static_cast<std::int64_t>(i)) + "," + format_double(h.loss[i]) + "," +
           format_double(h.grad_norm[i]) + "," + format_double(h.seconds[i]) + "\n";
  }
  return out;
}

/// History rows of an earlier run with epoch < limit.
std::vector<std::string> prior_history(const fs::path& path, std::int64_t limit) {
  std::vector<std::string> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    if (std::stoll(line.substr(0, comma)) < limit) rows.push_back(line);
  }
  return rows;
}

struct GenerateArgs {
  std::string config;
  std::string kind;
  std::string size;
  long count = 1000;
  int steps = 200;
  std::uint64_t seed = 0;
  std::string out;
  std::string joint_out;
  unsigned workers = 0;
};

int cmd_generate(GenerateArgs a, const CLI::App& sub) {
  if (!a.config.empty()) {
    const Json j = detail::parse_json(detail::read_text(a.config), a.config);
    detail::require_keys(j, "generate config", {}, {"kind", "size", "count", "steps", "seed"});
    if (j.contains("kind") && sub.count("--kind") == 0) a.kind = detail::get_as<std::string>(j, "kind", "generate");
    if (j.contains("size") && sub.count("--size") == 0) a.size = detail::get_as<std::string>(j, "size", "generate");
    if (j.contains("count") && sub.count("--count") == 0) a.count = detail::get_as<long>(j, "count", "generate");
    if (j.contains("steps") && sub.count("--steps") == 0) a.steps = detail::get_as<int>(j, "steps", "generate");
    if (j.contains("seed") && sub.count("--seed") == 0) a.seed = detail::get_as<std::uint64_t>(j, "seed", "generate");
  }
  if (a.kind.empty() || a.size.empty()) throw InvalidInput("generate needs --kind and --size");
  if (a.count < 1) throw InvalidInput("--count must be positive");
  const auto [rows, cols] = parse_size(a.size);
  BitDataset data;
  if (a.kind == "grid-mn") {
    const GridMN mn = grid_mn_generate(rows, cols, a.seed);
    data = mn_sample(mn, a.count, derived_rng(a.seed, 1)());
    if (!a.joint_out.empty()) {
      std::string text;
      for (double p : mn.joint) text += format_double(p) + "\n";
      write_file_atomic(a.joint_out, text);
    }
  } else if (a.kind == "game-of-life") {
    data = game_of_life_dataset(rows, cols, a.steps, a.count, a.seed, a.workers);
  } else {
    throw InvalidInput("--kind must be grid-mn or game-of-life");
  }
  save_dataset(data, a.out);
  std::cout << "wrote " << data.rows() << " rows of " << data.variables() << " bits to " << a.out << "\n";
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string out;
  std::string resume;
  unsigned workers = 0;
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg = load_run_config(a.config);
  if (!a.out.empty()) cfg.directory = a.out;
  if (a.seed) {
    cfg.model_seed = *a.seed;
    cfg.training_seed = *a.seed;
  }
  fs::create_directories(cfg.directory);

  BitDataset data = load_dataset(cfg.train_path);
  if (cfg.split > 0.0) {
    const auto n_test = static_cast<Index>(static_cast<double>(data.rows()) * cfg.split);
    if (n_test < 1 || n_test >= data.rows()) throw InvalidInput("data.split leaves an empty train or test set");
    save_dataset(data.slice(data.rows() - n_test, data.rows()), cfg.directory / "test.txt");
    data = data.slice(0, data.rows() - n_test);
  }
  if (data.variables() % cfg.k != 0) {
    throw InvalidInput("dataset has " + std::to_string(data.variables()) + " columns, not a multiple of k = " + std::to_string(cfg.k));
  }
  const Index registers = cfg.registers.value_or(data.variables() / cfg.k);
  if (registers * cfg.k != data.variables()) {
    throw InvalidInput("model measures N k = " + std::to_string(registers * cfg.k) + " variables but the dataset has " +
                       std::to_string(data.variables()) + " columns");
  }

  FbmModel model;
  OptimizerState opt;
  if (!a.resume.empty()) {
    model = load_model(a.resume);
    if (model.variables() != data.variables()) throw InvalidInput("checkpoint does not match the dataset width");
    const fs::path opt_path = fs::path(a.resume).parent_path() / "optimizer.json";
    if (fs::exists(opt_path)) opt = optimizer_from_json(detail::parse_json(detail::read_text(opt_path), opt_path.string()));
  } else {
    model = FbmModel::random(registers, cfg.layers, cfg.model_seed, cfg.k);
  }

  const auto [kernels, med] = resolve_kernels(cfg, data);
  if (med) std::cout << "median bandwidths: " << format_double(med->first) << " " << format_double(med->second) << "\n";

  TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.learning_rate = cfg.learning_rate;
  tc.kernels = kernels;
  tc.seed = cfg.training_seed;
  tc.resample_strings = cfg.resample;
  tc.checkpoint_every = cfg.checkpoint_every;
  tc.engine.ell_max = cfg.engine_ell_max;
  tc.engine.workers = a.workers;

  const std::vector<std::string> prior = prior_history(cfg.directory / "history.csv", model.epoch);
  const fs::path dir = cfg.directory;
  CheckpointFn ck = [&](const FbmModel& m, const OptimizerState& s, const TrainHistory& h) {
    save_model(m, dir / "checkpoint.json");
    write_file_atomic(dir / "optimizer.json", optimizer_to_json(s).dump() + "\n");
    write_file_atomic(dir / "history.csv", history_csv(prior, h));
  };

  const TrainResult res = train(model, data, tc, opt, ck);
  ck(res.model, res.optimizer, res.history);
  save_model(res.model, dir / "model.json");

  // Loss of the returned parameters on the epoch-0 strings.
  const std::vector<StringGroup> groups = epoch_string_groups(tc, data.variables(), 0);
  const std::vector<double> targets = target_expectations(data, flatten_strings(groups), a.workers);
  const LossEstimate final_loss = evaluate_loss(res.model, groups, targets, tc.engine);
  Json sigmas = Json::array();
  for (const auto& k : kernels) sigmas.push_back(k.kind == KernelKind::Linear ? 0.0 : k.sigma);
  Json summary{{"epochs_completed", res.history.size()},
               {"epoch", res.model.epoch},
               {"final_loss", final_loss.value},
               {"sigmas", sigmas},
               {"aborted", res.aborted}};
  if (res.aborted) summary["abort_reason"] = res.abort_reason;
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");

  if (!res.history.loss.empty()) {
    std::cout << "first loss " << format_double(res.history.loss.front()) << ", last loss "
              << format_double(res.history.loss.back()) << "\n";
  }
  std::cout << "final loss " << format_double(final_loss.value) << "\n";
  if (res.aborted) {
    std::cerr << "training aborted: " << res.abort_reason << "\n";
    return kExitNumerical;
  }
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string config;
  std::string out;
  std::vector<double> sigmas;
  int ell_max = 2;
  int n_ops = 500;
  bool enumerate = false;
  std::uint64_t seed = 0;
  unsigned workers = 0;
};

int cmd_eval(const EvalArgs& a) {
  const FbmModel model = load_model(a.model);
  const BitDataset data = load_dataset(a.data);
  if (data.variables() != model.variables()) throw InvalidInput("model and dataset widths differ");
  EngineOptions eo;
  eo.workers = a.workers;
  eo.ell_max = std::max(a.ell_max, 2);

  if (!a.config.empty()) {
    const RunConfig cfg = load_run_config(a.config);
    TrainConfig tc;
    tc.kernels = resolve_kernels(cfg, data).first;
    tc.seed = cfg.training_seed;
    eo.ell_max = std::max(eo.ell_max, cfg.engine_ell_max);
    const std::vector<StringGroup> groups = epoch_string_groups(tc, data.variables(), 0);
    const auto targets = target_expectations(data, flatten_strings(groups), a.workers);
    std::cout << "loss " << format_double(evaluate_loss(model, groups, targets, eo).value) << "\n";
  }

  std::string mmd = "sigma,mmd2\n";
  for (std::size_t i = 0; i < a.sigmas.size(); ++i) {
    KernelSpec ks;
    ks.sigma = a.sigmas[i];
    ks.ell_max = a.ell_max;
    ks.n_ops = a.n_ops;
    ks.enumerate = a.enumerate;
    Rng rng = derived_rng(a.seed, i);
    const std::vector<StringGroup> groups{make_string_group(ks, data.variables(), rng)};
    const auto targets = target_expectations(data, groups[0].strings, a.workers);
    const double v = evaluate_loss(model, groups, targets, eo).value;
    mmd += format_double(a.sigmas[i]) + "," + format_double(v) + "\n";
  }
  std::cout << mmd;

  if (model.modes() <= kOracleMaxQubits) {
    const Distribution q = exact_distribution(model);
    const Distribution p{static_cast<int>(data.variables()), data.histogram()};
    std::cout << "tvd " << format_double(tvd(p, q)) << "\n";
  }

  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_file_atomic(fs::path(a.out) / "mmd.csv", mmd);
    write_file_atomic(fs::path(a.out) / "cov_model.csv", matrix_csv(model_covariance(model, eo)));
    write_file_atomic(fs::path(a.out) / "cov_data.csv", matrix_csv(empirical_covariance(data)));
  }
  return 0;
}

struct ExportArgs {
  std::string model;
  std::string format = "native";
  std::string out;
  bool single_layer = false;
};

int cmd_export(const ExportArgs& a) {
  FbmModel model = load_model(a.model);
  if (a.single_layer) model = compile_layers(model);
  ExportFormat f;
  if (a.format == "native") {
    f = ExportFormat::Native;
  } else if (a.format == "qasm" || a.format == "openqasm2") {
    f = ExportFormat::OpenQasm2;
  } else {
    throw InvalidInput("--format must be native or qasm");
  }
  const std::string text = export_model(model, f);
  if (a.out.empty() || a.out == "-") {
    std::cout << text;
  } else {
    write_file_atomic(a.out, text);
  }
  return 0;
}

struct OracleArgs {
  std::string model;
  int ell_max = 4;
  unsigned workers = 0;
};

int cmd_oracle_check(const OracleArgs& a) {
  const FbmModel model = load_model(a.model);
  check_oracle_size(static_cast<int>(model.modes()));
  const auto strings = enumerate_zstrings(model.variables(), 1, a.ell_max);
  EngineOptions eo;
  eo.workers = a.workers;
  eo.ell_max = a.ell_max;
  const std::vector<double> ev = ExpectationEngine(model, eo).batch(strings);
  const Distribution dist = exact_distribution(model);
  double worst = 0.0;
  for (std::size_t i = 0; i < strings.size(); ++i) worst = std::max(worst, std::abs(ev[i] - parity_expectation(dist, strings[i])));
  std::cout << "strings " << strings.size() << "\nmax_deviation " << format_double(worst) << "\n";
  if (worst < 1e-8) return 0;
  std::cerr << "engine and oracle disagree beyond 1e-8\n";
  return kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train fermionic Born machines on bitstring data and export them as circuits"};
  app.require_subcommand(1);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic dataset");
  gen->add_option("--config", ga.config, "JSON file with kind, size, count, steps, seed");
  gen->add_option("--kind", ga.kind, "grid-mn or game-of-life");
  gen->add_option("--size", ga.size, "Grid size as ROWSxCOLS");
  gen->add_option("--count", ga.count, "Number of rows");
  gen->add_option("--steps", ga.steps, "Game of Life steps");
  gen->add_option("--seed", ga.seed, "Random seed");
  gen->add_option("--out", ga.out, "Output dataset path")->required();
  gen->add_option("--joint-out", ga.joint_out, "Also write the exact grid-MN joint, one probability per line");
  gen->add_option("--workers", ga.workers, "Worker threads (0 = all cores)");

  TrainArgs ta;
  std::uint64_t train_seed = 0;
  auto* tr = app.add_subcommand("train", "Train a model from a run configuration");
  tr->add_option("--config", ta.config, "Run configuration JSON")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", ta.out, "Output directory (overrides output.directory)");
  tr->add_option("--resume", ta.resume, "Checkpoint to continue from")->check(CLI::ExistingFile);
  tr->add_option("--workers", ta.workers, "Worker threads (0 = all cores)");
  auto* tr_seed = tr->add_option("--seed", train_seed, "Override model and training seeds");

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval", "Evaluate a model against a dataset");
  ev->add_option("--model", ea.model, "Model JSON")->required()->check(CLI::ExistingFile);
  ev->add_option("--data", ea.data, "Dataset file")->required()->check(CLI::ExistingFile);
  ev->add_option("--config", ea.config, "Run configuration whose kernels give the reported loss")->check(CLI::ExistingFile);
  ev->add_option("--out", ea.out, "Directory for mmd.csv and covariance CSVs");
  ev->add_option("--sigmas", ea.sigmas, "Bandwidth sweep")->delimiter(',');
  ev->add_option("--ell-max", ea.ell_max, "Locality cutoff for the sweep");
  ev->add_option("--n-ops", ea.n_ops, "Strings per bandwidth");
  ev->add_flag("--enumerate", ea.enumerate, "Use every string up to --ell-max instead of sampling");
  ev->add_option("--seed", ea.seed, "Seed for string sampling");
  ev->add_option("--workers", ea.workers, "Worker threads (0 = all cores)");

  ExportArgs xa;
  auto* ex = app.add_subcommand("export", "Write the sampling circuit");
  ex->add_option("--model", xa.model, "Model JSON")->required()->check(CLI::ExistingFile);
  ex->add_option("--format", xa.format, "native or qasm");
  ex->add_option("--out", xa.out, "Output path (default stdout)");
  ex->add_flag("--single-layer", xa.single_layer, "Merge all FLO layers into one before export");

  OracleArgs oa;
  auto* oc = app.add_subcommand("oracle-check", "Compare engine and statevector expectations");
  oc->add_option("--model", oa.model, "Model JSON")->required()->check(CLI::ExistingFile);
  oc->add_option("--ell-max", oa.ell_max, "Longest string checked");
  oc->add_option("--workers", oa.workers, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(ga, *gen);
    if (*tr) {
      if (*tr_seed) ta.seed = train_seed;
      return cmd_train(ta);
    }
    if (*ev) return cmd_eval(ea);
    if (*ex) return cmd_export(xa);
    if (*oc) return cmd_oracle_check(oa);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Refusal& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const TrainingAborted& e) {
    std::cerr << "training aborted: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SamplingFailure& e) {
    std::cerr << "sampling failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
