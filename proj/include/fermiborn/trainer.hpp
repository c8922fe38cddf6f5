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

/// \file trainer.hpp
/// \brief Loss gradients, Adam, and the training loop.
///
/// Gradients are exact reverse-mode: the engine returns d<Z_z>/d alpha and
/// d<Z_z>/dO for each string, which are contracted with the loss cotangents and
/// pulled back through the Givens product to the rotation angles.

#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fermiborn/dataset.hpp"
#include "fermiborn/engine.hpp"
#include "fermiborn/error.hpp"
#include "fermiborn/flo.hpp"
#include "fermiborn/loss.hpp"
#include "fermiborn/model.hpp"

namespace fermiborn {

struct LossGradient {
  LossEstimate estimate;
  std::vector<double> model_values;
  /// alpha first, then theta layer-major.
  std::vector<double> gradient;
  double value() const noexcept { return estimate.value; }
};

/// Strings of all groups in order.
inline std::vector<ZString> flatten_strings(std::span<const StringGroup> groups) {
  std::vector<ZString> all;
  for (const auto& g : groups) all.insert(all.end(), g.strings.begin(), g.strings.end());
  return all;
}

/// Loss and gradient for given per-group targets (concatenated in group order).
inline LossGradient loss_and_gradient(const FbmModel& model, std::span<const StringGroup> groups,
                                      std::span<const double> targets, EngineOptions options = {}) {
  model.validate();
  const std::vector<ZString> all = flatten_strings(groups);
  if (all.size() != targets.size()) throw InvalidInput("loss_and_gradient: targets do not match strings");

  // A string shared between bandwidths is evaluated once.
  std::map<ZString, std::size_t> slot;
  std::vector<ZString> unique;
  std::vector<std::size_t> where(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto [it, fresh] = slot.emplace(all[i], unique.size());
    if (fresh) unique.push_back(all[i]);
    where[i] = it->second;
  }

  const ExpectationEngine engine(model, options);
  const std::vector<StringGradient> sg = engine.batch_gradient(unique);

  LossGradient out;
  out.model_values.resize(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) out.model_values[i] = sg[where[i]].value;
  out.estimate = mmd2_estimate(targets, out.model_values, groups);

  std::vector<double> cot(unique.size(), 0.0);
  const double inv_groups = 1.0 / static_cast<double>(groups.size());
  std::size_t off = 0;
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.strings.size(); ++i) {
      const std::size_t j = off + i;
      cot[where[j]] += inv_groups * g.weights[i] * 2.0 * (out.model_values[j] - targets[j]);
    }
    off += g.strings.size();
  }

  const Index nreg = model.registers();
  std::vector<double> dalpha(static_cast<std::size_t>(nreg), 0.0);
  RealMatrix o_bar = RealMatrix::Zero(model.ansatz.dim(), model.ansatz.dim());
  for (std::size_t u = 0; u < unique.size(); ++u) {
    if (cot[u] == 0.0) continue;
    const StringGradient& s = sg[u];
    for (Index r = 0; r < nreg; ++r) dalpha[static_cast<std::size_t>(r)] += cot[u] * s.d_alpha[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < s.rows.size(); ++i) o_bar.row(s.rows[i]) += cot[u] * s.d_rows.row(static_cast<Index>(i));
  }
  const std::vector<double> dtheta = givens_angle_gradient(model.ansatz, engine.orthogonal(), o_bar);
  out.gradient = dalpha;
  out.gradient.insert(out.gradient.end(), dtheta.begin(), dtheta.end());
  return out;
}

/// Convenience form computing the targets from data.
inline LossGradient loss_and_gradient(const FbmModel& model, const BitDataset& data,
                                      std::span<const StringGroup> groups, EngineOptions options = {}) {
  const std::vector<ZString> all = flatten_strings(groups);
  const std::vector<double> t = target_expectations(data, all, options.workers);
  return loss_and_gradient(model, groups, t, options);
}

/// Loss only.
inline LossEstimate evaluate_loss(const FbmModel& model, std::span<const StringGroup> groups,
                                  std::span<const double> targets, EngineOptions options = {}) {
  const std::vector<ZString> all = flatten_strings(groups);
  const std::vector<double> mv = ExpectationEngine(model, options).batch(all);
  return mmd2_estimate(targets, mv, groups);
}

struct OptimizerState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step_count = 0;

  static OptimizerState zeros(std::size_t size) {
    return OptimizerState{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0), 0};
  }
};

/// One bias-corrected Adam update in place.
inline void adam_step(std::vector<double>& params, std::span<const double> grads, OptimizerState& state, double lr) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size() ||
      state.second_moment.size() != params.size()) {
    throw InvalidInput("adam_step: shape mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      std::ostringstream msg;
      msg << "non-finite gradient component " << i << " (" << grads[i] << ") at step " << state.step_count;
      throw TrainingAborted(msg.str());
    }
  }
  ++state.step_count;
  const double b1 = OptimizerState::kBeta1;
  const double b2 = OptimizerState::kBeta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = b1 * m + (1.0 - b1) * grads[i];
    v = b2 * v + (1.0 - b2) * grads[i] * grads[i];
    params[i] -= lr * (m / c1) / (std::sqrt(v / c2) + OptimizerState::kEpsilon);
  }
}

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 0.01;
  std::vector<KernelSpec> kernels;
  std::uint64_t seed = 0;
  bool resample_strings = true;
  int checkpoint_every = 0;
  EngineOptions engine;

  void validate(Index n) const {
    if (epochs < 1) throw InvalidInput("TrainConfig: epochs must be at least 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw InvalidInput("TrainConfig: learning_rate must be positive");
    if (kernels.empty()) throw InvalidInput("TrainConfig: at least one kernel is required");
    if (checkpoint_every < 0) throw InvalidInput("TrainConfig: checkpoint_every must be nonnegative");
    for (const auto& k : kernels) {
      if (k.kind == KernelKind::Gaussian) k.validate(n);
      if (k.kind == KernelKind::Gaussian && k.ell_max > engine.ell_max) {
        throw InvalidInput("TrainConfig: kernel ell_max exceeds the engine limit");
      }
    }
  }
};

struct TrainHistory {
  std::int64_t first_epoch = 0;
  std::vector<double> loss;
  std::vector<double> grad_norm;
  std::vector<double> seconds;

  std::size_t size() const noexcept { return loss.size(); }
};

struct TrainResult {
  FbmModel model;
  TrainHistory history;
  OptimizerState optimizer;
  bool aborted = false;
  std::string abort_reason;
};

/// Strings for one epoch; frozen mode always draws the epoch-0 set.
inline std::vector<StringGroup> epoch_string_groups(const TrainConfig& config, Index n, std::int64_t epoch) {
  std::vector<StringGroup> groups;
  const std::int64_t e = config.resample_strings ? epoch : 0;
  for (std::size_t g = 0; g < config.kernels.size(); ++g) {
    Rng rng = derived_rng(config.seed, static_cast<std::uint64_t>(e), g);
    groups.push_back(make_string_group(config.kernels[g], n, rng));
  }
  return groups;
}

using CheckpointFn = std::function<void(const FbmModel&, const OptimizerState&, const TrainHistory&)>;

/// Runs config.epochs Adam steps starting at model.epoch. Each history entry
/// is the loss at the parameters before that epoch's update. A non-finite
/// gradient stops the loop and returns the completed part of the history.
inline TrainResult train(const FbmModel& model, const BitDataset& data, const TrainConfig& config,
                         OptimizerState optimizer = {}, const CheckpointFn& checkpoint = {}) {
  model.validate();
  if (data.variables() != model.variables()) {
    throw InvalidInput("train: dataset has " + std::to_string(data.variables()) + " columns, model measures " +
                       std::to_string(model.variables()));
  }
  config.validate(model.variables());
  TrainResult res{model, {}, std::move(optimizer), false, {}};
  if (res.optimizer.first_moment.empty()) res.optimizer = OptimizerState::zeros(static_cast<std::size_t>(model.parameter_count()));
  if (static_cast<Index>(res.optimizer.first_moment.size()) != model.parameter_count()) {
    throw InvalidInput("train: optimizer state does not match the model");
  }
  res.history.first_epoch = model.epoch;

  std::vector<StringGroup> groups;
  std::vector<double> targets;
  for (int step = 0; step < config.epochs; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::int64_t epoch = res.model.epoch;
    if (groups.empty() || config.resample_strings) {
      groups = epoch_string_groups(config, model.variables(), epoch);
      const std::vector<ZString> all = flatten_strings(groups);
      targets = target_expectations(data, all, config.engine.workers);
    }
    LossGradient lg;
    try {
      lg = loss_and_gradient(res.model, groups, targets, config.engine);
      std::vector<double> params = res.model.parameters();
      OptimizerState next = res.optimizer;
      adam_step(params, lg.gradient, next, config.learning_rate);
      res.model.set_parameters(params);
      res.optimizer = std::move(next);
    } catch (const TrainingAborted& e) {
      res.aborted = true;
      res.abort_reason = e.what();
      break;
    } catch (const NumericalError& e) {
      res.aborted = true;
      res.abort_reason = e.what();
      break;
    }
    double gn = 0.0;
    for (double g : lg.gradient) gn += g * g;
    res.model.epoch = epoch + 1;
    res.history.loss.push_back(lg.value());
    res.history.grad_norm.push_back(std::sqrt(gn));
    res.history.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (checkpoint && config.checkpoint_every > 0 && (step + 1) % config.checkpoint_every == 0) {
      checkpoint(res.model, res.optimizer, res.history);
    }
  }
  return res;
}

/// Re-expresses all layers as one brickwork layer with the same O.
inline FbmModel compile_layers(const FbmModel& model) {
  model.validate();
  const RealMatrix o = detail::build_orthogonal_raw(model.ansatz);
  const double err = OrthogonalMatrix::orthogonality_error(o);
  if (err > 1e-8) throw NumericalError("compile_layers: accumulated product lost orthogonality (" + std::to_string(err) + ")");
  FbmModel out = model;
  out.ansatz = FloAnsatz(model.ansatz.modes(), 1, brickwork_decompose(o));
  const double dev = (detail::build_orthogonal_raw(out.ansatz) - o).cwiseAbs().maxCoeff();
  if (dev > 1e-8) throw NumericalError("compile_layers: decomposition deviates by " + std::to_string(dev));
  return out;
}

}  // namespace fermiborn
