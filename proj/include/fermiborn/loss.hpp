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

/// \file loss.hpp
/// \brief MMD^2 between data and model written over Z-string expectations.
///
/// For the kernel exp(-|x - y|^2 / (2 sigma)) on bitstrings,
///   MMD^2 = E_{z ~ p_sigma} [ (<Z_z>_data - <Z_z>_model)^2 ],
/// where z includes each variable independently with probability
/// p_sigma = (1 - exp(-1/(2 sigma))) / 2. Strings are drawn from this law
/// with lengths outside [1, ell_max] rejected.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fermiborn/dataset.hpp"
#include "fermiborn/error.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/model.hpp"
#include "fermiborn/parallel.hpp"

namespace fermiborn {

enum class KernelKind { Gaussian, Linear };

struct KernelSpec {
  KernelKind kind = KernelKind::Gaussian;
  double sigma = 1.0;
  int ell_max = 2;
  int n_ops = 100;
  /// Use every string of length 1..ell_max with its normalized kernel weight
  /// instead of sampling.
  bool enumerate = false;

  void validate(Index n) const {
    if (kind == KernelKind::Gaussian && !(sigma > 0.0 && std::isfinite(sigma))) {
      throw InvalidInput("KernelSpec: sigma must be positive");
    }
    if (ell_max < 1 || ell_max > n) throw InvalidInput("KernelSpec: ell_max must lie in [1, n]");
    if (n_ops < 1) throw InvalidInput("KernelSpec: n_ops must be positive");
  }
};

inline double p_sigma(double sigma) { return 0.5 * (1.0 - std::exp(-1.0 / (2.0 * sigma))); }

/// Probability of one particular string of the given length under the kernel law.
inline double kernel_weight(double sigma, Index length, Index n) {
  const double p = p_sigma(sigma);
  return std::pow(1.0 - p, static_cast<double>(n - length)) * std::pow(p, static_cast<double>(length));
}

/// Every string with ell_min <= length <= ell_max, shortest first, then lexicographic.
inline std::vector<ZString> enumerate_zstrings(Index n, Index ell_min, Index ell_max) {
  std::vector<ZString> out;
  for (Index len = std::max<Index>(ell_min, 0); len <= std::min(ell_max, n); ++len) {
    std::vector<Index> idx(static_cast<std::size_t>(len));
    for (Index t = 0; t < len; ++t) idx[static_cast<std::size_t>(t)] = t;
    while (true) {
      out.emplace_back(idx);
      Index t = len - 1;
      while (t >= 0 && idx[static_cast<std::size_t>(t)] == n - len + t) --t;
      if (t < 0) break;
      ++idx[static_cast<std::size_t>(t)];
      for (Index u = t + 1; u < len; ++u) idx[static_cast<std::size_t>(u)] = idx[static_cast<std::size_t>(u - 1)] + 1;
    }
  }
  return out;
}

/// n_ops independent draws, rejecting lengths 0 and > ell_max.
inline std::vector<ZString> sample_zstrings(const KernelSpec& spec, Index n, Rng& rng) {
  spec.validate(n);
  const double p = p_sigma(spec.sigma);
  constexpr long kMaxRejections = 1000000;
  std::vector<ZString> out;
  out.reserve(static_cast<std::size_t>(spec.n_ops));
  std::vector<Index> idx;
  for (int s = 0; s < spec.n_ops; ++s) {
    long rejected = 0;
    while (true) {
      idx.clear();
      for (Index v = 0; v < n; ++v) {
        if (uniform01(rng) < p) idx.push_back(v);
      }
      const auto len = static_cast<Index>(idx.size());
      if (len >= 1 && len <= spec.ell_max) break;
      if (++rejected > kMaxRejections) {
        throw SamplingFailure("sample_zstrings: more than 1e6 rejections at sigma = " + std::to_string(spec.sigma) +
                              " (p = " + std::to_string(p) + ")");
      }
    }
    out.emplace_back(idx);
  }
  return out;
}

inline std::vector<ZString> sample_zstrings(const KernelSpec& spec, Index n, std::uint64_t seed) {
  Rng rng(seed);
  return sample_zstrings(spec, n, rng);
}

/// Distinct strings of one bandwidth with their estimator weights.
struct StringGroup {
  KernelSpec spec;
  std::vector<ZString> strings;
  std::vector<double> weights;
};

/// Linear kernel: all singletons with weight 1. Enumerated Gaussian: all
/// strings up to ell_max with kernel weights normalized over that set.
/// Sampled Gaussian: deduplicated draws weighted by multiplicity / n_ops.
inline StringGroup make_string_group(const KernelSpec& spec, Index n, Rng& rng) {
  StringGroup g{spec, {}, {}};
  if (spec.kind == KernelKind::Linear) {
    if (n < 1) throw InvalidInput("make_string_group: need at least one variable");
    g.strings = enumerate_zstrings(n, 1, 1);
    g.weights.assign(g.strings.size(), 1.0);
    return g;
  }
  spec.validate(n);
  if (spec.enumerate) {
    g.strings = enumerate_zstrings(n, 1, spec.ell_max);
    // Weights relative to the longest string to stay representable at tiny p.
    const double p = p_sigma(spec.sigma);
    const double r = std::log(p) - std::log1p(-p);
    double total = 0.0;
    for (const ZString& z : g.strings) {
      const double w = std::exp(r * static_cast<double>(z.length() - 1));
      g.weights.push_back(w);
      total += w;
    }
    for (double& w : g.weights) w /= total;
    return g;
  }
  std::map<ZString, int> counts;
  for (ZString& z : sample_zstrings(spec, n, rng)) ++counts[std::move(z)];
  for (auto& [z, c] : counts) {
    g.strings.push_back(z);
    g.weights.push_back(static_cast<double>(c) / spec.n_ops);
  }
  return g;
}

/// Mean parity (-1)^(sum of x_i over z) over the rows.
inline std::vector<double> target_expectations(const BitDataset& data, std::span<const ZString> strings,
                                               unsigned workers = 1) {
  if (data.empty()) throw InvalidInput("target_expectations: empty dataset");
  for (const ZString& z : strings) z.check_range(data.variables());
  std::vector<double> out(strings.size());
  const double inv = 1.0 / static_cast<double>(data.rows());
  parallel_for(strings.size(), workers, [&](std::size_t i) {
    long even = 0;
    for (Index r = 0; r < data.rows(); ++r) {
      const std::uint8_t* row = data.row(r);
      unsigned par = 0;
      for (Index v : strings[i].indices()) par ^= row[v];
      even += par == 0;
    }
    out[i] = static_cast<double>(2 * even - data.rows()) * inv;
  });
  return out;
}

struct LossEstimate {
  double value = 0.0;
  std::vector<std::pair<double, double>> per_bandwidth;
  std::vector<ZString> strings_used;
  std::vector<double> squared_differences;
};

/// Values are the concatenation of the groups' strings in order. Each group
/// contributes sum_i w_i (t_i - m_i)^2; the result is the mean over groups.
inline LossEstimate mmd2_estimate(std::span<const double> target, std::span<const double> model,
                                  std::span<const StringGroup> groups) {
  if (target.size() != model.size()) throw InvalidInput("mmd2_estimate: target and model lengths differ");
  std::size_t total = 0;
  for (const auto& g : groups) total += g.strings.size();
  if (total != target.size()) throw InvalidInput("mmd2_estimate: values do not match the string groups");
  if (groups.empty()) throw InvalidInput("mmd2_estimate: no kernel groups");
  LossEstimate est;
  std::size_t off = 0;
  for (const auto& g : groups) {
    double v = 0.0;
    for (std::size_t i = 0; i < g.strings.size(); ++i) {
      const double diff = target[off + i] - model[off + i];
      v += g.weights[i] * diff * diff;
      est.strings_used.push_back(g.strings[i]);
      est.squared_differences.push_back(diff * diff);
    }
    off += g.strings.size();
    est.per_bandwidth.emplace_back(g.spec.kind == KernelKind::Linear ? 0.0 : g.spec.sigma, v);
    est.value += v;
  }
  est.value /= static_cast<double>(groups.size());
  return est;
}

/// Single-group form with equal weights 1/size.
inline double mmd2_mean(std::span<const double> target, std::span<const double> model) {
  if (target.size() != model.size()) throw InvalidInput("mmd2_mean: lengths differ");
  if (target.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) s += (target[i] - model[i]) * (target[i] - model[i]);
  return s / static_cast<double>(target.size());
}

inline double median_of(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

/// m = median squared distance |x - y|^2 over pairs of differing rows, using
/// every pair when there are at most `subsample` of them and a seeded random
/// set of `subsample` pairs otherwise. Returns (m/2, m).
inline std::pair<double, double> median_heuristic(const BitDataset& data, std::size_t subsample, Rng& rng) {
  if (data.rows() < 2) throw InvalidInput("median_heuristic: need at least two rows");
  const Index rows = data.rows();
  auto dist = [&](Index a, Index b) {
    int h = 0;
    for (Index c = 0; c < data.variables(); ++c) h += data(a, c) != data(b, c);
    return h;
  };
  std::vector<double> d;
  const auto pairs = static_cast<std::size_t>(rows) * static_cast<std::size_t>(rows - 1) / 2;
  if (pairs <= subsample) {
    for (Index a = 0; a < rows; ++a) {
      for (Index b = a + 1; b < rows; ++b) {
        const int h = dist(a, b);
        if (h > 0) d.push_back(h);
      }
    }
  } else {
    std::size_t attempts = 0;
    while (d.size() < subsample && attempts < 20 * subsample) {
      ++attempts;
      const auto a = static_cast<Index>(uniform01(rng) * static_cast<double>(rows));
      const auto b = static_cast<Index>(uniform01(rng) * static_cast<double>(rows));
      if (a == b) continue;
      const int h = dist(a, b);
      if (h > 0) d.push_back(h);
    }
  }
  if (d.empty()) throw InvalidInput("median_heuristic: all rows identical, bandwidth is degenerate");
  const double m = median_of(std::move(d));
  return {m / 2.0, m};
}

}  // namespace fermiborn
