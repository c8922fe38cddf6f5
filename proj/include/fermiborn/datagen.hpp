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

/// \file datagen.hpp
/// \brief Synthetic datasets: grid Markov networks and Game of Life equilibria.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fermiborn/dataset.hpp"
#include "fermiborn/error.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/parallel.hpp"

namespace fermiborn {

/// Standard normal by Box-Muller on uniform01, so datasets match across
/// standard libraries.
inline double standard_normal(Rng& rng) {
  double u = uniform01(rng);
  while (u <= 0.0) u = uniform01(rng);
  const double v = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(kTwoPi * v);
}

/// Pairwise-grid Markov network with one factor per 2x2 block of cells.
/// Clique (r, c) covers cells (r,c), (r,c+1), (r+1,c), (r+1,c+1); its table is
/// indexed by those four bits in that order, first cell most significant.
struct GridMN {
  int rows = 0;
  int cols = 0;
  std::vector<std::array<double, 16>> log_factors;
  /// Exact joint over 2^(rows cols) outcomes, cell 0 in the top bit.
  std::vector<double> joint;

  Index variables() const noexcept { return static_cast<Index>(rows) * cols; }
  Index cliques() const noexcept { return static_cast<Index>(log_factors.size()); }

  static int clique_config(std::size_t x, int n, int cols, int r, int c) {
    auto bit = [&](int rr, int cc) { return static_cast<int>((x >> (n - 1 - (rr * cols + cc))) & 1u); };
    return (bit(r, c) << 3) | (bit(r, c + 1) << 2) | (bit(r + 1, c) << 1) | bit(r + 1, c + 1);
  }
};

/// Builds the normalized joint from given log-factors.
inline GridMN grid_mn_from_factors(int rows, int cols, std::vector<std::array<double, 16>> log_factors) {
  if (rows < 2 || cols < 2) throw InvalidInput("grid_mn: need at least a 2x2 grid");
  if (rows * cols > 20) throw Refusal("grid_mn: " + std::to_string(rows * cols) + " cells exceed the exact-enumeration limit of 20");
  if (log_factors.size() != static_cast<std::size_t>((rows - 1) * (cols - 1))) throw InvalidInput("grid_mn: wrong number of factors");
  GridMN mn{rows, cols, std::move(log_factors), {}};
  const int n = rows * cols;
  mn.joint.resize(std::size_t{1} << n);
  double mx = -INFINITY;
  for (std::size_t x = 0; x < mn.joint.size(); ++x) {
    double lp = 0.0;
    for (int r = 0; r + 1 < rows; ++r) {
      for (int c = 0; c + 1 < cols; ++c) {
        lp += mn.log_factors[static_cast<std::size_t>(r * (cols - 1) + c)][static_cast<std::size_t>(GridMN::clique_config(x, n, cols, r, c))];
      }
    }
    mn.joint[x] = lp;
    mx = std::max(mx, lp);
  }
  double z = 0.0;
  for (double& v : mn.joint) {
    v = std::exp(v - mx);
    z += v;
  }
  for (double& v : mn.joint) v /= z;
  return mn;
}

/// Log-factor entries i.i.d. standard normal.
inline GridMN grid_mn_generate(int rows, int cols, std::uint64_t seed) {
  if (rows < 2 || cols < 2) throw InvalidInput("grid_mn: need at least a 2x2 grid");
  if (rows * cols > 20) throw Refusal("grid_mn: " + std::to_string(rows * cols) + " cells exceed the exact-enumeration limit of 20");
  Rng rng(seed);
  std::vector<std::array<double, 16>> lf(static_cast<std::size_t>((rows - 1) * (cols - 1)));
  for (auto& f : lf) {
    for (double& v : f) v = standard_normal(rng);
  }
  return grid_mn_from_factors(rows, cols, std::move(lf));
}

/// Inverse-CDF draws from the exact joint.
inline BitDataset mn_sample(const GridMN& mn, Index count, std::uint64_t seed) {
  Rng rng(seed);
  const int n = static_cast<int>(mn.variables());
  std::vector<double> cdf(mn.joint.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) cdf[i] = acc += mn.joint[i];
  BitDataset out(n);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(n));
  for (Index s = 0; s < count; ++s) {
    const double u = uniform01(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    const auto x = static_cast<std::size_t>(it - cdf.begin());
    for (int v = 0; v < n; ++v) row[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>((x >> (n - 1 - v)) & 1u);
    out.push_back(row);
  }
  return out;
}

/// One Conway step; cells outside the grid are dead.
inline std::vector<std::uint8_t> life_step(const std::vector<std::uint8_t>& g, int rows, int cols) {
  std::vector<std::uint8_t> out(g.size(), 0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      int live = 0;
      for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int rr = r + dr;
          const int cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          live += g[static_cast<std::size_t>(rr * cols + cc)];
        }
      }
      const auto self = g[static_cast<std::size_t>(r * cols + c)];
      out[static_cast<std::size_t>(r * cols + c)] = (live == 3 || (self && live == 2)) ? 1 : 0;
    }
  }
  return out;
}

inline std::vector<std::uint8_t> life_evolve(std::vector<std::uint8_t> g, int rows, int cols, int steps) {
  for (int s = 0; s < steps; ++s) g = life_step(g, rows, cols);
  return g;
}

/// Random fair-bit grids evolved `steps` times; all-zero results are redrawn.
/// Sample i draws from its own stream derived from (seed, i).
inline BitDataset game_of_life_dataset(int rows, int cols, int steps, Index count, std::uint64_t seed,
                                       unsigned workers = 1) {
  if (rows < 3 || cols < 3) throw InvalidInput("game_of_life: grid must be at least 3x3");
  if (steps < 0 || count < 1) throw InvalidInput("game_of_life: bad steps or count");
  constexpr int kWindow = 1000;
  const auto cells = static_cast<std::size_t>(rows * cols);
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(count) * cells);
  parallel_for(static_cast<std::size_t>(count), workers, [&](std::size_t i) {
    Rng rng = derived_rng(seed, i);
    for (int attempt = 0;; ++attempt) {
      if (attempt >= kWindow) {
        throw SamplingFailure("game_of_life: " + std::to_string(kWindow) + " consecutive all-zero outcomes");
      }
      std::vector<std::uint8_t> g(cells);
      for (auto& b : g) b = uniform01(rng) < 0.5 ? 1 : 0;
      g = life_evolve(std::move(g), rows, cols, steps);
      if (std::any_of(g.begin(), g.end(), [](std::uint8_t b) { return b != 0; })) {
        std::copy(g.begin(), g.end(), bits.begin() + static_cast<std::ptrdiff_t>(i * cells));
        return;
      }
    }
  });
  return BitDataset(rows * cols, std::move(bits));
}

}  // namespace fermiborn
