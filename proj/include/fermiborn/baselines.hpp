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

/// \file baselines.hpp
/// \brief Chow-Liu trees and parity covariance matrices.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <queue>
#include <vector>

#include "fermiborn/dataset.hpp"
#include "fermiborn/engine.hpp"
#include "fermiborn/error.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/model.hpp"

namespace fermiborn {

struct TreeEdge {
  Index a;
  Index b;
  double weight;
};

struct ChowLiuTree {
  Index root = 0;
  /// -1 for the root.
  std::vector<Index> parent;
  /// cpt[v][2 * parent_value + x] = P(x_v = x | parent = parent_value); the
  /// root stores its marginal in both halves.
  std::vector<std::array<double, 4>> cpt;
  /// Root first, every parent before its children.
  std::vector<Index> order;
  std::vector<TreeEdge> edges;
  bool smoothing = true;

  Index variables() const noexcept { return static_cast<Index>(parent.size()); }
  double total_weight() const {
    double s = 0.0;
    for (const auto& e : edges) s += e.weight;
    return s;
  }
};

/// Pairwise mutual information in nats. With smoothing every joint count gets +1.
inline RealMatrix mutual_information(const BitDataset& data, bool smoothing = true) {
  const Index n = data.variables();
  RealMatrix mi = RealMatrix::Zero(n, n);
  const double add = smoothing ? 1.0 : 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      std::array<double, 4> c{add, add, add, add};
      for (Index r = 0; r < data.rows(); ++r) c[static_cast<std::size_t>(2 * data(r, i) + data(r, j))] += 1.0;
      const double total = c[0] + c[1] + c[2] + c[3];
      double v = 0.0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          const double pab = c[static_cast<std::size_t>(2 * a + b)] / total;
          if (pab <= 0.0) continue;
          const double pa = (c[static_cast<std::size_t>(2 * a)] + c[static_cast<std::size_t>(2 * a + 1)]) / total;
          const double pb = (c[static_cast<std::size_t>(b)] + c[static_cast<std::size_t>(2 + b)]) / total;
          v += pab * std::log(pab / (pa * pb));
        }
      }
      mi(i, j) = mi(j, i) = std::max(v, 0.0);
    }
  }
  return mi;
}

/// Maximum-weight spanning tree (Kruskal; ties by lexicographic edge order),
/// oriented breadth-first from variable 0.
inline ChowLiuTree chow_liu_fit(const BitDataset& data, bool smoothing = true) {
  if (data.rows() < 2) throw InvalidInput("chow_liu_fit: need at least two samples");
  const Index n = data.variables();
  const RealMatrix mi = mutual_information(data, smoothing);

  std::vector<TreeEdge> cand;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) cand.push_back({i, j, mi(i, j)});
  }
  std::stable_sort(cand.begin(), cand.end(), [](const TreeEdge& x, const TreeEdge& y) { return x.weight > y.weight; });
  std::vector<Index> uf(static_cast<std::size_t>(n));
  std::iota(uf.begin(), uf.end(), Index{0});
  auto find = [&](Index x) {
    while (uf[static_cast<std::size_t>(x)] != x) {
      uf[static_cast<std::size_t>(x)] = uf[static_cast<std::size_t>(uf[static_cast<std::size_t>(x)])];
      x = uf[static_cast<std::size_t>(x)];
    }
    return x;
  };
  ChowLiuTree tree;
  tree.smoothing = smoothing;
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  for (const auto& e : cand) {
    const Index ra = find(e.a);
    const Index rb = find(e.b);
    if (ra == rb) continue;
    uf[static_cast<std::size_t>(ra)] = rb;
    tree.edges.push_back(e);
    adj[static_cast<std::size_t>(e.a)].push_back(e.b);
    adj[static_cast<std::size_t>(e.b)].push_back(e.a);
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());

  tree.root = 0;
  tree.parent.assign(static_cast<std::size_t>(n), -2);
  tree.parent[0] = -1;
  std::queue<Index> q;
  q.push(0);
  while (!q.empty()) {
    const Index v = q.front();
    q.pop();
    tree.order.push_back(v);
    for (Index w : adj[static_cast<std::size_t>(v)]) {
      if (tree.parent[static_cast<std::size_t>(w)] != -2) continue;
      tree.parent[static_cast<std::size_t>(w)] = v;
      q.push(w);
    }
  }

  const double add = smoothing ? 1.0 : 0.0;
  tree.cpt.assign(static_cast<std::size_t>(n), {0.5, 0.5, 0.5, 0.5});
  for (Index v = 0; v < n; ++v) {
    const Index pa = tree.parent[static_cast<std::size_t>(v)];
    std::array<double, 4> c{add, add, add, add};
    for (Index r = 0; r < data.rows(); ++r) {
      const int pv = pa < 0 ? 0 : data(r, pa);
      c[static_cast<std::size_t>(2 * pv + data(r, v))] += 1.0;
    }
    auto& t = tree.cpt[static_cast<std::size_t>(v)];
    for (int pv = 0; pv < 2; ++pv) {
      const double tot = c[static_cast<std::size_t>(2 * pv)] + c[static_cast<std::size_t>(2 * pv + 1)];
      if (tot > 0.0) {
        t[static_cast<std::size_t>(2 * pv)] = c[static_cast<std::size_t>(2 * pv)] / tot;
        t[static_cast<std::size_t>(2 * pv + 1)] = c[static_cast<std::size_t>(2 * pv + 1)] / tot;
      }
    }
    if (pa < 0) {
      t[2] = t[0];
      t[3] = t[1];
    }
  }
  return tree;
}

/// Ancestral sampling from the root.
inline BitDataset chow_liu_sample(const ChowLiuTree& tree, Index count, std::uint64_t seed) {
  Rng rng(seed);
  const Index n = tree.variables();
  BitDataset out(n);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(n));
  for (Index s = 0; s < count; ++s) {
    for (Index v : tree.order) {
      const Index pa = tree.parent[static_cast<std::size_t>(v)];
      const int pv = pa < 0 ? 0 : row[static_cast<std::size_t>(pa)];
      const double p1 = tree.cpt[static_cast<std::size_t>(v)][static_cast<std::size_t>(2 * pv + 1)];
      row[static_cast<std::size_t>(v)] = uniform01(rng) < p1 ? 1 : 0;
    }
    out.push_back(row);
  }
  return out;
}

/// Joint probabilities of the tree over 2^n outcomes, variable 0 in the top bit.
inline std::vector<double> chow_liu_distribution(const ChowLiuTree& tree) {
  const Index n = tree.variables();
  if (n > 24) throw Refusal("chow_liu_distribution: more than 24 variables");
  std::vector<double> p(std::size_t{1} << n);
  for (std::size_t x = 0; x < p.size(); ++x) {
    double v = 1.0;
    for (Index i = 0; i < n; ++i) {
      const int xi = static_cast<int>((x >> (n - 1 - i)) & 1u);
      const Index pa = tree.parent[static_cast<std::size_t>(i)];
      const int pv = pa < 0 ? 0 : static_cast<int>((x >> (n - 1 - pa)) & 1u);
      v *= tree.cpt[static_cast<std::size_t>(i)][static_cast<std::size_t>(2 * pv + xi)];
    }
    p[x] = v;
  }
  return p;
}

/// cov(i, j) = <Z_i Z_j> - <Z_i><Z_j> from first and second parity moments.
inline RealMatrix covariance_from_moments(const std::vector<double>& z1, const RealMatrix& z2) {
  const auto n = static_cast<Index>(z1.size());
  RealMatrix c(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double zz = i == j ? 1.0 : z2(i, j);
      c(i, j) = zz - z1[static_cast<std::size_t>(i)] * z1[static_cast<std::size_t>(j)];
    }
  }
  return c;
}

/// Parity covariance of the data, with Z = 1 - 2x.
inline RealMatrix empirical_covariance(const BitDataset& data) {
  if (data.empty()) throw InvalidInput("empirical_covariance: empty dataset");
  const Index n = data.variables();
  std::vector<double> z1(static_cast<std::size_t>(n), 0.0);
  RealMatrix z2 = RealMatrix::Zero(n, n);
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index i = 0; i < n; ++i) {
      const double zi = 1.0 - 2.0 * data(r, i);
      z1[static_cast<std::size_t>(i)] += zi;
      for (Index j = i + 1; j < n; ++j) z2(i, j) += zi * (1.0 - 2.0 * data(r, j));
    }
  }
  const double inv = 1.0 / static_cast<double>(data.rows());
  for (double& v : z1) v *= inv;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) z2(j, i) = z2(i, j) = z2(i, j) * inv;
  }
  return covariance_from_moments(z1, z2);
}

/// Parity covariance of the model from all singleton and pair expectations.
inline RealMatrix model_covariance(const FbmModel& model, EngineOptions options = {}) {
  const Index n = model.variables();
  std::vector<ZString> strings;
  for (Index i = 0; i < n; ++i) strings.push_back(ZString{i});
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) strings.push_back(ZString{i, j});
  }
  options.ell_max = std::max(options.ell_max, 2);
  const std::vector<double> vals = ExpectationEngine(model, options).batch(strings);
  std::vector<double> z1(vals.begin(), vals.begin() + n);
  RealMatrix z2 = RealMatrix::Zero(n, n);
  std::size_t k = static_cast<std::size_t>(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) z2(i, j) = z2(j, i) = vals[k++];
  }
  return covariance_from_moments(z1, z2);
}

}  // namespace fermiborn
