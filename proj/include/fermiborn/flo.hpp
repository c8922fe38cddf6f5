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

/// \file flo.hpp
/// \brief Fermionic linear optics: Givens brickwork ansatz over SO(2d).
///
/// A rotation on Majorana plane p with angle t maps
///   m_p     ->  cos t m_p + sin t m_{p+1}
///   m_{p+1} -> -sin t m_p + cos t m_{p+1}
/// and later rotations multiply from the left. A layer has 2d sublayers; sublayer
/// s holds the planes p = s mod 2, s mod 2 + 2, ... < 2d - 1, giving d(2d-1)
/// angles per layer.

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fermiborn/error.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/skewlin.hpp"

namespace fermiborn {

/// Majorana plane of every slot of one layer, in application order.
inline std::vector<Index> brickwork_planes(Index modes) {
  std::vector<Index> planes;
  const Index n = 2 * modes;
  planes.reserve(static_cast<std::size_t>(modes * (n - 1)));
  for (Index s = 0; s < n; ++s) {
    for (Index p = s % 2; p + 1 < n; p += 2) planes.push_back(p);
  }
  return planes;
}

class FloAnsatz {
 public:
  FloAnsatz() = default;

  FloAnsatz(Index modes, Index layers, std::vector<double> angles)
      : modes_(modes), layers_(layers), angles_(std::move(angles)) {
    if (modes < 1) throw InvalidInput("FloAnsatz: need at least one mode");
    if (layers < 1) throw InvalidInput("FloAnsatz: need at least one layer");
    if (static_cast<Index>(angles_.size()) != layers * angles_per_layer()) {
      throw InvalidInput("FloAnsatz: expected " + std::to_string(layers * angles_per_layer()) +
                         " angles, got " + std::to_string(angles_.size()));
    }
    for (double t : angles_) {
      if (!std::isfinite(t)) throw InvalidInput("FloAnsatz: non-finite angle");
    }
  }

  static FloAnsatz zeros(Index modes, Index layers) {
    return FloAnsatz(modes, layers, std::vector<double>(static_cast<std::size_t>(layers * modes * (2 * modes - 1)), 0.0));
  }

  /// Angles uniform on [0, 2pi).
  static FloAnsatz random(Index modes, Index layers, Rng& rng) {
    std::vector<double> a(static_cast<std::size_t>(layers * modes * (2 * modes - 1)));
    for (double& t : a) t = kTwoPi * uniform01(rng);
    return FloAnsatz(modes, layers, std::move(a));
  }

  Index modes() const noexcept { return modes_; }
  Index layers() const noexcept { return layers_; }
  Index dim() const noexcept { return 2 * modes_; }
  Index angles_per_layer() const noexcept { return modes_ * (2 * modes_ - 1); }

  const std::vector<double>& angles() const noexcept { return angles_; }
  std::span<const double> layer(Index l) const {
    return std::span<const double>(angles_).subspan(static_cast<std::size_t>(l * angles_per_layer()),
                                                    static_cast<std::size_t>(angles_per_layer()));
  }
  double& angle(Index l, Index slot) { return angles_[static_cast<std::size_t>(l * angles_per_layer() + slot)]; }

 private:
  Index modes_ = 0;
  Index layers_ = 0;
  std::vector<double> angles_;
};

/// Element of SO(2d), validated to 1e-10.
class OrthogonalMatrix {
 public:
  static constexpr double kTolerance = 1e-10;

  OrthogonalMatrix() = default;

  explicit OrthogonalMatrix(RealMatrix o) : o_(std::move(o)) {
    if (o_.rows() != o_.cols() || o_.rows() % 2 != 0) {
      throw InvalidInput("OrthogonalMatrix: expected an even square matrix");
    }
    const double err = orthogonality_error(o_);
    if (err > kTolerance) {
      throw InvalidInput("OrthogonalMatrix: |O^T O - I| = " + std::to_string(err));
    }
    if (std::abs(o_.determinant() - 1.0) > kTolerance) {
      throw InvalidInput("OrthogonalMatrix: determinant is not +1");
    }
  }

  /// Largest elementwise deviation of O^T O from the identity.
  static double orthogonality_error(const RealMatrix& o) {
    const RealMatrix g = o.transpose() * o;
    return (g - RealMatrix::Identity(o.rows(), o.cols())).cwiseAbs().maxCoeff();
  }

  Index dim() const noexcept { return o_.rows(); }
  const RealMatrix& matrix() const noexcept { return o_; }
  double operator()(Index p, Index q) const { return o_(p, q); }

 private:
  RealMatrix o_;
};

/// Left-multiplies rows (p, p+1) of x by the plane-p rotation.
template <typename Derived>
void apply_givens_rows(Eigen::MatrixBase<Derived>& x, Index p, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (Index j = 0; j < x.cols(); ++j) {
    const double a = x(p, j);
    const double b = x(p + 1, j);
    x(p, j) = c * a + s * b;
    x(p + 1, j) = -s * a + c * b;
  }
}

/// Rows (p, p+1) of x multiplied by the transpose of the plane-p rotation.
template <typename Derived>
void apply_givens_rows_transposed(Eigen::MatrixBase<Derived>& x, Index p, double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  for (Index j = 0; j < x.cols(); ++j) {
    const double a = x(p, j);
    const double b = x(p + 1, j);
    x(p, j) = c * a - s * b;
    x(p + 1, j) = s * a + c * b;
  }
}

namespace detail {

inline RealMatrix build_orthogonal_raw(const FloAnsatz& ansatz) {
  RealMatrix o = RealMatrix::Identity(ansatz.dim(), ansatz.dim());
  const std::vector<Index> planes = brickwork_planes(ansatz.modes());
  for (Index l = 0; l < ansatz.layers(); ++l) {
    const auto layer = ansatz.layer(l);
    for (std::size_t i = 0; i < planes.size(); ++i) apply_givens_rows(o, planes[i], layer[i]);
  }
  return o;
}

}  // namespace detail

inline OrthogonalMatrix build_orthogonal(const FloAnsatz& ansatz) {
  return OrthogonalMatrix(detail::build_orthogonal_raw(ansatz));
}

/// Gradient of a scalar f(O) with respect to every ansatz angle, given
/// o_bar = df/dO and o = build_orthogonal(ansatz). Reverse sweep over the
/// rotations, undoing each one on both O and its adjoint.
inline std::vector<double> givens_angle_gradient(const FloAnsatz& ansatz, const RealMatrix& o,
                                                 const RealMatrix& o_bar) {
  if (o.rows() != ansatz.dim() || o_bar.rows() != ansatz.dim()) {
    throw InvalidInput("givens_angle_gradient: dimension mismatch");
  }
  RealMatrix x = o;
  RealMatrix xb = o_bar;
  const std::vector<Index> planes = brickwork_planes(ansatz.modes());
  const Index per = ansatz.angles_per_layer();
  std::vector<double> grad(ansatz.angles().size(), 0.0);
  for (Index l = ansatz.layers() - 1; l >= 0; --l) {
    const auto layer = ansatz.layer(l);
    for (Index i = per - 1; i >= 0; --i) {
      const Index p = planes[static_cast<std::size_t>(i)];
      grad[static_cast<std::size_t>(l * per + i)] =
          xb.row(p).dot(x.row(p + 1)) - xb.row(p + 1).dot(x.row(p));
      apply_givens_rows_transposed(x, p, layer[static_cast<std::size_t>(i)]);
      apply_givens_rows_transposed(xb, p, layer[static_cast<std::size_t>(i)]);
    }
  }
  return grad;
}

namespace detail {

struct PlaneRotation {
  Index p;
  double theta;
};

inline void rotate_columns_transposed(RealMatrix& u, Index m, double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  for (Index r = 0; r < u.rows(); ++r) {
    const double a = u(r, m);
    const double b = u(r, m + 1);
    u(r, m) = c * a + s * b;
    u(r, m + 1) = -s * a + c * b;
  }
}

}  // namespace detail

/// Angles of a single brickwork layer reproducing `o`.
///
/// Nulls the subdiagonal part by alternating right and left rotations (the
/// rectangular-mesh elimination order), leaving a diagonal sign matrix D. Left
/// rotations are commuted through D, the sequence is packed into the 2d
/// sublayers as early as parity allows, and D is absorbed as pi rotations on
/// the last two sublayers.
inline std::vector<double> brickwork_decompose(const RealMatrix& o) {
  const Index n = o.rows();
  if (n != o.cols() || n % 2 != 0 || n == 0) {
    throw InvalidInput("brickwork_decompose: expected an even square matrix");
  }
  RealMatrix u = o;
  std::vector<detail::PlaneRotation> right;
  std::vector<detail::PlaneRotation> left;
  for (Index i = 1; i < n; ++i) {
    if (i % 2 == 1) {
      for (Index j = 0; j < i; ++j) {
        const Index r = n - 1 - j;
        const Index m = i - j - 1;
        const double t = std::atan2(-u(r, m), u(r, m + 1));
        detail::rotate_columns_transposed(u, m, t);
        right.push_back({m, t});
      }
    } else {
      for (Index j = 1; j <= i; ++j) {
        const Index r = n + j - i - 1;
        const Index m = j - 1;
        const Index p = r - 1;
        const double t = std::atan2(u(r, m), u(p, m));
        apply_givens_rows(u, p, t);
        left.push_back({p, t});
      }
    }
  }
  std::vector<double> sign(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    sign[static_cast<std::size_t>(i)] = u(i, i) < 0 ? -1.0 : 1.0;
    u(i, i) -= sign[static_cast<std::size_t>(i)];
  }
  if (u.cwiseAbs().maxCoeff() > 1e-8) {
    throw NumericalError("brickwork_decompose: input is not orthogonal");
  }

  // o = D * seq, seq in application order.
  std::vector<detail::PlaneRotation> seq = right;
  for (auto it = left.rbegin(); it != left.rend(); ++it) {
    double t = -it->theta;
    if (sign[static_cast<std::size_t>(it->p)] != sign[static_cast<std::size_t>(it->p + 1)]) t = -t;
    seq.push_back({it->p, t});
  }

  std::vector<std::vector<double>> layers(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<Index> wire(static_cast<std::size_t>(n), -1);
  std::vector<Index> last_plane(static_cast<std::size_t>(n), -1);
  std::vector<Index> last_slot(static_cast<std::size_t>(n), -1);
  for (const auto& g : seq) {
    const auto p = static_cast<std::size_t>(g.p);
    if (last_plane[p] == g.p && last_plane[p + 1] == g.p && last_slot[p] == last_slot[p + 1]) {
      layers[static_cast<std::size_t>(last_slot[p])][p] += g.theta;
      continue;
    }
    Index s = std::max(wire[p], wire[p + 1]) + 1;
    if (s % 2 != g.p % 2) ++s;
    if (s >= n) throw NumericalError("brickwork_decompose: schedule overflow");
    layers[static_cast<std::size_t>(s)][p] = g.theta;
    wire[p] = wire[p + 1] = s;
    last_plane[p] = last_plane[p + 1] = g.p;
    last_slot[p] = last_slot[p + 1] = s;
  }

  // D as a product of pi rotations on adjacent planes.
  std::vector<int> flips(static_cast<std::size_t>(n), 0);
  {
    std::vector<Index> neg;
    for (Index i = 0; i < n; ++i) {
      if (sign[static_cast<std::size_t>(i)] < 0) neg.push_back(i);
    }
    if (neg.size() % 2 != 0) throw NumericalError("brickwork_decompose: determinant is -1");
    for (std::size_t k = 0; k < neg.size(); k += 2) {
      for (Index q = neg[k]; q < neg[k + 1]; ++q) flips[static_cast<std::size_t>(q)] ^= 1;
    }
  }
  std::vector<double> de(static_cast<std::size_t>(n), 1.0);
  for (Index q = 0; q + 1 < n; q += 2) {
    if (flips[static_cast<std::size_t>(q)]) {
      de[static_cast<std::size_t>(q)] = -de[static_cast<std::size_t>(q)];
      de[static_cast<std::size_t>(q + 1)] = -de[static_cast<std::size_t>(q + 1)];
    }
  }
  auto& top = layers[static_cast<std::size_t>(n - 1)];
  for (Index p = 1; p + 1 < n; p += 2) {
    if (de[static_cast<std::size_t>(p)] != de[static_cast<std::size_t>(p + 1)]) top[static_cast<std::size_t>(p)] = -top[static_cast<std::size_t>(p)];
  }
  for (Index q = 0; q + 1 < n; ++q) {
    if (!flips[static_cast<std::size_t>(q)]) continue;
    layers[static_cast<std::size_t>(q % 2 == 1 ? n - 1 : n - 2)][static_cast<std::size_t>(q)] += std::numbers::pi;
  }

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n / 2 * (n - 1)));
  for (Index s = 0; s < n; ++s) {
    for (Index p = s % 2; p + 1 < n; p += 2) out.push_back(layers[static_cast<std::size_t>(s)][static_cast<std::size_t>(p)]);
  }
  return out;
}

/// Per-register contributions A_k B A_k^T for a fixed row selection, where
/// A_k = O[rows, 8k : 8k+8]. Summing them over registers yields the selected
/// principal block of O (direct sum of B_k) O^T without forming the full product.
class BlockContributionTable {
 public:
  static constexpr Index kBlock = 8;

  BlockContributionTable(const RealMatrix& o, std::span<const Index> rows) : o_(&o), rows_(rows.begin(), rows.end()) {
    for (Index r : rows_) {
      if (r < 0 || r >= o.rows()) throw InvalidInput("BlockContributionTable: row out of range");
    }
  }

  Index registers() const noexcept { return o_->cols() / kBlock; }
  Index size() const noexcept { return static_cast<Index>(rows_.size()); }
  const std::vector<Index>& rows() const noexcept { return rows_; }

  SmallReal projection(Index k) const {
    SmallReal a(size(), kBlock);
    for (Index i = 0; i < size(); ++i) a.row(i) = o_->block(rows_[static_cast<std::size_t>(i)], k * kBlock, 1, kBlock);
    return a;
  }

  template <typename Block>
  static SmallComplex contribution(const SmallReal& a, const Block& block) {
    const Eigen::Matrix<cplx, Eigen::Dynamic, kBlock, Eigen::ColMajor, kMaxSmallDim, kBlock> ab =
        a.cast<cplx>() * block;
    return ab * a.transpose().cast<cplx>();
  }

 private:
  const RealMatrix* o_;
  std::vector<Index> rows_;
};

/// Principal block on `rows` of O (direct sum of blocks) O^T.
inline SkewMatrix evolve_block_covariance(const OrthogonalMatrix& o, std::span<const SkewMatrix> blocks,
                                          std::span<const Index> rows) {
  Index total = 0;
  for (const auto& b : blocks) {
    if (b.dim() != BlockContributionTable::kBlock) {
      throw InvalidInput("evolve_block_covariance: blocks must be 8x8");
    }
    total += b.dim();
  }
  if (total != o.dim()) {
    throw InvalidInput("evolve_block_covariance: blocks span " + std::to_string(total) +
                       " rows but O has dimension " + std::to_string(o.dim()));
  }
  if (static_cast<Index>(rows.size()) > kMaxSmallDim) {
    ComplexMatrix full = ComplexMatrix::Zero(o.dim(), o.dim());
    const SkewMatrix ds = direct_sum(blocks);
    const ComplexMatrix oc = o.matrix().cast<cplx>();
    full = oc * ds.entries() * oc.transpose();
    return principal_submatrix(SkewMatrix(full), rows);
  }
  const BlockContributionTable table(o.matrix(), rows);
  SmallComplex sum = SmallComplex::Zero(table.size(), table.size());
  for (Index k = 0; k < table.registers(); ++k) {
    const Eigen::Matrix<cplx, 8, 8> b = blocks[static_cast<std::size_t>(k)].entries();
    sum += BlockContributionTable::contribution(table.projection(k), b);
  }
  return SkewMatrix(ComplexMatrix(sum));
}

}  // namespace fermiborn
