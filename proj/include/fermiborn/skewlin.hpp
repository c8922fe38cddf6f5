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

/// \file skewlin.hpp
/// \brief Complex skew-symmetric matrices and their Pfaffians.
///
/// The Pfaffian is computed by Parlett-Reid elimination: a symmetric
/// Gaussian elimination that keeps the working matrix skew-symmetric and
/// reduces it to a tridiagonal skew form, whose Pfaffian is the product of
/// the super-diagonal entries at even positions. Partial pivoting selects the
/// largest-magnitude candidate in the working column; each interchange flips
/// the sign.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fermiborn/error.hpp"
#include "fermiborn/linalg.hpp"

namespace fermiborn {

/// Even-dimensional complex matrix with A == -A^T.
class SkewMatrix {
 public:
  static constexpr double kTolerance = 1e-12;

  SkewMatrix() = default;

  /// Validates evenness and skew-symmetry (absolute tolerance kTolerance),
  /// then stores the exactly skew part (A - A^T) / 2.
  explicit SkewMatrix(const ComplexMatrix& entries) {
    if (entries.rows() != entries.cols()) {
      throw InvalidInput("SkewMatrix: matrix is not square");
    }
    if (entries.rows() % 2 != 0) {
      throw InvalidInput("SkewMatrix: dimension " + std::to_string(entries.rows()) + " is odd");
    }
    const Index n = entries.rows();
    for (Index p = 0; p < n; ++p) {
      for (Index q = p; q < n; ++q) {
        if (std::abs(entries(p, q) + entries(q, p)) > kTolerance) {
          throw InvalidInput("SkewMatrix: entries (" + std::to_string(p) + "," + std::to_string(q) +
                             ") violate skew-symmetry");
        }
      }
    }
    a_ = 0.5 * (entries - entries.transpose());
  }

  explicit SkewMatrix(const RealMatrix& entries) : SkewMatrix(ComplexMatrix(entries.cast<cplx>())) {}

  static SkewMatrix zero(Index dim) { return SkewMatrix(ComplexMatrix(ComplexMatrix::Zero(dim, dim))); }

  Index dim() const noexcept { return a_.rows(); }
  const ComplexMatrix& entries() const noexcept { return a_; }
  cplx operator()(Index p, Index q) const { return a_(p, q); }

  /// Largest |A(p,q) + A(q,p)|; zero for every constructed value.
  double asymmetry() const { return (a_ + a_.transpose()).cwiseAbs().maxCoeff(); }

 private:
  ComplexMatrix a_;
};

namespace detail {

/// Below this magnitude a pivot column counts as structurally zero.
inline constexpr double kZeroPivot = 1e-14;

/// Parlett-Reid Pfaffian; overwrites `a`. No validation.
template <typename Derived>
cplx pfaffian_inplace(Eigen::MatrixBase<Derived>& a) {
  const Index n = a.rows();
  cplx pf = 1.0;
  for (Index k = 0; k + 1 < n; k += 2) {
    Index kp = k + 1;
    double best = std::norm(a(k + 1, k));
    for (Index i = k + 2; i < n; ++i) {
      const double v = std::norm(a(i, k));
      if (v > best) {
        best = v;
        kp = i;
      }
    }
    if (best < kZeroPivot * kZeroPivot) return 0.0;
    if (kp != k + 1) {
      a.row(k + 1).swap(a.row(kp));
      a.col(k + 1).swap(a.col(kp));
      pf = -pf;
    }
    const cplx pivot = a(k, k + 1);
    pf *= pivot;
    if (k + 2 < n) {
      const cplx inv = 1.0 / pivot;
      for (Index j = k + 2; j < n; ++j) {
        const cplx tau_j = a(k, j) * inv;
        const cplx col_j = a(j, k + 1);
        for (Index i = k + 2; i < n; ++i) {
          a(i, j) += a(k, i) * inv * col_j - a(i, k + 1) * tau_j;
        }
      }
    }
  }
  return pf;
}

/// Pfaffian of `a` with rows/columns i and j (i < j) removed.
inline cplx pfaffian_minor(const SmallComplex& a, Index i, Index j) {
  const Index n = a.rows();
  SmallComplex sub(n - 2, n - 2);
  for (Index r = 0, rr = 0; r < n; ++r) {
    if (r == i || r == j) continue;
    for (Index c = 0, cc = 0; c < n; ++c) {
      if (c == i || c == j) continue;
      sub(rr, cc) = a(r, c);
      ++cc;
    }
    ++rr;
  }
  return pfaffian_inplace(sub);
}

}  // namespace detail

/// Pfaffian of a validated skew matrix; satisfies pf(A)^2 = det(A).
inline cplx pfaffian(const SkewMatrix& a) {
  const ComplexMatrix& e = a.entries();
  if (a.dim() == 2) return e(0, 1);
  if (a.dim() == 4) return e(0, 1) * e(2, 3) - e(0, 2) * e(1, 3) + e(0, 3) * e(1, 2);
  ComplexMatrix work = e;
  return detail::pfaffian_inplace(work);
}

/// Pfaffian of a small skew matrix together with its gradient.
///
/// On return grad(i, j) = d pf / d a_ij for i < j, where a_ji = -a_ij is held
/// tied; the lower triangle and the diagonal are zero. Uses
/// d pf / d a_ij = pf(A) (A^-1)_ji while |pf(A)| >= 1e-10 and falls back to the
/// minor expansion (-1)^(i+j+1) pf(A with rows/cols i, j removed) near
/// singular matrices, where the inverse formula breaks down.
inline cplx pfaffian_with_gradient(const SmallComplex& a, SmallComplex& grad) {
  const Index n = a.rows();
  grad.setZero(n, n);
  if (n == 0) return 1.0;
  if (n == 2) {
    grad(0, 1) = 1.0;
    return a(0, 1);
  }
  if (n == 4) {
    grad(0, 1) = a(2, 3);
    grad(0, 2) = -a(1, 3);
    grad(0, 3) = a(1, 2);
    grad(1, 2) = a(0, 3);
    grad(1, 3) = -a(0, 2);
    grad(2, 3) = a(0, 1);
    return a(0, 1) * a(2, 3) - a(0, 2) * a(1, 3) + a(0, 3) * a(1, 2);
  }
  SmallComplex work = a;
  const cplx pf = detail::pfaffian_inplace(work);
  if (std::abs(pf) >= 1e-10) {
    const SmallComplex inv = a.partialPivLu().inverse();
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) grad(i, j) = pf * inv(j, i);
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double sign = ((i + j + 1) % 2 == 0) ? 1.0 : -1.0;
        grad(i, j) = sign * detail::pfaffian_minor(a, i, j);
      }
    }
  }
  return pf;
}

/// Rows/columns `rows` of `a`; `rows` must be strictly increasing and in range.
/// An odd number of rows cannot form a SkewMatrix and is rejected.
inline SkewMatrix principal_submatrix(const SkewMatrix& a, std::span<const Index> rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.dim()) {
      throw InvalidInput("principal_submatrix: index " + std::to_string(rows[i]) +
                         " out of range for dimension " + std::to_string(a.dim()));
    }
    if (i > 0 && rows[i] <= rows[i - 1]) {
      throw InvalidInput("principal_submatrix: indices must be strictly increasing");
    }
  }
  const Index m = static_cast<Index>(rows.size());
  ComplexMatrix out(m, m);
  for (Index p = 0; p < m; ++p) {
    for (Index q = 0; q < m; ++q) out(p, q) = a.entries()(rows[p], rows[q]);
  }
  return SkewMatrix(out);
}

inline SkewMatrix principal_submatrix(const SkewMatrix& a, std::initializer_list<Index> rows) {
  const std::vector<Index> v(rows);
  return principal_submatrix(a, std::span<const Index>(v));
}

/// Block-diagonal direct sum.
inline SkewMatrix direct_sum(std::span<const SkewMatrix> blocks) {
  Index total = 0;
  for (const auto& b : blocks) total += b.dim();
  ComplexMatrix out = ComplexMatrix::Zero(total, total);
  Index off = 0;
  for (const auto& b : blocks) {
    out.block(off, off, b.dim(), b.dim()) = b.entries();
    off += b.dim();
  }
  return SkewMatrix(out);
}

}  // namespace fermiborn
