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

// Independent reference code for the test suite. Nothing here calls into the
// library's numerical routines.

#pragma once

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fermiborn/fermiborn.hpp"

namespace fbtest {

using fermiborn::cplx;
using fermiborn::ComplexMatrix;
using fermiborn::Index;
using fermiborn::RealMatrix;

inline constexpr double kPi = std::numbers::pi;

/// Uniform entries in [-1, 1] + i[-1, 1], antisymmetrized.
inline ComplexMatrix random_skew(Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexMatrix a = ComplexMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      a(i, j) = cplx(u(rng), u(rng));
      a(j, i) = -a(i, j);
    }
  }
  return a;
}

/// Pfaffian by expansion along the first row. Exponential; n <= 10 only.
inline cplx pfaffian_expand(const ComplexMatrix& a) {
  const Index n = a.rows();
  if (n == 0) return 1.0;
  if (n % 2) return 0.0;
  cplx total = 0.0;
  for (Index j = 1; j < n; ++j) {
    if (a(0, j) == cplx(0.0)) continue;
    std::vector<Index> keep;
    for (Index r = 1; r < n; ++r) {
      if (r != j) keep.push_back(r);
    }
    ComplexMatrix sub(n - 2, n - 2);
    for (Index p = 0; p < n - 2; ++p) {
      for (Index q = 0; q < n - 2; ++q) sub(p, q) = a(keep[static_cast<std::size_t>(p)], keep[static_cast<std::size_t>(q)]);
    }
    const double sign = (j % 2) ? 1.0 : -1.0;
    total += sign * a(0, j) * pfaffian_expand(sub);
  }
  return total;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline ComplexMatrix pauli(char p) {
  ComplexMatrix m(2, 2);
  const cplx i1(0.0, 1.0);
  switch (p) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i1, i1, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
  }
  return m;
}

/// Jordan-Wigner Majoranas on `modes` qubits, qubit 0 the most significant
/// tensor factor: m_{2j} = Z..Z X_j, m_{2j+1} = Z..Z Y_j.
inline std::vector<ComplexMatrix> majoranas(int modes) {
  std::vector<ComplexMatrix> out;
  for (int j = 0; j < modes; ++j) {
    for (char t : {'X', 'Y'}) {
      ComplexMatrix m = ComplexMatrix::Identity(1, 1);
      for (int q = 0; q < modes; ++q) m = kron(m, pauli(q < j ? 'Z' : q == j ? t : 'I'));
      out.push_back(m);
    }
  }
  return out;
}

/// Basis vector |b_0 b_1 ...> with b_0 the most significant bit.
inline Eigen::VectorXcd basis_ket(std::initializer_list<int> bits) {
  std::size_t idx = 0;
  for (int b : bits) idx = (idx << 1) | static_cast<std::size_t>(b);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Index>(std::size_t{1} << bits.size()));
  v(static_cast<Index>(idx)) = 1.0;
  return v;
}

/// -i Tr[m_p m_q rho] for p != q.
inline ComplexMatrix second_moments(const ComplexMatrix& rho, const std::vector<ComplexMatrix>& m) {
  const auto n = static_cast<Index>(m.size());
  ComplexMatrix s = ComplexMatrix::Zero(n, n);
  const cplx mi(0.0, -1.0);
  for (Index p = 0; p < n; ++p) {
    for (Index q = 0; q < n; ++q) {
      if (p != q) s(p, q) = mi * (m[static_cast<std::size_t>(p)] * m[static_cast<std::size_t>(q)] * rho).trace();
    }
  }
  return s;
}

/// Unit-trace Gaussian operator with covariance `cov`, built from Wick's
/// theorem over all even Majorana monomials.
inline ComplexMatrix gaussian_operator(const ComplexMatrix& cov, const std::vector<ComplexMatrix>& m) {
  const auto n = static_cast<int>(m.size());
  const Index dim = m[0].rows();
  ComplexMatrix rho = ComplexMatrix::Zero(dim, dim);
  const cplx mi(0.0, -1.0);
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    const int k2 = std::popcount(mask);
    if (k2 % 2) continue;
    std::vector<Index> idx;
    ComplexMatrix mono = ComplexMatrix::Identity(dim, dim);
    for (int p = 0; p < n; ++p) {
      if (mask & (1u << p)) {
        idx.push_back(p);
        mono = mono * m[static_cast<std::size_t>(p)];
      }
    }
    ComplexMatrix sub(k2, k2);
    for (int a = 0; a < k2; ++a) {
      for (int b = 0; b < k2; ++b) sub(a, b) = cov(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    rho += std::pow(mi, k2 / 2) * pfaffian_expand(sub) * mono;
  }
  return rho / static_cast<double>(dim);
}

/// The states of the magic decomposition: |Phi0> = cos a |0000> + |1100>,
/// |Phi1> = sin a |1111> - |1100>.
struct MagicFixture {
  Eigen::VectorXcd phi0;
  Eigen::VectorXcd phi1;
  Eigen::VectorXcd alpha_ket;

  explicit MagicFixture(double a) {
    const Eigen::VectorXcd chi = basis_ket({1, 1, 0, 0});
    phi0 = std::cos(a) * basis_ket({0, 0, 0, 0}) + chi;
    phi1 = std::sin(a) * basis_ket({1, 1, 1, 1}) - chi;
    alpha_ket = phi0 + phi1;
  }

  /// |Phi_a><Phi_b| / <Phi_b|Phi_a>.
  ComplexMatrix rho(int a, int b) const {
    const Eigen::VectorXcd& x = a ? phi1 : phi0;
    const Eigen::VectorXcd& y = b ? phi1 : phi0;
    return (x * y.adjoint()) / y.dot(x);
  }
};

/// Central finite difference of f at x along coordinate i.
template <typename F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double fp = f(x);
  x[i] = x0 - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

/// Dense 2^n joint of a grid Markov network: every clique factor multiplied
/// explicitly, then normalized.
inline std::vector<double> grid_joint_bruteforce(int rows, int cols, const std::vector<std::array<double, 16>>& lf) {
  const int n = rows * cols;
  std::vector<double> p(std::size_t{1} << n);
  double z = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) {
    std::vector<int> cell(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) cell[static_cast<std::size_t>(v)] = static_cast<int>((x >> (n - 1 - v)) & 1u);
    double prod = 1.0;
    int clique = 0;
    for (int r = 0; r + 1 < rows; ++r) {
      for (int c = 0; c + 1 < cols; ++c, ++clique) {
        const int tl = cell[static_cast<std::size_t>(r * cols + c)];
        const int tr = cell[static_cast<std::size_t>(r * cols + c + 1)];
        const int bl = cell[static_cast<std::size_t>((r + 1) * cols + c)];
        const int br = cell[static_cast<std::size_t>((r + 1) * cols + c + 1)];
        prod *= std::exp(lf[static_cast<std::size_t>(clique)][static_cast<std::size_t>(8 * tl + 4 * tr + 2 * bl + br)]);
      }
    }
    p[x] = prod;
    z += prod;
  }
  for (double& v : p) v /= z;
  return p;
}

/// Binomial(n, p) pmf.
inline double binomial_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log1p(-p));
}

/// Upper tail of the chi-square distribution via the regularized gamma
/// function Q(k/2, x/2), by series / continued fraction.
inline double chi_square_sf(double x, int dof) {
  const double a = 0.5 * dof;
  const double z = 0.5 * x;
  if (z <= 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (z < a + 1.0) {
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < 500; ++n) {
      term *= z / (a + n);
      sum += term;
      if (term < sum * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-z + a * std::log(z) - lg);
  }
  double b = z + 1.0 - a;
  double c = 1e300;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    d = 1.0 / d;
    c = b + an / c;
    h *= d * c;
    if (std::abs(d * c - 1.0) < 1e-15) break;
  }
  return std::exp(-z + a * std::log(z) - lg) * h;
}

}  // namespace fbtest
