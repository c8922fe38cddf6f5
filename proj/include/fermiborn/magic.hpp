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

/// \file magic.hpp
/// \brief The register state cos a |0000> + sin a |1111> and its Gaussian decomposition.
///
/// With Phi0 = cos a |0000> + |1100> and Phi1 = sin a |1111> - |1100>, the
/// register density matrix is
///   |a><a| = N00 rho00 + N11 rho11 + N01 rho01 + N10 rho10,
///   rho_ij = |Phi_i><Phi_j| / <Phi_j|Phi_i>,
/// where every rho_ij is a unit-trace Gaussian operator. Subtracting the
/// Gaussian state with the same second moments leaves sigma(a), which has
/// vanishing trace and second moments.

#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fermiborn/error.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/skewlin.hpp"

namespace fermiborn {

using Block8 = Eigen::Matrix<cplx, 8, 8>;

enum class Component { Gauss = 0, C00 = 1, C11 = 2, C01 = 3, C10 = 4 };
inline constexpr std::array<Component, 5> kComponents = {Component::Gauss, Component::C00, Component::C11,
                                                          Component::C01, Component::C10};

inline const char* component_label(Component c) {
  switch (c) {
    case Component::Gauss: return "Gauss";
    case Component::C00: return "00";
    case Component::C11: return "11";
    case Component::C01: return "01";
    case Component::C10: return "10";
  }
  return "?";
}

/// Per-register angles, canonically reduced to [0, 2pi).
class MagicAngles {
 public:
  MagicAngles() = default;
  explicit MagicAngles(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    for (double& a : alpha_) a = reduce(a);
  }

  static MagicAngles zeros(Index registers) { return MagicAngles(std::vector<double>(static_cast<std::size_t>(registers), 0.0)); }
  static MagicAngles random(Index registers, Rng& rng) {
    std::vector<double> a(static_cast<std::size_t>(registers));
    for (double& x : a) x = kTwoPi * uniform01(rng);
    return MagicAngles(std::move(a));
  }

  static double reduce(double a) {
    if (!std::isfinite(a)) throw InvalidInput("MagicAngles: non-finite angle");
    double r = std::fmod(a, kTwoPi);
    if (r < 0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
  }

  Index registers() const noexcept { return static_cast<Index>(alpha_.size()); }
  double operator[](Index j) const { return alpha_[static_cast<std::size_t>(j)]; }
  const std::vector<double>& values() const noexcept { return alpha_; }

 private:
  std::vector<double> alpha_;
};

namespace detail {

inline void set_skew(Block8& m, int p, int q, cplx v) {
  m(p, q) = v;
  m(q, p) = -v;
}

/// Covariance block of component c, or its derivative in alpha when `deriv`.
inline Block8 component_block(double alpha, Component c, bool deriv) {
  const double co = std::cos(alpha);
  const double si = std::sin(alpha);
  const cplx i1(0.0, 1.0);
  Block8 m = Block8::Zero();
  switch (c) {
    case Component::Gauss: {
      const double v = deriv ? -2.0 * std::sin(2.0 * alpha) : std::cos(2.0 * alpha);
      for (int j = 0; j < 4; ++j) set_skew(m, 2 * j, 2 * j + 1, v);
      break;
    }
    case Component::C00: {
      const double den = 1.0 + co * co;
      const double diag = deriv ? -2.0 * std::sin(2.0 * alpha) / (den * den) : -si * si / den;
      const double off = deriv ? -2.0 * si * si * si / (den * den) : 2.0 * co / den;
      set_skew(m, 0, 1, diag);
      set_skew(m, 0, 3, off);
      set_skew(m, 1, 2, off);
      set_skew(m, 2, 3, diag);
      set_skew(m, 4, 5, deriv ? 0.0 : 1.0);
      set_skew(m, 6, 7, deriv ? 0.0 : 1.0);
      break;
    }
    case Component::C11: {
      const double den = 1.0 + si * si;
      const double diag = deriv ? -2.0 * std::sin(2.0 * alpha) / (den * den) : co * co / den;
      const double off = deriv ? -2.0 * co * co * co / (den * den) : -2.0 * si / den;
      set_skew(m, 0, 1, deriv ? 0.0 : -1.0);
      set_skew(m, 2, 3, deriv ? 0.0 : -1.0);
      set_skew(m, 4, 5, diag);
      set_skew(m, 4, 7, off);
      set_skew(m, 5, 6, off);
      set_skew(m, 6, 7, diag);
      break;
    }
    case Component::C01:
    case Component::C10: {
      // d/da: c -> -s, s -> c.
      const double cc = deriv ? -si : co;
      const double ss = deriv ? co : si;
      const double one = deriv ? 0.0 : 1.0;
      set_skew(m, 0, 1, -one);
      set_skew(m, 0, 2, -i1 * cc);
      set_skew(m, 0, 3, cc);
      set_skew(m, 1, 2, cc);
      set_skew(m, 1, 3, i1 * cc);
      set_skew(m, 2, 3, -one);
      set_skew(m, 4, 5, one);
      set_skew(m, 4, 6, i1 * ss);
      set_skew(m, 4, 7, -ss);
      set_skew(m, 5, 6, -ss);
      set_skew(m, 5, 7, -i1 * ss);
      set_skew(m, 6, 7, one);
      if (c == Component::C10) m = m.conjugate().eval();
      break;
    }
  }
  return m;
}

inline Component component_from_bits(int a, int b) {
  if ((a != 0 && a != 1) || (b != 0 && b != 1)) throw InvalidInput("component bits must be 0 or 1");
  if (a == b) return a == 0 ? Component::C00 : Component::C11;
  return a == 0 ? Component::C01 : Component::C10;
}

}  // namespace detail

/// Covariance of the Gaussian state sharing |a><a|'s second moments.
inline SkewMatrix sigma_gauss(double alpha) {
  return SkewMatrix(ComplexMatrix(detail::component_block(alpha, Component::Gauss, false)));
}

/// Covariance of rho_ab(alpha). Sigma_10 is the elementwise conjugate of Sigma_01.
inline SkewMatrix sigma_component(double alpha, int a, int b) {
  return SkewMatrix(ComplexMatrix(detail::component_block(alpha, detail::component_from_bits(a, b), false)));
}

/// Weight of component c in sigma(alpha); Gauss carries -1.
inline double component_coeff(double alpha, Component c) {
  switch (c) {
    case Component::Gauss: return -1.0;
    case Component::C00: return std::cos(alpha) * std::cos(alpha) + 1.0;
    case Component::C11: return std::sin(alpha) * std::sin(alpha) + 1.0;
    case Component::C01:
    case Component::C10: return -1.0;
  }
  return 0.0;
}

inline double component_coeff_derivative(double alpha, Component c) {
  switch (c) {
    case Component::C00: return -std::sin(2.0 * alpha);
    case Component::C11: return std::sin(2.0 * alpha);
    default: return 0.0;
  }
}

/// N_ab(alpha) in |a><a| = sum_ab N_ab rho_ab.
inline double norm_coeff(double alpha, int a, int b) { return component_coeff(alpha, detail::component_from_bits(a, b)); }

/// Covariance block for component c (Gauss included) as a fixed-size matrix.
inline Block8 component_covariance(double alpha, Component c) { return detail::component_block(alpha, c, false); }
inline Block8 component_covariance_derivative(double alpha, Component c) { return detail::component_block(alpha, c, true); }

struct GaussianComponent {
  Component label;
  double coeff;
  SkewMatrix cov;
};

/// The five signed Gaussian terms of sigma(alpha) = |alpha><alpha| - rho_Gauss(alpha).
inline std::array<GaussianComponent, 5> sigma_expansion(double alpha) {
  std::array<GaussianComponent, 5> out;
  for (std::size_t i = 0; i < kComponents.size(); ++i) {
    const Component c = kComponents[i];
    out[i] = GaussianComponent{c, component_coeff(alpha, c), SkewMatrix(ComplexMatrix(component_covariance(alpha, c)))};
  }
  return out;
}

}  // namespace fermiborn
