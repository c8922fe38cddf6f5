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

/// \file oracle.hpp
/// \brief Dense statevector reference for small models.
///
/// Amplitude index bit (d - 1 - q) holds qubit q, so qubit 0 is the most
/// significant bit. Distributions over measured variables use the same order.

#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "fermiborn/circuit.hpp"
#include "fermiborn/error.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/model.hpp"

namespace fermiborn {

/// Largest qubit count the dense simulator accepts.
inline constexpr int kOracleMaxQubits = 16;

struct StateVector {
  int qubits = 0;
  std::vector<cplx> amp;

  double norm() const {
    double s = 0.0;
    for (const cplx& a : amp) s += std::norm(a);
    return std::sqrt(s);
  }
};

struct Distribution {
  int bits = 0;
  std::vector<double> p;

  double sum() const {
    double s = 0.0;
    for (double x : p) s += x;
    return s;
  }
};

inline void check_oracle_size(int qubits) {
  if (qubits > kOracleMaxQubits) {
    throw Refusal("oracle: " + std::to_string(qubits) + " qubits exceed the dense limit of " +
                  std::to_string(kOracleMaxQubits));
  }
}

/// Applies one gate in place. Measurement is a no-op on the amplitudes.
inline void apply_gate(StateVector& psi, const Gate& g) {
  const int d = psi.qubits;
  const std::size_t dim = psi.amp.size();
  const std::size_t m0 = std::size_t{1} << (d - 1 - g.q0);
  switch (g.kind) {
    case GateKind::Measure: return;
    case GateKind::Ry: {
      const double c = std::cos(g.angle / 2);
      const double s = std::sin(g.angle / 2);
      for (std::size_t x = 0; x < dim; ++x) {
        if (x & m0) continue;
        const cplx a = psi.amp[x];
        const cplx b = psi.amp[x | m0];
        psi.amp[x] = c * a - s * b;
        psi.amp[x | m0] = s * a + c * b;
      }
      return;
    }
    case GateKind::Rz: {
      const cplx lo = std::polar(1.0, -g.angle / 2);
      const cplx hi = std::polar(1.0, g.angle / 2);
      for (std::size_t x = 0; x < dim; ++x) psi.amp[x] *= (x & m0) ? hi : lo;
      return;
    }
    case GateKind::H: {
      const double r = 1.0 / std::sqrt(2.0);
      for (std::size_t x = 0; x < dim; ++x) {
        if (x & m0) continue;
        const cplx a = psi.amp[x];
        const cplx b = psi.amp[x | m0];
        psi.amp[x] = r * (a + b);
        psi.amp[x | m0] = r * (a - b);
      }
      return;
    }
    case GateKind::Cnot: {
      const std::size_t mt = std::size_t{1} << (d - 1 - g.q1);
      for (std::size_t x = 0; x < dim; ++x) {
        if ((x & m0) && !(x & mt)) std::swap(psi.amp[x], psi.amp[x | mt]);
      }
      return;
    }
    case GateKind::Rxx: {
      const std::size_t m1 = std::size_t{1} << (d - 1 - g.q1);
      const std::size_t both = m0 | m1;
      const double c = std::cos(g.angle / 2);
      const cplx ms(0.0, -std::sin(g.angle / 2));
      for (std::size_t x = 0; x < dim; ++x) {
        const std::size_t y = x ^ both;
        if (y < x) continue;
        const cplx a = psi.amp[x];
        const cplx b = psi.amp[y];
        psi.amp[x] = c * a + ms * b;
        psi.amp[y] = ms * a + c * b;
      }
      return;
    }
  }
  throw InvalidInput("oracle: unknown gate");
}

/// Runs the gates on |0...0>.
inline StateVector simulate_circuit(const GateList& gates, int qubits) {
  check_oracle_size(qubits);
  if (qubits < 1) throw InvalidInput("oracle: need at least one qubit");
  for (const Gate& g : gates.gates) {
    if (g.q0 < 0 || g.q0 >= qubits || (gate_arity(g.kind) == 2 && (g.q1 < 0 || g.q1 >= qubits))) {
      throw InvalidInput("oracle: gate qubit out of range");
    }
  }
  StateVector psi{qubits, std::vector<cplx>(std::size_t{1} << qubits, cplx(0.0))};
  psi.amp[0] = 1.0;
  for (const Gate& g : gates.gates) apply_gate(psi, g);
  return psi;
}

/// Probabilities over all 4N modes.
inline Distribution full_distribution(const FbmModel& model) {
  check_oracle_size(static_cast<int>(model.modes()));
  const StateVector psi = simulate_circuit(compile_model(model, false), static_cast<int>(model.modes()));
  Distribution out{psi.qubits, std::vector<double>(psi.amp.size())};
  for (std::size_t x = 0; x < psi.amp.size(); ++x) out.p[x] = std::norm(psi.amp[x]);
  return out;
}

/// Sums the full distribution over hidden modes; variable 0 is the top bit.
inline Distribution marginalize(const Distribution& full, const FbmModel& model) {
  const int d = full.bits;
  const int n = static_cast<int>(model.variables());
  const std::vector<int> meas = measured_qubits(model);
  Distribution out{n, std::vector<double>(std::size_t{1} << n, 0.0)};
  for (std::size_t x = 0; x < full.p.size(); ++x) {
    std::size_t y = 0;
    for (int v = 0; v < n; ++v) y = (y << 1) | ((x >> (d - 1 - meas[static_cast<std::size_t>(v)])) & 1u);
    out.p[y] += full.p[x];
  }
  return out;
}

inline Distribution exact_distribution(const FbmModel& model) { return marginalize(full_distribution(model), model); }

/// E[(-1)^(sum of bits in z)] under a distribution over n variables.
inline double parity_expectation(const Distribution& dist, const ZString& z) {
  z.check_range(dist.bits);
  std::size_t mask = 0;
  for (Index v : z.indices()) mask |= std::size_t{1} << (dist.bits - 1 - v);
  double s = 0.0;
  for (std::size_t x = 0; x < dist.p.size(); ++x) s += (std::popcount(x & mask) % 2 ? -1.0 : 1.0) * dist.p[x];
  return s;
}

inline double exact_zstring(const FbmModel& model, const ZString& z) {
  if (z.empty()) return 1.0;
  return parity_expectation(exact_distribution(model), z);
}

/// Half the l1 distance.
inline double tvd(const Distribution& p, const Distribution& q) {
  if (p.p.size() != q.p.size()) throw InvalidInput("tvd: support sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < p.p.size(); ++i) s += std::abs(p.p[i] - q.p[i]);
  return 0.5 * s;
}

}  // namespace fermiborn
