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

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace fermiborn {
namespace {

using fbtest::kPi;
using fbtest::kron;
using fbtest::pauli;

// Full 2^q x 2^q matrix of a gate, from Kronecker products.
ComplexMatrix dense_gate(const Gate& g, int q) {
  const cplx i1(0.0, 1.0);
  auto embed = [&](std::vector<std::pair<int, ComplexMatrix>> ops) {
    ComplexMatrix m = ComplexMatrix::Identity(1, 1);
    for (int k = 0; k < q; ++k) {
      ComplexMatrix f = pauli('I');
      for (auto& [where, op] : ops) {
        if (where == k) f = op;
      }
      m = kron(m, f);
    }
    return m;
  };
  const Index dim = Index{1} << q;
  const ComplexMatrix id = ComplexMatrix::Identity(dim, dim);
  const double c = std::cos(g.angle / 2);
  const double s = std::sin(g.angle / 2);
  switch (g.kind) {
    case GateKind::Ry: return c * id - i1 * s * embed({{g.q0, pauli('Y')}});
    case GateKind::Rz: return c * id - i1 * s * embed({{g.q0, pauli('Z')}});
    case GateKind::Rxx: return c * id - i1 * s * embed({{g.q0, pauli('X')}, {g.q1, pauli('X')}});
    case GateKind::H: return embed({{g.q0, (pauli('X') + pauli('Z')) / std::sqrt(2.0)}});
    case GateKind::Cnot: {
      ComplexMatrix p1(2, 2);
      p1 << 0, 0, 0, 1;
      const ComplexMatrix p0 = pauli('I') - p1;
      return embed({{g.q0, p0}}) + embed({{g.q0, p1}, {g.q1, pauli('X')}});
    }
    case GateKind::Measure: return id;
  }
  return id;
}

Eigen::VectorXcd dense_simulate(const GateList& gl) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(Index{1} << gl.qubits);
  psi(0) = 1.0;
  for (const Gate& g : gl.gates) psi = dense_gate(g, gl.qubits) * psi;
  return psi;
}

TEST(Simulate, EmptyCircuitIsVacuum) {
  const StateVector psi = simulate_circuit(GateList{3, {}}, 3);
  EXPECT_EQ(psi.amp[0], cplx(1.0));
  EXPECT_DOUBLE_EQ(psi.norm(), 1.0);
}

TEST(Simulate, PreparationIdentity) {
  const double a = 0.6;
  const StateVector psi = simulate_circuit(compile_input_prep(MagicAngles({a})), 4);
  for (std::size_t x = 0; x < 16; ++x) {
    const double expect = x == 0 ? std::cos(a) : x == 15 ? std::sin(a) : 0.0;
    EXPECT_NEAR(std::abs(psi.amp[x] - cplx(expect)), 0.0, 1e-15) << x;
  }
}

TEST(Simulate, RzLeavesProbabilitiesAlone) {
  GateList gl{1, {{GateKind::Ry, 0.8, 0, -1}}};
  const StateVector before = simulate_circuit(gl, 1);
  gl.gates.push_back({GateKind::Rz, 1.7, 0, -1});
  const StateVector after = simulate_circuit(gl, 1);
  for (std::size_t x = 0; x < 2; ++x) EXPECT_NEAR(std::norm(before.amp[x]), std::norm(after.amp[x]), 1e-15);
}

TEST(Simulate, MatchesDenseMatrices) {
  Rng rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    GateList gl{4, {}};
    for (int k = 0; k < 30; ++k) {
      const auto kind = static_cast<GateKind>(rng() % 5);
      const int q0 = static_cast<int>(rng() % 4);
      int q1 = -1;
      if (gate_arity(kind) == 2) {
        q1 = static_cast<int>(rng() % 3);
        if (q1 >= q0) ++q1;
      }
      gl.gates.push_back({kind, gate_is_parametrized(kind) ? kTwoPi * uniform01(rng) : 0.0, q0, q1});
    }
    const StateVector psi = simulate_circuit(gl, 4);
    const Eigen::VectorXcd ref = dense_simulate(gl);
    for (std::size_t x = 0; x < 16; ++x) EXPECT_LT(std::abs(psi.amp[x] - ref(static_cast<Index>(x))), 1e-13);
  }
}

TEST(ExactDistribution, IdentityAnsatzExamples) {
  FbmModel m = FbmModel::zeros(1, 1);
  m.magic = MagicAngles({kPi / 4});
  const Distribution d = exact_distribution(m);
  ASSERT_EQ(d.bits, 3);
  EXPECT_NEAR(d.p[0], 0.5, 1e-15);
  EXPECT_NEAR(d.p[7], 0.5, 1e-15);
  m.magic = MagicAngles({0.0});
  EXPECT_NEAR(exact_distribution(m).p[0], 1.0, 1e-15);
  m.magic = MagicAngles({kPi / 6});
  EXPECT_NEAR(exact_zstring(m, ZString{0}), 0.5, 1e-14);
  EXPECT_EQ(exact_zstring(m, ZString{}), 1.0);
}

TEST(ExactDistribution, NormalizedAndMarginalConsistent) {
  const FbmModel m = FbmModel::random(2, 2, 8);
  const Distribution full = full_distribution(m);
  const Distribution d = exact_distribution(m);
  EXPECT_NEAR(d.sum(), 1.0, 1e-10);
  for (double p : d.p) EXPECT_GE(p, 0.0);
  // Hidden modes are qubits 3 and 7.
  for (std::size_t y = 0; y < d.p.size(); ++y) {
    double s = 0.0;
    for (std::size_t x = 0; x < full.p.size(); ++x) {
      const std::size_t meas = ((x >> 5) & 7u) << 3 | ((x >> 1) & 7u);
      if (meas == y) s += full.p[x];
    }
    EXPECT_EQ(s, d.p[y]);
  }
}

TEST(ExactDistribution, RefusesLargeModels) {
  EXPECT_THROW(exact_distribution(FbmModel::zeros(5, 1)), Refusal);
}

TEST(Tvd, Examples) {
  const Distribution p{1, {0.5, 0.5}};
  const Distribution q{1, {1.0, 0.0}};
  EXPECT_EQ(tvd(p, p), 0.0);
  EXPECT_DOUBLE_EQ(tvd(p, q), 0.5);
  EXPECT_DOUBLE_EQ(tvd(q, Distribution{1, {0.0, 1.0}}), 1.0);
  EXPECT_THROW(tvd(p, Distribution{2, {1, 0, 0, 0}}), InvalidInput);
}

TEST(OracleIdentity, TwelveModes) {
  for (std::uint64_t seed = 100; seed < 104; ++seed) {
    const FbmModel m = FbmModel::random(3, 2, seed);
    const Distribution dist = exact_distribution(m);
    const auto strings = enumerate_zstrings(m.variables(), 1, 4);
    const auto vals = zstring_batch(m, strings);
    for (std::size_t i = 0; i < strings.size(); ++i) EXPECT_NEAR(vals[i], parity_expectation(dist, strings[i]), 1e-8);
  }
}

}  // namespace
}  // namespace fermiborn
