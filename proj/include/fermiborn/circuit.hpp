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

/// \file circuit.hpp
/// \brief Gate lists for sampling on qubits, and their text formats.
///
/// Mode j is qubit j. Gate conventions: rz(l) = exp(-i l Z/2),
/// ry(l) = exp(-i l Y/2), rxx(l) = exp(-i l XX/2). A Givens rotation by t on
/// Majorana plane 2j becomes rz(-t) on qubit j, and on plane 2j+1 becomes
/// rxx(-t) on qubits (j, j+1).

#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fermiborn/error.hpp"
#include "fermiborn/flo.hpp"
#include "fermiborn/magic.hpp"
#include "fermiborn/model.hpp"

namespace fermiborn {

enum class GateKind { Ry, Rz, Rxx, Cnot, H, Measure };

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::Ry: return "ry";
    case GateKind::Rz: return "rz";
    case GateKind::Rxx: return "rxx";
    case GateKind::Cnot: return "cnot";
    case GateKind::H: return "h";
    case GateKind::Measure: return "measure";
  }
  return "?";
}

inline bool gate_is_parametrized(GateKind k) { return k == GateKind::Ry || k == GateKind::Rz || k == GateKind::Rxx; }
inline int gate_arity(GateKind k) { return (k == GateKind::Rxx || k == GateKind::Cnot) ? 2 : 1; }

inline GateKind gate_from_name(std::string_view name) {
  if (name == "ry") return GateKind::Ry;
  if (name == "rz") return GateKind::Rz;
  if (name == "rxx") return GateKind::Rxx;
  if (name == "cnot" || name == "cx") return GateKind::Cnot;
  if (name == "h") return GateKind::H;
  if (name == "measure") return GateKind::Measure;
  throw InvalidInput("unknown gate '" + std::string(name) + "'");
}

struct Gate {
  GateKind kind;
  double angle = 0.0;
  int q0 = 0;
  int q1 = -1;

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct GateList {
  int qubits = 0;
  std::vector<Gate> gates;

  friend bool operator==(const GateList&, const GateList&) = default;

  void validate() const {
    bool measuring = false;
    for (const Gate& g : gates) {
      if (g.q0 < 0 || g.q0 >= qubits) throw InvalidInput("GateList: qubit index out of range");
      if (gate_arity(g.kind) == 2) {
        if (g.q1 < 0 || g.q1 >= qubits || g.q1 == g.q0) throw InvalidInput("GateList: bad second qubit");
      }
      if (g.kind == GateKind::Measure) {
        measuring = true;
      } else if (measuring) {
        throw InvalidInput("GateList: gate after measurement");
      }
    }
  }

  std::size_t count(GateKind k) const {
    std::size_t c = 0;
    for (const Gate& g : gates) c += g.kind == k;
    return c;
  }

  void append(const GateList& other) { gates.insert(gates.end(), other.gates.begin(), other.gates.end()); }
};

/// ry(2 a_j) on qubit 4j, then the CNOT chain 4j -> 4j+1 -> 4j+2 -> 4j+3.
inline GateList compile_input_prep(const MagicAngles& magic) {
  GateList out;
  out.qubits = static_cast<int>(4 * magic.registers());
  for (Index j = 0; j < magic.registers(); ++j) {
    const int q = static_cast<int>(4 * j);
    out.gates.push_back({GateKind::Ry, 2.0 * magic[j], q, -1});
    for (int t = 0; t < 3; ++t) out.gates.push_back({GateKind::Cnot, 0.0, q + t, q + t + 1});
  }
  return out;
}

inline GateList compile_flo(const FloAnsatz& ansatz) {
  GateList out;
  out.qubits = static_cast<int>(ansatz.modes());
  const std::vector<Index> planes = brickwork_planes(ansatz.modes());
  for (Index l = 0; l < ansatz.layers(); ++l) {
    const auto layer = ansatz.layer(l);
    for (std::size_t i = 0; i < planes.size(); ++i) {
      const int j = static_cast<int>(planes[i] / 2);
      if (planes[i] % 2 == 0) {
        out.gates.push_back({GateKind::Rz, -layer[i], j, -1});
      } else {
        out.gates.push_back({GateKind::Rxx, -layer[i], j, j + 1});
      }
    }
  }
  return out;
}

/// Qubits read out as data variables, in variable order.
inline std::vector<int> measured_qubits(const FbmModel& model) {
  std::vector<int> q;
  for (Index v = 0; v < model.variables(); ++v) q.push_back(static_cast<int>(mode_index(v, model)));
  return q;
}

/// Preparation, FLO layers, then measurement of the measured modes.
inline GateList compile_model(const FbmModel& model, bool measure = true) {
  model.validate();
  GateList out = compile_input_prep(model.magic);
  out.append(compile_flo(model.ansatz));
  if (measure) {
    for (int q : measured_qubits(model)) out.gates.push_back({GateKind::Measure, 0.0, q, -1});
  }
  return out;
}

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError("bad number '" + std::string(s) + "'", line);
  }
  return v;
}

inline int parse_int(std::string_view s, int line) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("bad integer '" + std::string(s) + "'", line);
  }
  return v;
}

/// Native text format: `qubits <n>`, then `<name> [angle] <q0> [q1]` per gate.
inline std::string to_native(const GateList& gl) {
  std::string out = "qubits " + std::to_string(gl.qubits) + "\n";
  for (const Gate& g : gl.gates) {
    out += gate_name(g.kind);
    if (gate_is_parametrized(g.kind)) out += " " + format_double(g.angle);
    out += " " + std::to_string(g.q0);
    if (gate_arity(g.kind) == 2) out += " " + std::to_string(g.q1);
    out += "\n";
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t j = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > j) out.push_back(line.substr(j, i - j));
  }
  return out;
}

}  // namespace detail

inline GateList parse_native(std::string_view text) {
  GateList gl;
  bool header = false;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (!header) {
      if (tok.size() != 2 || tok[0] != "qubits") throw ParseError("expected 'qubits <n>'", lineno);
      gl.qubits = parse_int(tok[1], lineno);
      if (gl.qubits < 1) throw ParseError("qubit count must be positive", lineno);
      header = true;
      continue;
    }
    GateKind kind;
    try {
      kind = gate_from_name(tok[0]);
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), lineno);
    }
    const std::size_t want = 1 + (gate_is_parametrized(kind) ? 1 : 0) + static_cast<std::size_t>(gate_arity(kind));
    if (tok.size() != want) throw ParseError("wrong number of fields for " + std::string(tok[0]), lineno);
    Gate g{kind};
    std::size_t t = 1;
    if (gate_is_parametrized(kind)) g.angle = parse_double(tok[t++], lineno);
    g.q0 = parse_int(tok[t++], lineno);
    if (gate_arity(kind) == 2) g.q1 = parse_int(tok[t++], lineno);
    if (!gl.gates.empty() && gl.gates.back().kind == GateKind::Measure && kind != GateKind::Measure) {
      throw ParseError("gate after measurement", lineno);
    }
    gl.gates.push_back(g);
    try {
      GateList{gl.qubits, {g}}.validate();
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!header) throw ParseError("missing 'qubits' header", 0);
  try {
    gl.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(e.what(), 0);
  }
  return gl;
}

/// OpenQASM 2.0 with rxx written as h, h, cx, rz, cx, h, h.
inline std::string to_qasm(const GateList& gl) {
  std::ostringstream out;
  const std::size_t nmeas = gl.count(GateKind::Measure);
  out << "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";
  out << "qreg q[" << gl.qubits << "];\n";
  if (nmeas > 0) out << "creg c[" << nmeas << "];\n";
  std::size_t cbit = 0;
  for (const Gate& g : gl.gates) {
    const std::string a = "q[" + std::to_string(g.q0) + "]";
    const std::string b = "q[" + std::to_string(g.q1) + "]";
    switch (g.kind) {
      case GateKind::Ry: out << "ry(" << format_double(g.angle) << ") " << a << ";\n"; break;
      case GateKind::Rz: out << "rz(" << format_double(g.angle) << ") " << a << ";\n"; break;
      case GateKind::H: out << "h " << a << ";\n"; break;
      case GateKind::Cnot: out << "cx " << a << "," << b << ";\n"; break;
      case GateKind::Rxx:
        out << "h " << a << ";\nh " << b << ";\ncx " << a << "," << b << ";\n";
        out << "rz(" << format_double(g.angle) << ") " << b << ";\n";
        out << "cx " << a << "," << b << ";\nh " << a << ";\nh " << b << ";\n";
        break;
      case GateKind::Measure: out << "measure " << a << " -> c[" << cbit++ << "];\n"; break;
    }
  }
  return out.str();
}

/// Reads back the QASM subset written by to_qasm.
inline GateList parse_qasm(std::string_view text) {
  GateList gl;
  int lineno = 0;
  std::size_t pos = 0;
  auto qubit = [&](std::string_view s) {
    const auto l = s.find('[');
    const auto r = s.find(']');
    if (l == std::string_view::npos || r == std::string_view::npos || r < l) throw ParseError("bad qubit '" + std::string(s) + "'", lineno);
    return parse_int(s.substr(l + 1, r - l - 1), lineno);
  };
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (const auto c = line.find("//"); c != std::string_view::npos) line = line.substr(0, c);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty()) continue;
    if (line.back() != ';') throw ParseError("missing ';'", lineno);
    line.remove_suffix(1);
    if (line.starts_with("OPENQASM") || line.starts_with("include") || line.starts_with("creg")) continue;
    if (line.starts_with("qreg")) {
      gl.qubits = qubit(line.substr(4));
      continue;
    }
    std::string_view head = line.substr(0, line.find_first_of(" ("));
    double angle = 0.0;
    std::string_view rest = line.substr(head.size());
    if (!rest.empty() && rest.front() == '(') {
      const auto close = rest.find(')');
      if (close == std::string_view::npos) throw ParseError("unbalanced parenthesis", lineno);
      std::string_view num = rest.substr(1, close - 1);
      angle = parse_double(num, lineno);
      rest = rest.substr(close + 1);
    }
    if (head == "measure") {
      const auto arrow = rest.find("->");
      if (arrow == std::string_view::npos) throw ParseError("measure without target", lineno);
      gl.gates.push_back({GateKind::Measure, 0.0, qubit(rest.substr(0, arrow)), -1});
      continue;
    }
    GateKind kind;
    try {
      kind = gate_from_name(head);
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), lineno);
    }
    Gate g{kind, angle};
    const auto comma = rest.find(',');
    if (gate_arity(kind) == 2) {
      if (comma == std::string_view::npos) throw ParseError("two-qubit gate needs two operands", lineno);
      g.q0 = qubit(rest.substr(0, comma));
      g.q1 = qubit(rest.substr(comma + 1));
    } else {
      g.q0 = qubit(rest);
    }
    gl.gates.push_back(g);
  }
  try {
    gl.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(e.what(), 0);
  }
  return gl;
}

enum class ExportFormat { Native, OpenQasm2 };

inline std::string export_model(const FbmModel& model, ExportFormat format) {
  const GateList gl = compile_model(model, true);
  return format == ExportFormat::Native ? to_native(gl) : to_qasm(gl);
}

}  // namespace fermiborn
