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

#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "fermiborn/error.hpp"
#include "fermiborn/flo.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/magic.hpp"

namespace fermiborn {

/// Product of Pauli Z over a set of measured variables. Empty means the identity.
class ZString {
 public:
  ZString() = default;
  explicit ZString(std::vector<Index> indices) : idx_(std::move(indices)) {
    for (std::size_t i = 0; i < idx_.size(); ++i) {
      if (idx_[i] < 0) throw InvalidInput("ZString: negative index");
      if (i > 0 && idx_[i] <= idx_[i - 1]) throw InvalidInput("ZString: indices must be strictly increasing");
    }
  }
  ZString(std::initializer_list<Index> indices) : ZString(std::vector<Index>(indices)) {}

  Index length() const noexcept { return static_cast<Index>(idx_.size()); }
  bool empty() const noexcept { return idx_.empty(); }
  const std::vector<Index>& indices() const noexcept { return idx_; }
  Index operator[](Index i) const { return idx_[static_cast<std::size_t>(i)]; }

  void check_range(Index n) const {
    if (!idx_.empty() && idx_.back() >= n) {
      throw InvalidInput("ZString: index " + std::to_string(idx_.back()) + " out of range for " +
                         std::to_string(n) + " variables");
    }
  }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t i = 0; i < idx_.size(); ++i) s += (i ? "," : "") + std::to_string(idx_[i]);
    return s + "}";
  }

  friend bool operator==(const ZString&, const ZString&) = default;
  friend auto operator<=>(const ZString& a, const ZString& b) {
    if (a.idx_.size() != b.idx_.size()) return a.idx_.size() <=> b.idx_.size();
    return a.idx_ <=> b.idx_;
  }

 private:
  std::vector<Index> idx_;
};

/// N four-mode registers; the first k modes of each register are measured.
struct FbmModel {
  MagicAngles magic;
  FloAnsatz ansatz;
  int k = 3;
  int m = 1;
  std::uint64_t seed = 0;
  std::int64_t epoch = 0;

  Index registers() const noexcept { return magic.registers(); }
  Index modes() const noexcept { return 4 * registers(); }
  Index variables() const noexcept { return registers() * k; }
  Index layers() const noexcept { return ansatz.layers(); }

  void validate() const {
    if (k + m != 4) throw InvalidInput("FbmModel: k + m must equal 4");
    if (k < 1) throw InvalidInput("FbmModel: k must be positive");
    if (registers() < 1) throw InvalidInput("FbmModel: need at least one register");
    if (ansatz.modes() != modes()) {
      throw InvalidInput("FbmModel: ansatz has " + std::to_string(ansatz.modes()) + " modes, expected " +
                         std::to_string(modes()));
    }
  }

  /// Random angles from a seeded generator: alpha first, then theta.
  static FbmModel random(Index registers, Index layers, std::uint64_t seed, int k = 3) {
    Rng rng(seed);
    FbmModel out;
    out.magic = MagicAngles::random(registers, rng);
    out.ansatz = FloAnsatz::random(4 * registers, layers, rng);
    out.k = k;
    out.m = 4 - k;
    out.seed = seed;
    out.validate();
    return out;
  }

  static FbmModel zeros(Index registers, Index layers, int k = 3) {
    FbmModel out;
    out.magic = MagicAngles::zeros(registers);
    out.ansatz = FloAnsatz::zeros(4 * registers, layers);
    out.k = k;
    out.m = 4 - k;
    out.validate();
    return out;
  }

  Index parameter_count() const noexcept { return registers() + static_cast<Index>(ansatz.angles().size()); }

  /// alpha, then theta layer-major.
  std::vector<double> parameters() const {
    std::vector<double> p = magic.values();
    p.insert(p.end(), ansatz.angles().begin(), ansatz.angles().end());
    return p;
  }

  void set_parameters(const std::vector<double>& p) {
    if (static_cast<Index>(p.size()) != parameter_count()) throw InvalidInput("FbmModel: parameter count mismatch");
    const auto nr = static_cast<std::ptrdiff_t>(registers());
    magic = MagicAngles(std::vector<double>(p.begin(), p.begin() + nr));
    ansatz = FloAnsatz(ansatz.modes(), ansatz.layers(), std::vector<double>(p.begin() + nr, p.end()));
  }
};

/// Mode measured as variable v: 4 floor(v/k) + v mod k.
inline Index mode_index(Index v, const FbmModel& model) {
  if (v < 0 || v >= model.variables()) {
    throw InvalidInput("mode_index: variable " + std::to_string(v) + " out of range");
  }
  return 4 * (v / model.k) + v % model.k;
}

}  // namespace fermiborn
