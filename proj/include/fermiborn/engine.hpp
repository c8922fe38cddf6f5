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

/// \file engine.hpp
/// \brief Exact Z-string expectation values of U(theta)|alpha>.
///
/// Each register state is rho_Gauss + sigma. Expanding the tensor product and
/// keeping at most floor(l/2) sigma factors is exact for a length-l string;
/// every sigma is a signed sum of five Gaussian operators, and the expectation
/// of a Z-string in a unit-trace Gaussian operator is the Pfaffian of the
/// evolved covariance restricted to the string's Majorana rows.

#pragma once

#include <cmath>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fermiborn/error.hpp"
#include "fermiborn/flo.hpp"
#include "fermiborn/linalg.hpp"
#include "fermiborn/magic.hpp"
#include "fermiborn/model.hpp"
#include "fermiborn/parallel.hpp"
#include "fermiborn/skewlin.hpp"

namespace fermiborn {

struct EngineOptions {
  int ell_max = 5;
  double imag_tol = 1e-9;
  unsigned workers = 0;
  /// Extra sigma orders beyond floor(l/2); they contribute nothing and exist for tests.
  int extra_orders = 0;
};

/// Value of one string and its derivatives with respect to alpha and to the
/// rows of O that the string reads.
struct StringGradient {
  double value = 1.0;
  std::vector<Index> rows;
  RealMatrix d_rows;
  std::vector<double> d_alpha;
};

class ExpectationEngine {
 public:
  ExpectationEngine(const FbmModel& model, EngineOptions options = {})
      : ExpectationEngine(model.magic, detail::build_orthogonal_raw(model.ansatz), model.k, options) {
    model.validate();
  }

  ExpectationEngine(const MagicAngles& magic, RealMatrix o, int k, EngineOptions options = {})
      : o_(std::move(o)), k_(k), n_reg_(magic.registers()), opt_(options) {
    if (o_.rows() != 8 * n_reg_ || o_.cols() != 8 * n_reg_) {
      throw InvalidInput("ExpectationEngine: O must be 8N x 8N");
    }
    if (k < 1 || k > 4) throw InvalidInput("ExpectationEngine: k must lie in [1, 4]");
    if (opt_.ell_max < 1) throw InvalidInput("ExpectationEngine: ell_max must be positive");
    cov_.resize(static_cast<std::size_t>(n_reg_ * 5));
    dcov_.resize(cov_.size());
    coef_.resize(cov_.size());
    dcoef_.resize(cov_.size());
    for (Index r = 0; r < n_reg_; ++r) {
      for (Component c : kComponents) {
        const auto i = slot(r, c);
        cov_[i] = component_covariance(magic[r], c);
        dcov_[i] = component_covariance_derivative(magic[r], c);
        coef_[i] = component_coeff(magic[r], c);
        dcoef_[i] = component_coeff_derivative(magic[r], c);
      }
    }
  }

  Index registers() const noexcept { return n_reg_; }
  Index variables() const noexcept { return n_reg_ * k_; }
  const RealMatrix& orthogonal() const noexcept { return o_; }
  const EngineOptions& options() const noexcept { return opt_; }

  /// Number of Pfaffians evaluated for one string at the given sigma order.
  static double term_count(Index registers, Index order) {
    double total = 0.0;
    double binom = 1.0;
    double five = 1.0;
    for (Index q = 0; q <= order && q <= registers; ++q) {
      total += binom * five;
      binom = binom * static_cast<double>(registers - q) / static_cast<double>(q + 1);
      five *= 5.0;
    }
    return total;
  }

  /// Majorana rows (2 mode, 2 mode + 1) of every variable in z.
  std::vector<Index> rows_of(const ZString& z) const {
    z.check_range(variables());
    std::vector<Index> rows;
    rows.reserve(static_cast<std::size_t>(2 * z.length()));
    for (Index v : z.indices()) {
      const Index mode = 4 * (v / k_) + v % k_;
      rows.push_back(2 * mode);
      rows.push_back(2 * mode + 1);
    }
    return rows;
  }

  double expectation(const ZString& z) const { return evaluate<false>(z, nullptr); }

  std::vector<double> batch(std::span<const ZString> strings) const {
    std::vector<double> out(strings.size());
    parallel_for(strings.size(), opt_.workers, [&](std::size_t i) { out[i] = evaluate<false>(strings[i], nullptr); });
    return out;
  }

  StringGradient gradient(const ZString& z) const {
    StringGradient g;
    g.value = evaluate<true>(z, &g);
    return g;
  }

  std::vector<StringGradient> batch_gradient(std::span<const ZString> strings) const {
    std::vector<StringGradient> out(strings.size());
    parallel_for(strings.size(), opt_.workers, [&](std::size_t i) { out[i].value = evaluate<true>(strings[i], &out[i]); });
    return out;
  }

 private:
  std::size_t slot(Index r, Component c) const { return static_cast<std::size_t>(r * 5 + static_cast<int>(c)); }

  void check_length(Index ell) const {
    if (ell <= opt_.ell_max && ell <= kMaxStringLength) return;
    std::ostringstream msg;
    msg << "Z-string of length " << ell << " exceeds ell_max = " << std::min(opt_.ell_max, kMaxStringLength)
        << "; it would need " << term_count(n_reg_, ell / 2) << " Pfaffian terms";
    throw Refusal(msg.str());
  }

  template <bool Grad>
  double evaluate(const ZString& z, StringGradient* g) const {
    const std::vector<Index> rows = rows_of(z);
    if (Grad) {
      g->rows = rows;
      g->d_alpha.assign(static_cast<std::size_t>(n_reg_), 0.0);
      g->d_rows = RealMatrix::Zero(static_cast<Index>(rows.size()), o_.cols());
    }
    if (z.empty()) return 1.0;
    check_length(z.length());
    const Index r = static_cast<Index>(rows.size());
    const Index order = std::min<Index>(n_reg_, z.length() / 2 + opt_.extra_orders);

    std::vector<SmallReal> proj(static_cast<std::size_t>(n_reg_));
    std::vector<SmallComplex> contrib(cov_.size());
    SmallComplex base = SmallComplex::Zero(r, r);
    for (Index k = 0; k < n_reg_; ++k) {
      SmallReal& a = proj[static_cast<std::size_t>(k)];
      a.resize(r, 8);
      for (Index i = 0; i < r; ++i) a.row(i) = o_.block(rows[static_cast<std::size_t>(i)], 8 * k, 1, 8);
      for (Component c : kComponents) {
        if (order == 0 && c != Component::Gauss) continue;
        contrib[slot(k, c)] = BlockContributionTable::contribution(a, cov_[slot(k, c)]);
      }
      base += contrib[slot(k, Component::Gauss)];
    }

    std::vector<SmallComplex> q_acc;
    SmallComplex q_all;
    SmallComplex pgrad;
    if (Grad) {
      q_acc.assign(cov_.size(), SmallComplex::Zero(r, r));
      q_all = SmallComplex::Zero(r, r);
    }

    cplx total = 0.0;
    std::vector<Index> idx;
    std::vector<int> choice;
    SmallComplex sigma;
    for (Index q = 0; q <= order; ++q) {
      idx.resize(static_cast<std::size_t>(q));
      for (Index t = 0; t < q; ++t) idx[static_cast<std::size_t>(t)] = t;
      while (true) {
        choice.assign(static_cast<std::size_t>(q), 0);
        while (true) {
          double coeff = 1.0;
          sigma = base;
          for (Index t = 0; t < q; ++t) {
            const auto ct = static_cast<Component>(choice[static_cast<std::size_t>(t)]);
            const Index reg = idx[static_cast<std::size_t>(t)];
            coeff *= coef_[slot(reg, ct)];
            if (ct != Component::Gauss) sigma += contrib[slot(reg, ct)] - contrib[slot(reg, Component::Gauss)];
          }
          cplx pf;
          if (Grad) {
            pf = pfaffian_with_gradient(sigma, pgrad);
            q_all += coeff * pgrad;
            for (Index t = 0; t < q; ++t) {
              const auto ct = static_cast<Component>(choice[static_cast<std::size_t>(t)]);
              const Index reg = idx[static_cast<std::size_t>(t)];
              if (ct != Component::Gauss) {
                q_acc[slot(reg, ct)] += coeff * pgrad;
                q_acc[slot(reg, Component::Gauss)] -= coeff * pgrad;
              }
              const double dn = dcoef_[slot(reg, ct)];
              if (dn != 0.0) {
                g->d_alpha[static_cast<std::size_t>(reg)] += (pf.real() * coeff / coef_[slot(reg, ct)]) * dn;
              }
            }
          } else {
            pf = detail::pfaffian_inplace(sigma);
          }
          total += coeff * pf;
          Index t = q - 1;
          while (t >= 0 && choice[static_cast<std::size_t>(t)] == 4) {
            choice[static_cast<std::size_t>(t)] = 0;
            --t;
          }
          if (t < 0) break;
          ++choice[static_cast<std::size_t>(t)];
        }
        Index t = q - 1;
        while (t >= 0 && idx[static_cast<std::size_t>(t)] == n_reg_ - q + t) --t;
        if (t < 0) break;
        ++idx[static_cast<std::size_t>(t)];
        for (Index u = t + 1; u < q; ++u) idx[static_cast<std::size_t>(u)] = idx[static_cast<std::size_t>(u - 1)] + 1;
      }
    }

    if (std::abs(total.imag()) > opt_.imag_tol) {
      std::ostringstream msg;
      msg << "imaginary residue " << total.imag() << " for Z-string " << z.to_string();
      throw NumericalError(msg.str());
    }

    if (Grad) {
      for (Index k = 0; k < n_reg_; ++k) {
        const SmallReal& a = proj[static_cast<std::size_t>(k)];
        q_acc[slot(k, Component::Gauss)] += q_all;
        Eigen::Matrix<double, Eigen::Dynamic, 8, Eigen::ColMajor, kMaxSmallDim, 8> da =
            Eigen::Matrix<double, Eigen::Dynamic, 8, Eigen::ColMajor, kMaxSmallDim, 8>::Zero(r, 8);
        double dalpha = 0.0;
        for (Component c : kComponents) {
          if (order == 0 && c != Component::Gauss) continue;
          const SmallComplex& qk = q_acc[slot(k, c)];
          const SmallComplex anti = qk.transpose() - qk;
          const Eigen::Matrix<cplx, Eigen::Dynamic, 8, Eigen::ColMajor, kMaxSmallDim, 8> ab =
              a.cast<cplx>() * cov_[slot(k, c)];
          da += (anti * ab).real();
          const Block8 inner = a.transpose().cast<cplx>() * qk * a.cast<cplx>();
          dalpha += inner.cwiseProduct(dcov_[slot(k, c)]).sum().real();
        }
        g->d_rows.block(0, 8 * k, r, 8) = da;
        g->d_alpha[static_cast<std::size_t>(k)] += dalpha;
      }
    }
    return total.real();
  }

  RealMatrix o_;
  int k_;
  Index n_reg_;
  EngineOptions opt_;
  std::vector<Block8> cov_;
  std::vector<Block8> dcov_;
  std::vector<double> coef_;
  std::vector<double> dcoef_;
};

/// Convenience wrapper over a throwaway engine.
inline double zstring_expectation(const FbmModel& model, const ZString& z, EngineOptions options = {}) {
  return ExpectationEngine(model, options).expectation(z);
}

inline std::vector<double> zstring_batch(const FbmModel& model, std::span<const ZString> strings,
                                         EngineOptions options = {}) {
  return ExpectationEngine(model, options).batch(strings);
}

}  // namespace fermiborn
