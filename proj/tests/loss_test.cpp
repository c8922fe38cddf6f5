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

#include <map>

#include "test_support.hpp"

namespace fermiborn {
namespace {

BitDataset rows_of(std::initializer_list<const char*> rows) {
  std::string text;
  for (const char* r : rows) text += std::string(r) + "\n";
  return parse_dataset(text);
}

TEST(KernelWeight, ClosedForm) {
  EXPECT_NEAR(p_sigma(0.5), 0.5 * (1.0 - std::exp(-1.0)), 1e-16);
  EXPECT_NEAR(p_sigma(0.5), 0.3160603, 1e-7);
  EXPECT_NEAR(kernel_weight(2.0, 0, 7), std::pow(1.0 - p_sigma(2.0), 7), 1e-16);
  for (Index n = 1; n <= 12; ++n) {
    double total = 0.0;
    for (unsigned mask = 0; mask < (1u << n); ++mask) total += kernel_weight(0.8, std::popcount(mask), n);
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(EnumerateStrings, CountsAndOrder) {
  const auto s = enumerate_zstrings(5, 1, 3);
  EXPECT_EQ(s.size(), 5u + 10u + 10u);
  EXPECT_EQ(s.front(), ZString{0});
  EXPECT_EQ(s[5], (ZString{0, 1}));
  EXPECT_EQ(s.back(), (ZString{2, 3, 4}));
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
}

TEST(SampleStrings, LengthHistogramIsTruncatedBinomial) {
  const int n = 10;
  KernelSpec spec;
  spec.sigma = 0.5;
  spec.ell_max = n;
  spec.n_ops = 20000;
  const auto strings = sample_zstrings(spec, n, std::uint64_t{99});
  std::vector<double> count(n + 1, 0.0);
  for (const auto& z : strings) count[static_cast<std::size_t>(z.length())] += 1.0;
  EXPECT_EQ(count[0], 0.0);
  const double p = p_sigma(spec.sigma);
  const double norm = 1.0 - fbtest::binomial_pmf(n, 0, p);
  // Pool the sparse upper tail into one bin.
  double chi2 = 0.0;
  int bins = 0;
  double obs_tail = 0.0;
  double exp_tail = 0.0;
  for (int k = 1; k <= n; ++k) {
    const double e = spec.n_ops * fbtest::binomial_pmf(n, k, p) / norm;
    if (e >= 20.0) {
      chi2 += (count[static_cast<std::size_t>(k)] - e) * (count[static_cast<std::size_t>(k)] - e) / e;
      ++bins;
    } else {
      obs_tail += count[static_cast<std::size_t>(k)];
      exp_tail += e;
    }
  }
  chi2 += (obs_tail - exp_tail) * (obs_tail - exp_tail) / exp_tail;
  ++bins;
  EXPECT_GT(fbtest::chi_square_sf(chi2, bins - 1), 0.01) << "chi2=" << chi2;
}

TEST(SampleStrings, SingletonCutoffIsUniform) {
  KernelSpec spec;
  spec.sigma = 1.0;
  spec.ell_max = 1;
  spec.n_ops = 6000;
  const auto strings = sample_zstrings(spec, 6, std::uint64_t{5});
  std::vector<int> count(6, 0);
  for (const auto& z : strings) {
    ASSERT_EQ(z.length(), 1);
    ++count[static_cast<std::size_t>(z[0])];
  }
  // 1000 expected per variable, sd about 29.
  for (int c : count) EXPECT_NEAR(c, 1000, 150);
}

TEST(SampleStrings, DeterministicPerSeed) {
  KernelSpec spec;
  spec.sigma = 2.0;
  spec.ell_max = 3;
  spec.n_ops = 300;
  EXPECT_EQ(sample_zstrings(spec, 12, std::uint64_t{4}), sample_zstrings(spec, 12, std::uint64_t{4}));
  EXPECT_NE(sample_zstrings(spec, 12, std::uint64_t{4}), sample_zstrings(spec, 12, std::uint64_t{5}));
}

TEST(SampleStrings, PathologicalBandwidthFails) {
  KernelSpec spec;
  spec.sigma = 1e-4;  // p is about 0.5, so length <= 1 out of 60 is essentially impossible
  spec.ell_max = 1;
  spec.n_ops = 1;
  EXPECT_THROW(sample_zstrings(spec, 60, std::uint64_t{1}), SamplingFailure);
}

TEST(KernelSpec, Validation) {
  KernelSpec s;
  s.sigma = -1.0;
  EXPECT_THROW(s.validate(4), InvalidInput);
  s.sigma = 1.0;
  s.ell_max = 5;
  EXPECT_THROW(s.validate(4), InvalidInput);
  s.ell_max = 2;
  s.n_ops = 0;
  EXPECT_THROW(s.validate(4), InvalidInput);
}

TEST(StringGroup, DeduplicatesWithMultiplicity) {
  KernelSpec spec;
  spec.sigma = 0.3;
  spec.ell_max = 1;
  spec.n_ops = 50;
  Rng rng(8);
  const StringGroup g = make_string_group(spec, 3, rng);
  EXPECT_LE(g.strings.size(), 3u);
  double total = 0.0;
  for (double w : g.weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-15);
  Rng again(8);
  std::map<ZString, int> counts;
  for (const auto& z : sample_zstrings(spec, 3, again)) ++counts[z];
  for (std::size_t i = 0; i < g.strings.size(); ++i) EXPECT_DOUBLE_EQ(g.weights[i], counts[g.strings[i]] / 50.0);
}

TEST(StringGroup, LinearUsesEverySingleton) {
  KernelSpec spec;
  spec.kind = KernelKind::Linear;
  Rng rng(0);
  const StringGroup g = make_string_group(spec, 4, rng);
  EXPECT_EQ(g.strings, enumerate_zstrings(4, 1, 1));
  for (double w : g.weights) EXPECT_EQ(w, 1.0);
}

TEST(TargetExpectations, Examples) {
  const BitDataset d = rows_of({"00", "01", "11"});
  const std::vector<ZString> z{ZString{0}, ZString{0, 1}, ZString{1}};
  const auto t = target_expectations(d, z);
  EXPECT_DOUBLE_EQ(t[0], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(t[1], 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(t[2], -1.0 / 3.0);
  const auto zeros = target_expectations(rows_of({"000", "000"}), enumerate_zstrings(3, 1, 3));
  for (double v : zeros) EXPECT_EQ(v, 1.0);
  EXPECT_THROW(target_expectations(BitDataset(3), z), InvalidInput);
}

TEST(Mmd2, Examples) {
  KernelSpec spec;
  StringGroup g{spec, {ZString{0}, ZString{1}}, {0.5, 0.5}};
  const std::vector<StringGroup> groups{g};
  const std::vector<double> a{0.3, -0.1};
  EXPECT_EQ(mmd2_estimate(a, a, groups).value, 0.0);
  const std::vector<double> b{0.5, -0.3};
  const LossEstimate e = mmd2_estimate(a, b, groups);
  EXPECT_NEAR(e.value, 0.04, 1e-15);
  ASSERT_EQ(e.per_bandwidth.size(), 1u);
  EXPECT_EQ(e.squared_differences.size(), 2u);
  EXPECT_THROW(mmd2_estimate(a, std::vector<double>{1.0}, groups), InvalidInput);
}

TEST(Mmd2, MeanOverBandwidthsAndLinearKernel) {
  KernelSpec lin;
  lin.kind = KernelKind::Linear;
  Rng rng(1);
  const StringGroup gl = make_string_group(lin, 3, rng);
  KernelSpec gs;
  gs.sigma = 1.0;
  StringGroup gg{gs, {ZString{0, 1}}, {1.0}};
  const std::vector<StringGroup> groups{gl, gg};
  const std::vector<double> t{0.1, 0.2, 0.3, 0.4};
  const std::vector<double> m{0.0, 0.0, 0.0, 0.0};
  const LossEstimate e = mmd2_estimate(t, m, groups);
  EXPECT_NEAR(e.per_bandwidth[0].second, 0.01 + 0.04 + 0.09, 1e-15);
  EXPECT_NEAR(e.per_bandwidth[1].second, 0.16, 1e-15);
  EXPECT_NEAR(e.value, 0.5 * (0.14 + 0.16), 1e-15);
}

TEST(Mmd2, SampledEstimateIsCalibrated) {
  const FbmModel model = FbmModel::random(2, 1, 3);
  const int n = 6;
  BitDataset data(n);
  Rng drng(2);
  for (int r = 0; r < 200; ++r) {
    std::vector<std::uint8_t> row(n);
    for (auto& b : row) b = uniform01(drng) < 0.3 ? 1 : 0;
    data.push_back(row);
  }
  KernelSpec spec;
  spec.sigma = 1.0;
  spec.ell_max = 4;
  spec.n_ops = 400;
  spec.enumerate = true;
  Rng rng(0);
  const std::vector<StringGroup> exact{make_string_group(spec, n, rng)};
  const auto all = flatten_strings(exact);
  const auto tv = target_expectations(data, all);
  const auto mv = zstring_batch(model, all);
  const double truth = mmd2_estimate(tv, mv, exact).value;
  // Per-string variance of the squared difference under the truncated law.
  double second = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) second += exact[0].weights[i] * std::pow(tv[i] - mv[i], 4);
  const double se = std::sqrt((second - truth * truth) / spec.n_ops);
  spec.enumerate = false;
  Rng srng(17);
  const std::vector<StringGroup> sampled{make_string_group(spec, n, srng)};
  const auto s_all = flatten_strings(sampled);
  const double est = mmd2_estimate(target_expectations(data, s_all), zstring_batch(model, s_all), sampled).value;
  EXPECT_LT(std::abs(est - truth), 3.0 * se) << "truth " << truth << " est " << est << " se " << se;
}

TEST(MedianHeuristic, Examples) {
  EXPECT_EQ(median_of({1.0, 4.0, 9.0}), 4.0);
  Rng rng(0);
  // Distances 1, 3, 2.
  const auto [lo, hi] = median_heuristic(rows_of({"000", "001", "111"}), 1000, rng);
  EXPECT_EQ(hi, 2.0);
  EXPECT_EQ(lo, 1.0);
  EXPECT_THROW(median_heuristic(rows_of({"0101", "0101"}), 1000, rng), InvalidInput);
  const BitDataset base = rows_of({"0000", "0011", "0111", "1111", "1000"});
  BitDataset twice = base;
  for (Index r = 0; r < base.rows(); ++r) twice.push_back(std::vector<std::uint8_t>(base.row(r), base.row(r) + 4));
  EXPECT_EQ(median_heuristic(base, 1000, rng), median_heuristic(twice, 1000, rng));
}

}  // namespace
}  // namespace fermiborn
