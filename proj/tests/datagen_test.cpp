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

#include <filesystem>

#include "test_support.hpp"

namespace fermiborn {
namespace {

TEST(GridMN, CliqueCounts) {
  EXPECT_EQ(grid_mn_generate(3, 4, 1).cliques(), 6);
  EXPECT_EQ(grid_mn_generate(2, 2, 1).cliques(), 1);
  EXPECT_THROW(grid_mn_generate(4, 6, 1), Refusal);
  EXPECT_THROW(grid_mn_generate(1, 4, 1), InvalidInput);
}

TEST(GridMN, SingleCliqueIsItsFactor) {
  const GridMN mn = grid_mn_generate(2, 2, 7);
  double z = 0.0;
  for (double f : mn.log_factors[0]) z += std::exp(f);
  for (std::size_t x = 0; x < 16; ++x) EXPECT_NEAR(mn.joint[x], std::exp(mn.log_factors[0][x]) / z, 1e-15);
}

TEST(GridMN, ZeroFactorsGiveUniformJoint) {
  const GridMN mn = grid_mn_from_factors(3, 3, std::vector<std::array<double, 16>>(4));
  for (double p : mn.joint) EXPECT_NEAR(p, 1.0 / 512.0, 1e-16);
}

TEST(GridMN, JointMatchesBruteForceProduct) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const GridMN mn = grid_mn_generate(3, 4, seed);
    const auto ref = fbtest::grid_joint_bruteforce(3, 4, mn.log_factors);
    double total = 0.0;
    for (std::size_t x = 0; x < ref.size(); ++x) {
      EXPECT_NEAR(mn.joint[x], ref[x], 1e-12);
      total += mn.joint[x];
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(GridMN, SamplingExamples) {
  const GridMN uni = grid_mn_from_factors(2, 3, std::vector<std::array<double, 16>>(2));
  const BitDataset d = mn_sample(uni, 100000, 3);
  for (Index v = 0; v < 6; ++v) {
    double mean = 0.0;
    for (Index r = 0; r < d.rows(); ++r) mean += d(r, v);
    mean /= static_cast<double>(d.rows());
    EXPECT_GE(mean, 0.49);
    EXPECT_LE(mean, 0.51);
  }
  std::vector<std::array<double, 16>> spike(1);
  spike[0][9] = 800.0;
  const BitDataset point = mn_sample(grid_mn_from_factors(2, 2, spike), 100, 1);
  for (Index r = 0; r < point.rows(); ++r) EXPECT_EQ(point.row_index(r), 9u);
  const GridMN mn = grid_mn_generate(3, 4, 5);
  EXPECT_EQ(mn_sample(mn, 50, 8), mn_sample(mn, 50, 8));
}

TEST(Life, StillLifeAndUnderpopulation) {
  std::vector<std::uint8_t> block(16, 0);
  for (int c : {5, 6, 9, 10}) block[static_cast<std::size_t>(c)] = 1;
  EXPECT_EQ(life_evolve(block, 4, 4, 37), block);
  std::vector<std::uint8_t> lone(16, 0);
  lone[5] = 1;
  EXPECT_EQ(life_step(lone, 4, 4), std::vector<std::uint8_t>(16, 0));
  // Blinker against the dead boundary.
  std::vector<std::uint8_t> blinker(9, 0);
  for (int c : {3, 4, 5}) blinker[static_cast<std::size_t>(c)] = 1;
  const auto next = life_step(blinker, 3, 3);
  EXPECT_EQ(next, (std::vector<std::uint8_t>{0, 1, 0, 0, 1, 0, 0, 1, 0}));
  EXPECT_EQ(life_step(next, 3, 3), blinker);
}

TEST(Life, DatasetShapeAndEquilibrium) {
  const BitDataset d = game_of_life_dataset(6, 7, 200, 200, 3, 2);
  EXPECT_EQ(d.variables(), 42);
  EXPECT_EQ(d.rows(), 200);
  // Every emitted state lies on a cycle. Most cycles are still lifes or
  // blinkers, but dead boundaries on 6x7 also admit a period-76 orbit.
  int short_cycles = 0;
  for (Index r = 0; r < d.rows(); ++r) {
    const std::vector<std::uint8_t> x(d.row(r), d.row(r) + 42);
    EXPECT_TRUE(std::any_of(x.begin(), x.end(), [](std::uint8_t b) { return b != 0; }));
    std::vector<std::uint8_t> y = x;
    int period = 0;
    for (int k = 1; k <= 100 && period == 0; ++k) {
      y = life_step(y, 6, 7);
      if (y == x) period = k;
    }
    EXPECT_GT(period, 0) << "row " << r;
    short_cycles += period == 1 || period == 2;
  }
  EXPECT_GT(short_cycles, d.rows() * 8 / 10);
  EXPECT_EQ(game_of_life_dataset(6, 7, 50, 30, 9, 1), game_of_life_dataset(6, 7, 50, 30, 9, 3));
  EXPECT_THROW(game_of_life_dataset(2, 7, 5, 1, 0), InvalidInput);
}

TEST(DatasetIo, ParseExamplesAndErrors) {
  const BitDataset d = parse_dataset("010\n111\n");
  EXPECT_EQ(d.rows(), 2);
  EXPECT_EQ(d.variables(), 3);
  EXPECT_EQ(d(1, 0), 1);
  EXPECT_THROW(parse_dataset(""), ParseError);
  auto line_of = [](std::string_view text) {
    try {
      parse_dataset(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("01\n012\n"), 2);
  EXPECT_EQ(line_of("01\n00\n0a\n"), 3);
  EXPECT_EQ(line_of("01\n\n01\n"), 2);
}

TEST(DatasetIo, RoundTrip) {
  const BitDataset d = mn_sample(grid_mn_generate(3, 4, 2), 500, 4);
  const auto path = std::filesystem::temp_directory_path() / "fermiborn_roundtrip.txt";
  save_dataset(d, path);
  EXPECT_EQ(load_dataset(path), d);
  std::filesystem::remove(path);
  EXPECT_THROW(load_dataset("/nonexistent/file.txt"), InvalidInput);
}

}  // namespace
}  // namespace fermiborn
