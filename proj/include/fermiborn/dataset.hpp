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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fermiborn/error.hpp"
#include "fermiborn/linalg.hpp"

namespace fermiborn {

/// Rows of n bits, stored row-major.
class BitDataset {
 public:
  BitDataset() = default;
  explicit BitDataset(Index n) : n_(n) {
    if (n < 1) throw InvalidInput("BitDataset: need at least one variable");
  }

  BitDataset(Index n, std::vector<std::uint8_t> bits) : n_(n), bits_(std::move(bits)) {
    if (n < 1) throw InvalidInput("BitDataset: need at least one variable");
    if (bits_.size() % static_cast<std::size_t>(n) != 0) throw InvalidInput("BitDataset: ragged data");
    for (auto b : bits_) {
      if (b > 1) throw InvalidInput("BitDataset: entries must be 0 or 1");
    }
  }

  Index variables() const noexcept { return n_; }
  Index rows() const noexcept { return n_ == 0 ? 0 : static_cast<Index>(bits_.size()) / n_; }
  bool empty() const noexcept { return bits_.empty(); }

  std::uint8_t operator()(Index r, Index c) const { return bits_[static_cast<std::size_t>(r * n_ + c)]; }
  const std::uint8_t* row(Index r) const { return bits_.data() + r * n_; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  void push_back(const std::uint8_t* row) { bits_.insert(bits_.end(), row, row + n_); }
  void push_back(const std::vector<std::uint8_t>& row) {
    if (static_cast<Index>(row.size()) != n_) throw InvalidInput("BitDataset: row length mismatch");
    for (auto b : row) {
      if (b > 1) throw InvalidInput("BitDataset: entries must be 0 or 1");
    }
    push_back(row.data());
  }

  /// Row r as an integer with variable 0 in the top bit (n <= 63).
  std::uint64_t row_index(Index r) const {
    std::uint64_t x = 0;
    for (Index c = 0; c < n_; ++c) x = (x << 1) | (*this)(r, c);
    return x;
  }

  /// Empirical probabilities over 2^n outcomes, variable 0 in the top bit.
  std::vector<double> histogram() const {
    if (n_ > 24) throw Refusal("BitDataset: histogram over more than 24 variables");
    std::vector<double> h(std::size_t{1} << n_, 0.0);
    for (Index r = 0; r < rows(); ++r) h[row_index(r)] += 1.0;
    for (double& x : h) x /= static_cast<double>(rows());
    return h;
  }

  /// Rows [begin, end).
  BitDataset slice(Index begin, Index end) const {
    return BitDataset(n_, std::vector<std::uint8_t>(bits_.begin() + begin * n_, bits_.begin() + end * n_));
  }

  friend bool operator==(const BitDataset&, const BitDataset&) = default;

 private:
  Index n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// One row per line of '0'/'1'; every line the same length; no blank lines
/// except a trailing newline. An empty input is an error.
inline BitDataset parse_dataset(std::string_view text) {
  Index n = 0;
  std::vector<std::uint8_t> bits;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) throw ParseError("empty line", lineno);
    if (n == 0) n = static_cast<Index>(line.size());
    if (static_cast<Index>(line.size()) != n) {
      throw ParseError("row has " + std::to_string(line.size()) + " bits, expected " + std::to_string(n), lineno);
    }
    for (char ch : line) {
      if (ch != '0' && ch != '1') throw ParseError(std::string("invalid character '") + ch + "'", lineno);
      bits.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
  }
  if (n == 0) throw ParseError("dataset has no rows", 0);
  return BitDataset(n, std::move(bits));
}

inline BitDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open dataset '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset(ss.str());
}

inline std::string format_dataset(const BitDataset& data) {
  std::string out;
  out.reserve(static_cast<std::size_t>(data.rows() * (data.variables() + 1)));
  for (Index r = 0; r < data.rows(); ++r) {
    for (Index c = 0; c < data.variables(); ++c) out.push_back(static_cast<char>('0' + data(r, c)));
    out.push_back('\n');
  }
  return out;
}

/// Writes via a temporary file and rename.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write '" + tmp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw InvalidInput("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline void save_dataset(const BitDataset& data, const std::filesystem::path& path) {
  if (data.empty()) throw InvalidInput("save_dataset: dataset has no rows");
  write_file_atomic(path, format_dataset(data));
}

}  // namespace fermiborn
