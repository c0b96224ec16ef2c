// Copyright 2026 The mtdq Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "mtdq/error.hpp"

namespace mtdq {

/// Shannon entropy in bits; zero entries contribute nothing.
inline double entropy_bits(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log2(v);
  return h;
}

/// Probability matrix over (i, j) quantizer index pairs. Row r holds index
/// lo1 + r, column c holds index lo2 + c.
struct QuantizedJointPMF {
  std::int64_t lo1 = 0;
  std::int64_t lo2 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> p;  // row-major

  QuantizedJointPMF() = default;
  QuantizedJointPMF(std::int64_t lo1_, std::int64_t lo2_, std::size_t rows_, std::size_t cols_)
      : lo1(lo1_), lo2(lo2_), rows(rows_), cols(cols_), p(rows_ * cols_, 0.0) {}

  /// Explicit law over symbols 0..rows-1 by 0..cols-1.
  static QuantizedJointPMF from_matrix(const std::vector<std::vector<double>>& m) {
    require(!m.empty() && !m.front().empty(), ErrorCode::invalid_argument, "empty pmf");
    QuantizedJointPMF pmf(0, 0, m.size(), m.front().size());
    double total = 0.0;
    for (std::size_t r = 0; r < m.size(); ++r) {
      require(m[r].size() == pmf.cols, ErrorCode::invalid_argument, "ragged pmf matrix");
      for (std::size_t c = 0; c < pmf.cols; ++c) {
        require(m[r][c] >= 0.0, ErrorCode::invalid_argument, "negative probability");
        pmf.at(r, c) = m[r][c];
        total += m[r][c];
      }
    }
    require(std::fabs(total - 1.0) <= 1e-8, ErrorCode::invalid_argument, "pmf must sum to 1");
    return pmf;
  }

  double& at(std::size_t r, std::size_t c) { return p[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return p[r * cols + c]; }

  double total() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }

  std::vector<double> marginal1() const {
    std::vector<double> m(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) m[r] += at(r, c);
    return m;
  }

  std::vector<double> marginal2() const {
    std::vector<double> m(cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) m[c] += at(r, c);
    return m;
  }

  /// Drops leading and trailing rows/columns that carry no mass.
  QuantizedJointPMF trimmed() const {
    const auto m1 = marginal1();
    const auto m2 = marginal2();
    std::size_t r0 = 0, r1 = rows, c0 = 0, c1 = cols;
    while (r0 + 1 < r1 && m1[r0] == 0.0) ++r0;
    while (r1 - 1 > r0 && m1[r1 - 1] == 0.0) --r1;
    while (c0 + 1 < c1 && m2[c0] == 0.0) ++c0;
    while (c1 - 1 > c0 && m2[c1 - 1] == 0.0) --c1;
    QuantizedJointPMF out(lo1 + static_cast<std::int64_t>(r0), lo2 + static_cast<std::int64_t>(c0),
                          r1 - r0, c1 - c0);
    for (std::size_t r = r0; r < r1; ++r)
      for (std::size_t c = c0; c < c1; ++c) out.at(r - r0, c - c0) = at(r, c);
    return out;
  }
};

struct PmfEntropies {
  double joint = 0.0;   // H(Y1, Y2)
  double first = 0.0;   // H(Y1)
  double second = 0.0;  // H(Y2)

  double first_given_second() const { return joint - second; }
  double second_given_first() const { return joint - first; }
};

inline PmfEntropies entropies(const QuantizedJointPMF& pmf) {
  const auto m1 = pmf.marginal1();
  const auto m2 = pmf.marginal2();
  return {entropy_bits(pmf.p), entropy_bits(m1), entropy_bits(m2)};
}

}  // namespace mtdq
