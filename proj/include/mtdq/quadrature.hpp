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

/*! \file
 *  \brief Composite Gauss-Legendre quadrature with panel doubling.
 *
 *  Level k splits each axis into 2^k panels with an 8-point rule per panel,
 *  so the node count per axis is 8 * 2^k. Refinement stops once two
 *  successive levels agree to rel_tol (plus an absolute floor for integrals
 *  that are zero or negligible).
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "mtdq/error.hpp"

namespace mtdq {

struct QuadratureOptions {
  double rel_tol = 1e-9;
  double abs_tol = 1e-15;
  int max_level = 7;  // 8 * 2^7 = 1024 nodes per axis

  bool operator==(const QuadratureOptions&) const = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool empty() const { return !(hi > lo); }
};

inline Interval intersect(Interval a, Interval b) {
  return {std::fmax(a.lo, b.lo), std::fmin(a.hi, b.hi)};
}

namespace detail {

using Rule = boost::math::quadrature::gauss<double, 8>;

// Full 8-point node/weight tables on [-1, 1].
struct GaussTable {
  std::array<double, 8> x{};
  std::array<double, 8> w{};
  GaussTable() {
    const auto& a = Rule::abscissa();
    const auto& wt = Rule::weights();
    for (std::size_t i = 0; i < 4; ++i) {
      x[i] = -a[3 - i];
      w[i] = wt[3 - i];
      x[7 - i] = a[3 - i];
      w[7 - i] = wt[3 - i];
    }
  }
};

inline const GaussTable& gauss_table() {
  static const GaussTable table;
  return table;
}

template <std::size_t N>
bool converged(const std::array<double, N>& prev, const std::array<double, N>& cur,
               const QuadratureOptions& opt) {
  for (std::size_t i = 0; i < N; ++i) {
    if (std::fabs(cur[i] - prev[i]) > opt.rel_tol * std::fabs(cur[i]) + opt.abs_tol)
      return false;
  }
  return true;
}

template <std::size_t N, class F>
std::array<double, N> rule_1d(F& f, Interval r, int level) {
  const auto& g = gauss_table();
  const std::size_t panels = std::size_t{1} << level;
  const double h = r.width() / static_cast<double>(panels);
  std::array<double, N> sum{};
  for (std::size_t p = 0; p < panels; ++p) {
    const double mid = r.lo + (static_cast<double>(p) + 0.5) * h;
    for (std::size_t k = 0; k < 8; ++k) {
      const auto v = f(mid + 0.5 * h * g.x[k]);
      for (std::size_t i = 0; i < N; ++i) sum[i] += g.w[k] * v[i];
    }
  }
  for (auto& s : sum) s *= 0.5 * h;
  return sum;
}

template <std::size_t N, class F>
std::array<double, N> rule_2d(F& f, Interval r1, Interval r2, int level) {
  const auto& g = gauss_table();
  const std::size_t panels = std::size_t{1} << level;
  const double h1 = r1.width() / static_cast<double>(panels);
  const double h2 = r2.width() / static_cast<double>(panels);
  std::array<double, N> sum{};
  for (std::size_t p = 0; p < panels; ++p) {
    const double m1 = r1.lo + (static_cast<double>(p) + 0.5) * h1;
    for (std::size_t a = 0; a < 8; ++a) {
      const double x1 = m1 + 0.5 * h1 * g.x[a];
      for (std::size_t q = 0; q < panels; ++q) {
        const double m2 = r2.lo + (static_cast<double>(q) + 0.5) * h2;
        for (std::size_t b = 0; b < 8; ++b) {
          const auto v = f(x1, m2 + 0.5 * h2 * g.x[b]);
          const double w = g.w[a] * g.w[b];
          for (std::size_t i = 0; i < N; ++i) sum[i] += w * v[i];
        }
      }
    }
  }
  for (auto& s : sum) s *= 0.25 * h1 * h2;
  return sum;
}

}  // namespace detail

/// Integrates a vector-valued f: double -> std::array<double, N> over r.
template <std::size_t N, class F>
std::array<double, N> integrate(F&& f, Interval r, const QuadratureOptions& opt = {}) {
  if (r.empty()) return {};
  auto prev = detail::rule_1d<N>(f, r, 0);
  for (int level = 1; level <= opt.max_level; ++level) {
    auto cur = detail::rule_1d<N>(f, r, level);
    if (detail::converged(prev, cur, opt)) return cur;
    prev = cur;
  }
  throw Error(ErrorCode::quadrature, "1-D quadrature did not converge on [" +
                                         std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
}

/// Integrates a vector-valued f: (double, double) -> std::array<double, N>
/// over the rectangle r1 x r2 with a tensor-product rule.
template <std::size_t N, class F>
std::array<double, N> integrate(F&& f, Interval r1, Interval r2,
                                const QuadratureOptions& opt = {}) {
  if (r1.empty() || r2.empty()) return {};
  auto prev = detail::rule_2d<N>(f, r1, r2, 0);
  for (int level = 1; level <= opt.max_level; ++level) {
    auto cur = detail::rule_2d<N>(f, r1, r2, level);
    if (detail::converged(prev, cur, opt)) return cur;
    prev = cur;
  }
  throw Error(ErrorCode::quadrature, "2-D quadrature did not converge");
}

}  // namespace mtdq
