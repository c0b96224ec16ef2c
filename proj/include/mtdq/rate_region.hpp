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
 *  \brief Dither-conditioned entropies of the quantized pair and the
 *  redundancy constants that bound the gap to the optimal region.
 *
 *  Every entropy is in bits per sample and is an average over an M x M
 *  midpoint grid of dither pairs (z1, z2). The entropy of (Y1, Y2) given a
 *  dither pair is a periodic, smooth function of the dithers for smooth
 *  sources, so the midpoint rule converges quickly.
 */

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "mtdq/entropy.hpp"
#include "mtdq/error.hpp"
#include "mtdq/parallel.hpp"
#include "mtdq/quantizer.hpp"
#include "mtdq/source.hpp"

namespace mtdq {

/// Midpoint grid point a of M on [-step/2, step/2].
inline double dither_grid_point(double step, std::size_t a, std::size_t grid) {
  return -0.5 * step + (static_cast<double>(a) + 0.5) * step / static_cast<double>(grid);
}

/// Law of (Q(X1 + z1), Q(X2 + z2)) on the index box [-I1, I1] x [-I2, I2]
/// implied by the support.
inline QuantizedJointPMF joint_pmf_given_dithers(const JointSource& source, double step1,
                                                 double step2, double z1, double z2) {
  require(step1 > 0.0 && step2 > 0.0, ErrorCode::invalid_argument, "steps must be positive");
  require(std::fabs(z1) <= 0.5 * step1 && std::fabs(z2) <= 0.5 * step2,
          ErrorCode::invalid_argument, "dither outside its cell");
  const auto b1 = index_bound(source.support(), step1);
  const auto b2 = index_bound(source.support(), step2);
  QuantizedJointPMF pmf(-b1, -b2, static_cast<std::size_t>(2 * b1 + 1),
                        static_cast<std::size_t>(2 * b2 + 1));
  if (const auto* grid = source.as_discrete()) {
    for (const auto& a : grid->atoms) {
      const auto i = quantize(a.x1 + z1, step1);
      const auto j = quantize(a.x2 + z2, step2);
      pmf.at(static_cast<std::size_t>(i + b1), static_cast<std::size_t>(j + b2)) += a.weight;
    }
    return pmf;
  }
  // Only cells that meet the support can carry mass.
  const auto r1 = index_range(source.support(), step1, z1);
  const auto r2 = index_range(source.support(), step2, z2);
  for (auto i = r1.lo; i <= r1.hi; ++i)
    for (auto j = r2.lo; j <= r2.hi; ++j)
      pmf.at(static_cast<std::size_t>(i + b1), static_cast<std::size_t>(j + b2)) =
          source.cell_mass(i, j, step1, step2, z1, z2);
  return pmf;
}

/// The five dither-conditioned entropies that delimit the achievable region
///   R1 >= h1g2,  R2 >= h2g1,  R1 + R2 >= h12,
/// with the useful range of R1 being [h1g2, h1] (and likewise for R2).
struct RateRegionSpec {
  double h1g2 = 0.0;  // H(Y1 | Y2, Z1, Z2)
  double h2g1 = 0.0;  // H(Y2 | Y1, Z1, Z2)
  double h12 = 0.0;   // H(Y1, Y2 | Z1, Z2)
  double h1 = 0.0;    // H(Y1 | Z1)
  double h2 = 0.0;    // H(Y2 | Z2)
};

inline RateRegionSpec region(const JointSource& source, double d1, double d2,
                             std::size_t grid = 32, unsigned threads = 1) {
  require(d1 > 0.0 && d2 > 0.0, ErrorCode::invalid_argument, "distortions must be positive");
  require(grid >= 8, ErrorCode::invalid_argument, "dither grid must have at least 8 points");
  const double step1 = step_for(d1);
  const double step2 = step_for(d2);
  std::vector<PmfEntropies> cells(grid * grid);
  parallel_for(cells.size(), threads, [&](std::size_t k) {
    const double z1 = dither_grid_point(step1, k / grid, grid);
    const double z2 = dither_grid_point(step2, k % grid, grid);
    cells[k] = entropies(joint_pmf_given_dithers(source, step1, step2, z1, z2));
  });
  RateRegionSpec out;
  for (const auto& e : cells) {
    out.h12 += e.joint;
    out.h1 += e.first;
    out.h2 += e.second;
    out.h1g2 += e.first_given_second();
    out.h2g1 += e.second_given_first();
  }
  const double n = static_cast<double>(cells.size());
  out.h12 /= n;
  out.h1 /= n;
  out.h2 /= n;
  out.h1g2 /= n;
  out.h2g1 /= n;
  return out;
}

/// Per-symbol vs block entropies, both averaged over the dither grid.
struct BlockEntropyCheck {
  double symbol_joint = 0.0;       // H(Y1, Y2 | Z)
  double block_joint = 0.0;        // H(Y1^n, Y2^n | Z) / n
  double symbol_conditional = 0.0; // H(Y1 | Y2, Z)
  double block_conditional = 0.0;  // H(Y1^n | Y2^n, Z) / n
};

namespace detail {

// Entropy of the n-fold product of a law with the given atom probabilities.
inline double product_entropy(const std::vector<double>& probs, std::size_t n) {
  std::vector<std::size_t> digit(n, 0);
  double h = 0.0;
  while (true) {
    double p = 1.0;
    for (auto d : digit) p *= probs[d];
    if (p > 0.0) h -= p * std::log2(p);
    std::size_t k = 0;
    while (k < n && ++digit[k] == probs.size()) digit[k++] = 0;
    if (k == n) break;
  }
  return h;
}

inline std::vector<double> nonzero(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v)
    if (x > 0.0) out.push_back(x);
  return out;
}

}  // namespace detail

inline constexpr double kBlockEnumerationCap = 1e7;

/// Brute-force check that block entropies are n times per-symbol entropies
/// when one dither realization is shared by the whole block.
inline BlockEntropyCheck block_entropy_check(const JointSource& source, double d1, double d2,
                                             std::size_t n, std::size_t grid = 8) {
  require(source.as_discrete() != nullptr, ErrorCode::invalid_argument,
          "block_entropy_check needs a discrete-grid source");
  require(n >= 1, ErrorCode::invalid_argument, "block length must be positive");
  const double step1 = step_for(d1);
  const double step2 = step_for(d2);
  BlockEntropyCheck out;
  for (std::size_t a = 0; a < grid; ++a) {
    for (std::size_t b = 0; b < grid; ++b) {
      const auto pmf = joint_pmf_given_dithers(source, step1, step2,
                                               dither_grid_point(step1, a, grid),
                                               dither_grid_point(step2, b, grid));
      const auto joint = detail::nonzero(pmf.p);
      const auto second = detail::nonzero(pmf.marginal2());
      require(std::pow(static_cast<double>(joint.size()), static_cast<double>(n)) <=
                  kBlockEnumerationCap,
              ErrorCode::enumeration_cap, "block law too large to enumerate");
      const auto e = entropies(pmf);
      const double bj = detail::product_entropy(joint, n);
      const double b2 = detail::product_entropy(second, n);
      out.symbol_joint += e.joint;
      out.symbol_conditional += e.first_given_second();
      out.block_joint += bj / static_cast<double>(n);
      out.block_conditional += (bj - b2) / static_cast<double>(n);
    }
  }
  const double cells = static_cast<double>(grid * grid);
  out.symbol_joint /= cells;
  out.symbol_conditional /= cells;
  out.block_joint /= cells;
  out.block_conditional /= cells;
  return out;
}

/// Universal per-user redundancy bound: 0.5 * log2(pi e / 3) bits/sample.
inline double redundancy_constant() {
  return 0.5 * std::log2(std::numbers::pi * std::numbers::e / 3.0);
}

/// Redundancy bound with post-estimation: 0.5 * log2((pi e / 6) (D* / D + 1)).
inline double improved_constant(double estimated_distortion, double distortion) {
  require(distortion > 0.0, ErrorCode::invalid_argument, "distortion must be positive");
  require(estimated_distortion >= 0.0, ErrorCode::precondition, "D* must be nonnegative");
  require(estimated_distortion <= distortion, ErrorCode::precondition, "D* exceeds D");
  return 0.5 * std::log2(std::numbers::pi * std::numbers::e / 6.0 *
                         (estimated_distortion / distortion + 1.0));
}

struct OuterSumLine {
  double value = 0.0;     // h12 - 2c, may be negative
  double reported = 0.0;  // max(value, 0)
  bool clamped = false;
};

/// Sum-rate line below which no code meeting (D1, D2) can operate.
inline OuterSumLine outer_sum_line(const RateRegionSpec& r) {
  const double v = r.h12 - 2.0 * redundancy_constant();
  return {v, std::fmax(v, 0.0), v < 0.0};
}

/// Deterministic reconstruction maps x -> x_hat used to probe the entropy
/// bound. A partition reconstructor maps x to q * width - shift where
/// q = Q(x + shift); several shifts form an equal-weight mixture whose shift
/// is known to the decoder (a dithered quantizer with its dither averaged out).
class Reconstructor {
 public:
  enum class Kind { identity, midpoint, dithered };

  static Reconstructor identity() { return Reconstructor(Kind::identity, 0.0, 0.0, {}); }

  static Reconstructor midpoint(double width) {
    require(width > 0.0, ErrorCode::invalid_argument, "width must be positive");
    return Reconstructor(Kind::midpoint, width, 0.0, {0.0});
  }

  static Reconstructor dithered(double distortion, std::size_t grid = 16) {
    require(distortion > 0.0 && grid >= 1, ErrorCode::invalid_argument,
            "dithered reconstructor needs D > 0 and a nonempty grid");
    const double w = step_for(distortion);
    std::vector<double> shifts;
    for (std::size_t a = 0; a < grid; ++a) shifts.push_back(dither_grid_point(w, a, grid));
    return Reconstructor(Kind::dithered, w, distortion, std::move(shifts));
  }

  Kind kind() const { return kind_; }
  double width() const { return width_; }
  double distortion() const { return distortion_; }
  const std::vector<double>& shifts() const { return shifts_; }

 private:
  Reconstructor(Kind k, double w, double d, std::vector<double> s)
      : kind_(k), width_(w), distortion_(d), shifts_(std::move(s)) {}

  Kind kind_;
  double width_;
  double distortion_;
  std::vector<double> shifts_;
};

struct EntropyBoundResult {
  double measured = 0.0;        // H(Y | X_hat, Z) in bits
  double bound = 0.0;           // 0.5 log2(pi e / 3)
  double refined_bound = 0.0;   // 0.5 log2((pi e / 6)(E(X - X_hat)^2 / D + 1))
  double reconstructor_distortion = 0.0;
  double reconstructor_bias = 0.0;  // E[X - X_hat]
  bool pass = false;
};

namespace detail {

inline void check_reconstructor(const JointSource& source, int user, double d,
                                const Reconstructor& rec, EntropyBoundResult& out) {
  const double step = step_for(d);
  switch (rec.kind()) {
    case Reconstructor::Kind::identity:
      break;
    case Reconstructor::Kind::midpoint: {
      const auto range = index_range(source.support(), rec.width(), 0.0);
      for (auto q = range.lo; q <= range.hi; ++q) {
        const double level = static_cast<double>(q) * rec.width();
        const auto m = source.marginal_moments(user, JointSource::cell_interval(q, rec.width(), 0.0));
        out.reconstructor_distortion += m.second - 2.0 * level * m.first + level * level * m.mass;
        out.reconstructor_bias += m.first - level * m.mass;
      }
      break;
    }
    case Reconstructor::Kind::dithered:
      // Averaged over its own continuous dither, the error has exact moments
      // at every x; integrate them against the marginal.
      out.reconstructor_distortion = source.marginal_expectation(
          user, [&](double x) { return conditional_distortion(x, rec.distortion()); });
      out.reconstructor_bias = -source.marginal_expectation(
          user, [&](double x) { return conditional_bias(x, rec.distortion()); });
      break;
  }
  const double dist_tol = 1e-9 * d + 1e-15;
  const double bias_tol = 1e-8 * step;
  if (out.reconstructor_distortion > d + dist_tol)
    throw Error(ErrorCode::precondition, "reconstructor distortion " +
                                             std::to_string(out.reconstructor_distortion) +
                                             " exceeds D = " + std::to_string(d));
  if (std::fabs(out.reconstructor_bias) > bias_tol)
    throw Error(ErrorCode::precondition,
                "reconstructor error has nonzero mean " + std::to_string(out.reconstructor_bias));
}

// H(Y | partition cell, Z = z) for one partition, one dither value.
inline double partition_conditional_entropy(const JointSource& source, int user, double step,
                                            double z, double width, double shift) {
  std::map<std::pair<std::int64_t, std::int64_t>, double> joint;
  if (const auto* grid = source.as_discrete()) {
    for (const auto& a : grid->atoms) {
      const double x = user == 1 ? a.x1 : a.x2;
      joint[{quantize(x + shift, width), quantize(x + z, step)}] += a.weight;
    }
  } else {
    const auto qr = index_range(source.support(), width, shift);
    const auto yr = index_range(source.support(), step, z);
    for (auto q = qr.lo; q <= qr.hi; ++q) {
      const auto cq = JointSource::cell_interval(q, width, shift);
      for (auto j = yr.lo; j <= yr.hi; ++j) {
        const auto cell = intersect(cq, JointSource::cell_interval(j, step, z));
        if (cell.empty()) continue;
        const double m = source.marginal_moments(user, cell).mass;
        if (m > 0.0) joint[{q, j}] += m;
      }
    }
  }
  std::map<std::int64_t, double> cell_mass;
  double h = 0.0;
  for (const auto& [key, m] : joint) {
    cell_mass[key.first] += m;
    if (m > 0.0) h -= m * std::log2(m);
  }
  for (const auto& [q, m] : cell_mass)
    if (m > 0.0) h += m * std::log2(m);
  return h;
}

}  // namespace detail

/// Measures H(Y | X_hat, Z) for a single user quantized at distortion D and
/// compares it with the universal bound. The reconstructor must satisfy
/// E[(X - X_hat)^2] <= D and E[X - X_hat] = 0; violations throw
/// ErrorCode::precondition.
inline EntropyBoundResult entropy_bound_check(const JointSource& source, int user, double d,
                                              const Reconstructor& rec, std::size_t grid = 32) {
  require(user == 1 || user == 2, ErrorCode::invalid_argument, "user must be 1 or 2");
  require(d > 0.0, ErrorCode::invalid_argument, "distortion must be positive");
  require(grid >= 1, ErrorCode::invalid_argument, "dither grid must be nonempty");
  EntropyBoundResult out;
  detail::check_reconstructor(source, user, d, rec, out);
  const double step = step_for(d);
  out.bound = redundancy_constant();
  out.refined_bound = 0.5 * std::log2(std::numbers::pi * std::numbers::e / 6.0 *
                                      (out.reconstructor_distortion / d + 1.0));
  if (rec.kind() != Reconstructor::Kind::identity) {
    double acc = 0.0;
    for (std::size_t a = 0; a < grid; ++a) {
      const double z = dither_grid_point(step, a, grid);
      for (double shift : rec.shifts())
        acc += detail::partition_conditional_entropy(source, user, step, z, rec.width(), shift);
    }
    out.measured = acc / static_cast<double>(grid * rec.shifts().size());
  }
  // Y is a function of (X, Z) for the identity map, so the entropy is zero.
  out.pass = out.measured <= out.bound;
  return out;
}

}  // namespace mtdq
