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
 *  \brief Uniform scalar quantizer with subtractive dither.
 *
 *  A block of samples is quantized with one dither realization z repeated
 *  over every coordinate: index_k = Q(x_k + z), reconstruction
 *  index_k * step - z. With z uniform on [-step/2, step/2] the
 *  reconstruction error is uniform and independent of the input, and its
 *  mean square equals D = step^2 / 12 for every input value.
 */

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mtdq/error.hpp"
#include "mtdq/rng.hpp"

namespace mtdq {

/// Step size that yields mean-square error D: 2 * sqrt(3 D).
inline double step_for(double distortion) { return 2.0 * std::sqrt(3.0 * distortion); }

struct DitherSpec {
  double distortion = 0.0;  // D
  double step = 0.0;        // 2 sqrt(3 D)
  double offset = 0.0;      // dither realization z, |z| <= step / 2

  static DitherSpec make(double distortion, double offset) {
    require(distortion > 0.0 && std::isfinite(distortion), ErrorCode::invalid_argument,
            "distortion must be positive");
    const double step = step_for(distortion);
    require(std::fabs(offset) <= 0.5 * step, ErrorCode::invalid_argument,
            "dither outside [-step/2, step/2]");
    return {distortion, step, offset};
  }
};

inline DitherSpec draw_dither(double distortion, Rng& rng) {
  require(distortion > 0.0 && std::isfinite(distortion), ErrorCode::invalid_argument,
          "distortion must be positive");
  const double half = 0.5 * step_for(distortion);
  std::uniform_real_distribution<double> u(-half, half);
  return DitherSpec::make(distortion, u(rng));
}

/// Index of the nearest multiple of step. Exact midpoints (i + 1/2) * step
/// round toward +infinity.
inline std::int64_t quantize(double u, double step) {
  require(step > 0.0, ErrorCode::invalid_argument, "step must be positive");
  require(std::isfinite(u), ErrorCode::invalid_argument, "non-finite quantizer input");
  const double q = std::floor(u / step + 0.5);
  require(std::fabs(q) < 4.0e18, ErrorCode::invalid_argument, "quantizer index overflow");
  return static_cast<std::int64_t>(q);
}

/// Largest |index| reachable from inputs in [-A, A] with any admissible dither.
inline std::int64_t index_bound(double support, double step) {
  return static_cast<std::int64_t>(std::ceil((support + 0.5 * step) / step));
}

/// Inclusive index range reachable from [-A, A] for a fixed dither z.
struct IndexRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
};

inline IndexRange index_range(double support, double step, double dither) {
  return {quantize(-support + dither, step), quantize(support + dither, step)};
}

struct QuantizedBlock {
  std::vector<std::int64_t> indices;
  double step = 0.0;
  double dither = 0.0;
};

inline QuantizedBlock encode_block(std::span<const double> x, const DitherSpec& dither) {
  QuantizedBlock block{{}, dither.step, dither.offset};
  block.indices.reserve(x.size());
  for (double v : x) block.indices.push_back(quantize(v + dither.offset, dither.step));
  return block;
}

inline std::vector<double> reconstruct(const QuantizedBlock& block) {
  std::vector<double> out;
  out.reserve(block.indices.size());
  for (auto i : block.indices) out.push_back(static_cast<double>(i) * block.step - block.dither);
  return out;
}

namespace detail {

// Integrates (i*step - u)^power over u in [x - step/2, x + step/2], split at
// the cell boundaries, and divides by step (the dither density).
inline double dither_error_moment(double x, double distortion, int power) {
  require(distortion > 0.0, ErrorCode::invalid_argument, "distortion must be positive");
  require(std::isfinite(x), ErrorCode::invalid_argument, "non-finite input");
  const double step = step_for(distortion);
  const double lo = x - 0.5 * step;
  const double hi = x + 0.5 * step;
  double acc = 0.0;
  for (auto i = quantize(lo, step); i <= quantize(hi, step); ++i) {
    const double c = static_cast<double>(i) * step;
    const double a = std::fmax(lo, c - 0.5 * step);
    const double b = std::fmin(hi, c + 0.5 * step);
    if (!(b > a)) continue;
    // Antiderivative of (c - u)^p is -(c - u)^(p+1) / (p + 1).
    const double ea = c - a;
    const double eb = c - b;
    acc += (std::pow(ea, power + 1) - std::pow(eb, power + 1)) / (power + 1);
  }
  return acc / step;
}

}  // namespace detail

/// E_z[(Q(x + z) - z - x)^2] by exact piecewise integration over the dither.
inline double conditional_distortion(double x, double distortion) {
  return detail::dither_error_moment(x, distortion, 2);
}

/// E_z[Q(x + z) - z - x]; zero for every x.
inline double conditional_bias(double x, double distortion) {
  return detail::dither_error_moment(x, distortion, 1);
}

/// Per-sample-dither mode: every coordinate gets a fresh dither draw.
struct FreshDitherBlock {
  std::vector<std::int64_t> indices;
  std::vector<double> dithers;
  double step = 0.0;

  std::vector<double> reconstruct() const {
    std::vector<double> out(indices.size());
    for (std::size_t k = 0; k < indices.size(); ++k)
      out[k] = static_cast<double>(indices[k]) * step - dithers[k];
    return out;
  }
};

inline FreshDitherBlock encode_fresh_dither(std::span<const double> x, double distortion,
                                            Rng& rng) {
  FreshDitherBlock block;
  block.step = step_for(distortion);
  block.indices.reserve(x.size());
  block.dithers.reserve(x.size());
  for (double v : x) {
    const auto d = draw_dither(distortion, rng);
    block.dithers.push_back(d.offset);
    block.indices.push_back(quantize(v + d.offset, d.step));
  }
  return block;
}

}  // namespace mtdq
