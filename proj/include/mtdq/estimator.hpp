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
 *  \brief Linear MMSE post-estimation of (X1, X2) from the de-dithered pair.
 *
 *  De-dithered outputs behave like X_i + N_i with N_i uniform of variance
 *  D_i, independent of everything else. Their covariance is therefore
 *    Lambda = [[v1 + D1, c], [c, v2 + D2]]
 *  with v_i, c the source (co)variances, and the best linear estimate of X1
 *  is Lambda^-1 (v1, c)^T applied to the centered observations. Its error is
 *    D1* = D1 (v1 (v2 + D2) - c^2) / ((v1 + D1)(v2 + D2) - c^2) <= D1.
 *  The source statistics can be recovered from the outputs alone, which
 *  keeps the decoder universal.
 */

#include <cmath>
#include <span>
#include <vector>

#include "mtdq/error.hpp"
#include "mtdq/source.hpp"

namespace mtdq {

struct EstimatorWeights {
  // x1_hat = mean1 + w11 (y1 - mean1) + w12 (y2 - mean2), likewise for x2_hat.
  double w11 = 0.0;
  double w12 = 0.0;
  double w21 = 0.0;
  double w22 = 0.0;
  double mean1 = 0.0;
  double mean2 = 0.0;
  double det_lambda = 0.0;
  double predicted_d1 = 0.0;
  double predicted_d2 = 0.0;
};

struct PredictedError {
  double d1 = 0.0;
  double d2 = 0.0;
};

inline constexpr double kDegenerateDeterminant = 1e-300;

namespace detail {

inline void check_estimator_inputs(const SecondOrderStats& s, double d1, double d2) {
  require(d1 >= 0.0 && d2 >= 0.0 && std::isfinite(d1) && std::isfinite(d2),
          ErrorCode::invalid_argument, "distortions must be finite and nonnegative");
  require(s.var1() >= -1e-12 && s.var2() >= -1e-12, ErrorCode::invalid_argument,
          "negative source variance");
}

}  // namespace detail

/// Closed-form estimation errors (D1*, D2*) from centered statistics.
inline PredictedError predicted_error(const SecondOrderStats& s, double d1, double d2) {
  detail::check_estimator_inputs(s, d1, d2);
  const double v1 = s.var1();
  const double v2 = s.var2();
  const double c = s.cov();
  const double det = (v1 + d1) * (v2 + d2) - c * c;
  require(det > kDegenerateDeterminant, ErrorCode::invalid_argument,
          "observation covariance is singular");
  return {d1 * (v1 * (v2 + d2) - c * c) / det, d2 * (v2 * (v1 + d1) - c * c) / det};
}

/// Weights from the explicit inverse of the observation covariance.
inline EstimatorWeights lmmse_weights(const SecondOrderStats& s, double d1, double d2) {
  detail::check_estimator_inputs(s, d1, d2);
  const double v1 = s.var1();
  const double v2 = s.var2();
  const double c = s.cov();
  const double l11 = v1 + d1;
  const double l22 = v2 + d2;
  const double det = l11 * l22 - c * c;
  require(det > kDegenerateDeterminant, ErrorCode::invalid_argument,
          "observation covariance is singular");
  EstimatorWeights w;
  w.det_lambda = det;
  w.mean1 = s.m1;
  w.mean2 = s.m2;
  // Lambda^-1 = [[l22, -c], [-c, l11]] / det; cross-covariances (v1, c) and (c, v2).
  w.w11 = (det - d1 * l22) / det;
  w.w12 = c * d1 / det;
  w.w21 = c * d2 / det;
  w.w22 = (det - d2 * l11) / det;
  const auto err = predicted_error(s, d1, d2);
  w.predicted_d1 = err.d1;
  w.predicted_d2 = err.d2;
  return w;
}

struct ObservationPair {
  double y1 = 0.0;  // Y1 - Z1
  double y2 = 0.0;  // Y2 - Z2
};

struct ChannelStats {
  SecondOrderStats stats;
  std::size_t count = 0;
  bool floored = false;  // a variance or covariance had to be clipped
  // Standard errors of the raw sample moments behind s11, s22, s12.
  double se_s11 = 0.0;
  double se_s22 = 0.0;
  double se_s12 = 0.0;
};

/// Recovers source statistics from de-dithered outputs:
///   E[Y - Z] = E[X],  E[(Y - Z)^2] = E[X^2] + D,  E[(Y1 - Z1)(Y2 - Z2)] = E[X1 X2].
inline ChannelStats estimate_stats_from_channel(std::span<const ObservationPair> obs, double d1,
                                                double d2) {
  require(obs.size() >= 2, ErrorCode::invalid_argument, "need at least two observations");
  require(d1 >= 0.0 && d2 >= 0.0, ErrorCode::invalid_argument, "distortions must be nonnegative");
  const double n = static_cast<double>(obs.size());
  double a1 = 0, a2 = 0, q11 = 0, q22 = 0, q12 = 0;
  for (const auto& o : obs) {
    a1 += o.y1;
    a2 += o.y2;
    q11 += o.y1 * o.y1;
    q22 += o.y2 * o.y2;
    q12 += o.y1 * o.y2;
  }
  ChannelStats out;
  out.count = obs.size();
  auto& s = out.stats;
  s.m1 = a1 / n;
  s.m2 = a2 / n;
  const double r11 = q11 / n;
  const double r22 = q22 / n;
  s.s12 = q12 / n;
  s.s11 = r11 - d1;
  s.s22 = r22 - d2;
  if (s.var1() < 0.0) {
    s.s11 = s.m1 * s.m1;
    out.floored = true;
  }
  if (s.var2() < 0.0) {
    s.s22 = s.m2 * s.m2;
    out.floored = true;
  }
  const double limit = std::sqrt(s.var1() * s.var2());
  if (std::fabs(s.cov()) > limit) {
    s.s12 = s.m1 * s.m2 + std::copysign(limit, s.cov());
    out.floored = true;
  }
  double e11 = 0, e22 = 0, e12 = 0;
  for (const auto& o : obs) {
    e11 += std::pow(o.y1 * o.y1 - r11, 2);
    e22 += std::pow(o.y2 * o.y2 - r22, 2);
    e12 += std::pow(o.y1 * o.y2 - q12 / n, 2);
  }
  out.se_s11 = std::sqrt(e11 / (n - 1) / n);
  out.se_s22 = std::sqrt(e22 / (n - 1) / n);
  out.se_s12 = std::sqrt(e12 / (n - 1) / n);
  return out;
}

inline std::vector<SamplePair> apply_weights(const EstimatorWeights& w,
                                             std::span<const ObservationPair> obs) {
  std::vector<SamplePair> out;
  out.reserve(obs.size());
  for (const auto& o : obs) {
    const double c1 = o.y1 - w.mean1;
    const double c2 = o.y2 - w.mean2;
    out.push_back({w.mean1 + w.w11 * c1 + w.w12 * c2, w.mean2 + w.w21 * c1 + w.w22 * c2});
  }
  return out;
}

}  // namespace mtdq
