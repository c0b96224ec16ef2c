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

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "mtdq/estimator.hpp"
#include "mtdq/quantizer.hpp"
#include "test_support.hpp"

namespace mtdq {
namespace {

using testing_support::expect_error;

SecondOrderStats centered(double v1, double v2, double c) { return {0.0, 0.0, v1, v2, c}; }

// Normal equations Lambda w = r solved with a pivoted LU.
struct NormalSolution {
  Eigen::Vector2d w1, w2;
  double err1, err2;
};

NormalSolution normal_equations(const SecondOrderStats& s, double d1, double d2) {
  const double v1 = s.var1(), v2 = s.var2(), c = s.cov();
  Eigen::Matrix2d lambda;
  lambda << v1 + d1, c, c, v2 + d2;
  const Eigen::Vector2d r1(v1, c), r2(c, v2);
  const auto lu = lambda.fullPivLu();
  NormalSolution out{lu.solve(r1), lu.solve(r2), 0, 0};
  out.err1 = v1 - r1.dot(out.w1);
  out.err2 = v2 - r2.dot(out.w2);
  return out;
}

TEST(Lmmse, IndependentSourcesDecouple) {
  const auto w = lmmse_weights(centered(2.0, 1.0, 0.0), 0.5, 0.25);
  EXPECT_DOUBLE_EQ(w.w12, 0.0);
  EXPECT_DOUBLE_EQ(w.w21, 0.0);
  EXPECT_NEAR(w.w11, 2.0 / 2.5, 1e-15);
  EXPECT_NEAR(w.predicted_d1, 0.5 * 2.0 / 2.5, 1e-15);
  EXPECT_NEAR(predicted_error(centered(2.0, 1.0, 0.0), 0.5, 0.25).d2, 0.25 / 1.25, 1e-15);
}

TEST(Lmmse, IdenticalSources) {
  EXPECT_NEAR(predicted_error(centered(1, 1, 1), 1.0, 1.0).d1, 1.0 / 3.0, 1e-15);
}

TEST(Lmmse, NoiselessFirstChannel) {
  const auto w = lmmse_weights(centered(1.0, 1.0, 0.8), 1e-12, 0.5);
  EXPECT_NEAR(w.w11, 1.0, 1e-9);
  EXPECT_NEAR(w.w12, 0.0, 1e-9);
  EXPECT_NEAR(w.predicted_d1, 0.0, 1e-9);
}

TEST(Lmmse, MatchesNormalEquations) {
  Rng rng = make_stream(21, StreamTag::demo);
  std::uniform_real_distribution<double> u(0.05, 3.0), r(-0.99, 0.99), m(-1.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    const double v1 = u(rng), v2 = u(rng), rho = r(rng), m1 = m(rng), m2 = m(rng);
    const SecondOrderStats s{m1, m2, v1 + m1 * m1, v2 + m2 * m2,
                             rho * std::sqrt(v1 * v2) + m1 * m2};
    const double d1 = u(rng), d2 = u(rng);
    const auto w = lmmse_weights(s, d1, d2);
    const auto ne = normal_equations(s, d1, d2);
    EXPECT_NEAR(w.w11, ne.w1(0), 1e-12);
    EXPECT_NEAR(w.w12, ne.w1(1), 1e-12);
    EXPECT_NEAR(w.w21, ne.w2(0), 1e-12);
    EXPECT_NEAR(w.w22, ne.w2(1), 1e-12);
    EXPECT_NEAR(w.predicted_d1, ne.err1, 1e-12);
    EXPECT_NEAR(w.predicted_d2, ne.err2, 1e-12);
    EXPECT_LE(w.predicted_d1, d1);
    EXPECT_LE(w.predicted_d2, d2);
  }
}

TEST(Lmmse, RejectsBadInput) {
  expect_error(ErrorCode::invalid_argument, [] { predicted_error(centered(1, 1, 0), -0.1, 0.1); });
  expect_error(ErrorCode::invalid_argument, [] { predicted_error(centered(0, 0, 0), 0.0, 0.0); });
  expect_error(ErrorCode::invalid_argument, [] { lmmse_weights(centered(-1, 1, 0), 0.1, 0.1); });
}

// Additive uniform noise channel with a correlated gaussian input.
std::vector<ObservationPair> channel(std::size_t n, double rho, double d1, double d2,
                                     std::vector<SamplePair>* truth, std::uint64_t seed) {
  Rng rng = make_stream(seed, StreamTag::estimate);
  std::normal_distribution<double> g;
  const double h1 = std::sqrt(3 * d1), h2 = std::sqrt(3 * d2);
  std::uniform_real_distribution<double> n1(-h1, h1), n2(-h2, h2);
  std::vector<ObservationPair> obs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = g(rng), b = g(rng);
    const double x1 = a, x2 = rho * a + std::sqrt(1 - rho * rho) * b;
    obs[k] = {x1 + n1(rng), x2 + n2(rng)};
    if (truth) truth->push_back({x1, x2});
  }
  return obs;
}

TEST(Lmmse, PredictedErrorMatchesMonteCarlo) {
  const double d = 0.1;
  std::vector<SamplePair> x;
  const auto obs = channel(1000000, 0.9, d, d, &x, 5);
  const auto w = lmmse_weights(centered(1.0, 1.0, 0.9), d, d);
  const auto est = apply_weights(w, obs);
  double mse = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) mse += std::pow(est[k].x1 - x[k].x1, 2);
  mse /= double(x.size());
  EXPECT_NEAR(mse / w.predicted_d1, 1.0, 0.01);
}

TEST(ChannelStats, RecoversSourceMoments) {
  std::vector<SamplePair> x;
  const auto obs = channel(1000000, 0.9, 0.1, 0.2, &x, 6);
  const auto cs = estimate_stats_from_channel(obs, 0.1, 0.2);
  EXPECT_FALSE(cs.floored);
  EXPECT_LT(std::fabs(cs.stats.s11 - 1.0), 3 * cs.se_s11);
  EXPECT_LT(std::fabs(cs.stats.s22 - 1.0), 3 * cs.se_s22);
  EXPECT_LT(std::fabs(cs.stats.s12 - 0.9), 3 * cs.se_s12);
  EXPECT_LT(std::fabs(cs.stats.m1), 3.0 * std::sqrt(1.1 / 1e6));
  EXPECT_LT(std::fabs(cs.stats.m2), 3.0 * std::sqrt(1.2 / 1e6));
}

TEST(ChannelStats, ZeroNoiseGivesPlainSampleMoments) {
  const std::vector<ObservationPair> obs = {{1, 2}, {3, -1}, {-2, 0}};
  const auto cs = estimate_stats_from_channel(obs, 0.0, 0.0);
  EXPECT_NEAR(cs.stats.m1, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(cs.stats.s11, 14.0 / 3.0, 1e-15);
  EXPECT_NEAR(cs.stats.s22, 5.0 / 3.0, 1e-15);
  EXPECT_NEAR(cs.stats.s12, -1.0 / 3.0, 1e-15);
}

TEST(ChannelStats, FloorsNegativeVariance) {
  const std::vector<ObservationPair> obs = {{0.1, 0.1}, {-0.1, -0.1}};
  const auto cs = estimate_stats_from_channel(obs, 1.0, 1.0);
  EXPECT_TRUE(cs.floored);
  EXPECT_GE(cs.stats.var1(), 0.0);
  EXPECT_LE(cs.stats.cov() * cs.stats.cov(), cs.stats.var1() * cs.stats.var2() + 1e-15);
  expect_error(ErrorCode::invalid_argument, [] {
    estimate_stats_from_channel(std::vector<ObservationPair>{{0, 0}}, 0.1, 0.1);
  });
}

TEST(Apply, ZeroAndPassthroughWeights) {
  const std::vector<ObservationPair> obs = {{1.5, -2.0}, {0.25, 4.0}};
  EstimatorWeights zero;
  for (const auto& e : apply_weights(zero, obs)) {
    EXPECT_EQ(e.x1, 0.0);
    EXPECT_EQ(e.x2, 0.0);
  }
  EstimatorWeights pass;
  pass.w11 = pass.w22 = 1.0;
  pass.mean1 = 0.3;
  pass.mean2 = -0.7;
  const auto out = apply_weights(pass, obs);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    EXPECT_DOUBLE_EQ(out[k].x1, obs[k].y1);
    EXPECT_DOUBLE_EQ(out[k].x2, obs[k].y2);
  }
}

TEST(Apply, EndToEndWithDitheredQuantizer) {
  // Truncated-gaussian-like input through the real quantizer path.
  const double d = 0.1;
  std::vector<SamplePair> x;
  channel(1000000, 0.9, d, d, &x, 9);
  Rng z1 = make_stream(9, StreamTag::dither1), z2 = make_stream(9, StreamTag::dither2);
  std::vector<double> a, b;
  for (auto& p : x) {
    p.x1 = std::clamp(p.x1, -4.0, 4.0);
    p.x2 = std::clamp(p.x2, -4.0, 4.0);
    a.push_back(p.x1);
    b.push_back(p.x2);
  }
  const auto y1 = encode_fresh_dither(a, d, z1).reconstruct();
  const auto y2 = encode_fresh_dither(b, d, z2).reconstruct();
  std::vector<ObservationPair> obs(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) obs[k] = {y1[k], y2[k]};
  const auto cs = estimate_stats_from_channel(obs, d, d);
  const auto w = lmmse_weights(cs.stats, d, d);
  const auto est = apply_weights(w, obs);
  double mse1 = 0, mse2 = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mse1 += std::pow(est[k].x1 - x[k].x1, 2);
    mse2 += std::pow(est[k].x2 - x[k].x2, 2);
  }
  EXPECT_NEAR(mse1 / double(x.size()) / w.predicted_d1, 1.0, 0.02);
  EXPECT_NEAR(mse2 / double(x.size()) / w.predicted_d2, 1.0, 0.02);
}

}  // namespace
}  // namespace mtdq
