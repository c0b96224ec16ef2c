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

// Acceptance runner: one PASS/FAIL line per criterion, tolerances fixed
// below. Exit status is 0 only when every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mtdq/experiments.hpp"
#include "test_support.hpp"

namespace {

using namespace mtdq;
using testing_support::RunningMoments;

constexpr double kConstantTol = 0.0005;
constexpr double kDistortionTol = 1e-9;
constexpr std::size_t kNoiseSamples = 100000;
constexpr std::size_t kMomentSamples = 1000000;
constexpr double kMomentSigmas = 3.0;
constexpr double kNormalEqTol = 1e-12;
constexpr double kMonteCarloRelTol = 0.01;
constexpr double kChainRuleTol = 1e-6;
constexpr double kBlockTol = 1e-9;
constexpr double kSwErrorCeiling = 0.10;
constexpr double kSwConverseFloor = 0.50;
constexpr std::size_t kSwTrials = 500;
constexpr std::uint64_t kSeed = 20260101;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

JointSource reference_source() { return JointSource::truncated_gaussian(4.0, 1.0, 1.0, 0.9); }

Outcome ac1() {
  const double c = redundancy_constant();
  return {std::fabs(c - 0.7546) <= kConstantTol, fmt("c = %.6f bits", c)};
}

Outcome ac2() {
  const double lo = improved_constant(0.0, 1.0);
  const double hi = improved_constant(1.0, 1.0);
  return {std::fabs(lo - 0.2546) <= kConstantTol && std::fabs(hi - 0.7546) <= kConstantTol,
          fmt("c_i(0) = %.6f, c_i(1) = %.6f", lo, hi)};
}

Outcome ac3() {
  double worst = 0.0;
  for (double d : {1e-3, 0.03, 0.1, 1.0, 5.0})
    for (int k = 0; k < 100; ++k) {
      const double x = -5.0 + 10.0 * (k + 0.5) / 100.0 + 0.0137 * k;
      worst = std::fmax(worst, std::fabs(conditional_distortion(x, d) - d));
    }
  return {worst <= kDistortionTol, fmt("max |E_z err^2 - D| = %.3e over 500 points", worst)};
}

Outcome ac4() {
  const auto src = reference_source();
  const double d1 = 0.1, d2 = 0.05;
  Rng rs = make_stream(kSeed, StreamTag::source);
  Rng r1 = make_stream(kSeed, StreamTag::dither1);
  Rng r2 = make_stream(kSeed, StreamTag::dither2);
  std::vector<double> x1, x2;
  for (const auto& p : src.sample(rs, kNoiseSamples)) {
    x1.push_back(p.x1);
    x2.push_back(p.x2);
  }
  const auto y1 = encode_fresh_dither(x1, d1, r1).reconstruct();
  const auto y2 = encode_fresh_dither(x2, d2, r2).reconstruct();
  std::vector<double> n1(kNoiseSamples), n2(kNoiseSamples);
  for (std::size_t k = 0; k < kNoiseSamples; ++k) {
    n1[k] = y1[k] - x1[k];
    n2[k] = y2[k] - x2[k];
  }
  const double h1 = 0.5 * step_for(d1), h2 = 0.5 * step_for(d2);
  const double ks1 = testing_support::ks_uniform(n1, -h1, h1);
  const double ks2 = testing_support::ks_uniform(n2, -h2, h2);
  const double crit = testing_support::ks_critical_1pct(kNoiseSamples);
  const double c1 = std::fabs(testing_support::correlation(n1, x1));
  const double c2 = std::fabs(testing_support::correlation(n2, x2));
  const double c12 = std::fabs(testing_support::correlation(n1, n2));
  const double band = 3.0 / std::sqrt(double(kNoiseSamples));
  const bool ok = ks1 < crit && ks2 < crit && c1 < band && c2 < band && c12 < band;
  return {ok, fmt("KS %.4f/%.4f (crit %.4f)", ks1, ks2, crit) +
                  fmt(", |corr| N1X1 %.4f N2X2 %.4f N1N2 %.4f", c1, c2, c12) +
                  fmt(" (band %.4f)", band)};
}

Outcome ac5() {
  const auto src = reference_source();
  const double d[2] = {0.1, 0.2};
  Rng rs = make_stream(kSeed, StreamTag::source, 1);
  Rng r1 = make_stream(kSeed, StreamTag::dither1, 1);
  Rng r2 = make_stream(kSeed, StreamTag::dither2, 1);
  std::vector<double> x[2];
  for (const auto& p : src.sample(rs, kMomentSamples)) {
    x[0].push_back(p.x1);
    x[1].push_back(p.x2);
  }
  const std::vector<double> y[2] = {encode_fresh_dither(x[0], d[0], r1).reconstruct(),
                                    encode_fresh_dither(x[1], d[1], r2).reconstruct()};
  // Each identity as a per-sample difference whose mean must vanish.
  std::vector<std::pair<std::string, std::function<double(std::size_t)>>> ids;
  for (int i = 0; i < 2; ++i) {
    const auto s = std::to_string(i + 1);
    ids.push_back({"E[Y" + s + "-Z" + s + "]", [&, i](std::size_t k) { return y[i][k] - x[i][k]; }});
    ids.push_back({"E[(Y" + s + "-Z" + s + ")^2]", [&, i](std::size_t k) {
                     return y[i][k] * y[i][k] - x[i][k] * x[i][k] - d[i];
                   }});
    ids.push_back({"E[X" + s + "(Y" + s + "-Z" + s + ")]", [&, i](std::size_t k) {
                     return x[i][k] * y[i][k] - x[i][k] * x[i][k];
                   }});
  }
  const auto prod = [&](std::size_t k) { return x[0][k] * x[1][k]; };
  ids.push_back({"E[(Y1-Z1)(Y2-Z2)]", [&](std::size_t k) { return y[0][k] * y[1][k] - prod(k); }});
  ids.push_back({"E[X1(Y2-Z2)]", [&](std::size_t k) { return x[0][k] * y[1][k] - prod(k); }});
  ids.push_back({"E[X2(Y1-Z1)]", [&](std::size_t k) { return x[1][k] * y[0][k] - prod(k); }});
  bool ok = true;
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, f] : ids) {
    RunningMoments m;
    for (std::size_t k = 0; k < kMomentSamples; ++k) m.add(f(k));
    const double z = std::fabs(m.mean()) / m.standard_error();
    ok = ok && z <= kMomentSigmas;
    if (z > worst) {
      worst = z;
      worst_name = name;
    }
  }
  return {ok, std::to_string(ids.size()) + " identities, largest deviation " +
                  fmt("%.2f", worst) + " SE (" + worst_name + ")"};
}

Outcome ac6() {
  // (a) closed form vs a pivoted-LU solve of the normal equations.
  Rng rng = make_stream(kSeed, StreamTag::demo);
  std::uniform_real_distribution<double> u(0.01, 4.0), r(-0.999, 0.999);
  double worst = 0.0;
  bool dominated = true;
  for (int t = 0; t < 2000; ++t) {
    const double v1 = u(rng), v2 = u(rng), c = r(rng) * std::sqrt(v1 * v2), d1 = u(rng),
                 d2 = u(rng);
    const SecondOrderStats s{0.0, 0.0, v1, v2, c};
    Eigen::Matrix2d lambda;
    lambda << v1 + d1, c, c, v2 + d2;
    const auto lu = lambda.fullPivLu();
    const Eigen::Vector2d r1(v1, c), r2(c, v2);
    const double e1 = v1 - r1.dot(lu.solve(r1));
    const double e2 = v2 - r2.dot(lu.solve(r2));
    const auto p = predicted_error(s, d1, d2);
    worst = std::fmax(worst, std::fmax(std::fabs(p.d1 - e1), std::fabs(p.d2 - e2)));
    dominated = dominated && p.d1 <= d1 && p.d2 <= d2;
  }
  // (b) Monte Carlo of the full quantize / de-dither / estimate chain.
  const auto e = estimate_experiment(reference_source(), 0.1, 0.1, kMomentSamples, kSeed);
  const double rel1 = std::fabs(e.mse1_oracle / e.oracle_weights.predicted_d1 - 1.0);
  const double rel2 = std::fabs(e.mse2_oracle / e.oracle_weights.predicted_d2 - 1.0);
  const bool ok = worst <= kNormalEqTol && dominated && rel1 <= kMonteCarloRelTol &&
                  rel2 <= kMonteCarloRelTol;
  return {ok, fmt("normal-eq max diff %.2e; MC rel err %.4f / %.4f", worst, rel1, rel2) +
                  fmt("; D* = %.5f", e.oracle_weights.predicted_d1)};
}

Outcome ac7() {
  const std::vector<JointSource> sources = {
      reference_source(),
      JointSource::truncated_gaussian(2.0, 1.0, 0.5, -0.4),
      JointSource::uniform_square(1.0, 0.5),
      JointSource::discrete_grid(1.0, {{0.5, 0.5, 0.25}, {-0.5, -0.5, 0.25}, {0.5, -0.5, 0.25},
                                       {-0.5, 0.5, 0.25}}),
  };
  int evaluated = 0, skipped = 0;
  double worst = 0.0;
  bool ok = true;
  for (const auto& src : sources)
    for (double d : {0.01, 0.1, 0.5})
      for (int user : {1, 2}) {
        std::vector<Reconstructor> recs = {Reconstructor::identity(),
                                           Reconstructor::dithered(d, 8)};
        for (double f : {0.25, 0.5, 0.9, 1.0}) recs.push_back(Reconstructor::midpoint(f * step_for(d)));
        for (const auto& rec : recs) {
          try {
            const auto r = entropy_bound_check(src, user, d, rec, 8);
            ++evaluated;
            worst = std::fmax(worst, r.measured);
            ok = ok && r.measured <= 0.7546;
          } catch (const Error& e) {
            if (e.code() != ErrorCode::precondition) throw;
            ++skipped;
          }
        }
      }
  return {ok && evaluated > 0, fmt("%.0f reconstructors, max H(Y|X_hat,Z) = %.4f bits", evaluated, worst) +
                                   fmt(" (%.0f outside the preconditions)", skipped)};
}

Outcome ac8() {
  const std::vector<JointSource> continuous = {
      reference_source(), JointSource::truncated_gaussian(3.0, 2.0, 0.5, 0.3),
      JointSource::truncated_gaussian(4.0, 1.0, 1.0, 0.0), JointSource::uniform_square(1.0, 0.7)};
  const std::vector<JointSource> discrete = {
      JointSource::discrete_grid(1.0, {{1, 1, 0.5}, {-1, -1, 0.5}}),
      JointSource::discrete_grid(1.0, {{0.2, 0.1, 0.4}, {-0.6, 0.9, 0.25}, {0.7, -0.7, 0.25},
                                       {0.0, 0.8, 0.1}}),
      JointSource::discrete_grid(2.0, {{1.5, -1.0, 0.6}, {-0.4, 0.4, 0.3}, {0.0, 0.0, 0.1}})};
  double chain = 0.0;
  for (const auto* set : {&continuous, &discrete})
    for (const auto& src : *set)
      for (auto [d1, d2] : {std::pair{0.05, 0.05}, std::pair{0.1, 0.3}, std::pair{0.5, 0.02}}) {
        const auto r = region(src, d1, d2, 8);
        chain = std::fmax(chain, std::fmax(std::fabs(r.h12 - r.h1 - r.h2g1),
                                           std::fabs(r.h12 - r.h2 - r.h1g2)));
      }
  double block = 0.0;
  for (const auto& src : discrete)
    for (std::size_t n = 1; n <= 3; ++n)
      for (double d : {0.02, 0.2}) {
        const auto b = block_entropy_check(src, d, 1.5 * d, n);
        block = std::fmax(block, std::fmax(std::fabs(b.block_joint - b.symbol_joint),
                                           std::fabs(b.block_conditional - b.symbol_conditional)));
      }
  return {chain <= kChainRuleTol && block <= kBlockTol,
          fmt("chain-rule max gap %.2e, block/symbol max gap %.2e", chain, block)};
}

// True when no bin-consistent pair has smaller empirical joint entropy than
// the decoded one; exhaustive over the product of full sequence spaces.
bool decoded_pair_is_minimal(const SwTrial& t) {
  const auto& code = t.code;
  const auto total1 = static_cast<std::uint64_t>(std::pow(double(code.k1), double(code.n)));
  const auto total2 = static_cast<std::uint64_t>(std::pow(double(code.k2), double(code.n)));
  const auto t1 = assign_bin(t.y1, 1, code);
  const auto t2 = assign_bin(t.y2, 2, code);
  std::vector<Sequence> c1, c2;
  for (std::uint64_t a = 0; a < total1; ++a) {
    auto s = sequence_from_code(a, code.n, code.k1);
    if (assign_bin(s, 1, code) == t1) c1.push_back(std::move(s));
  }
  for (std::uint64_t b = 0; b < total2; ++b) {
    auto s = sequence_from_code(b, code.n, code.k2);
    if (assign_bin(s, 2, code) == t2) c2.push_back(std::move(s));
  }
  for (const auto& a : c1)
    for (const auto& b : c2)
      if (empirical_joint_entropy(a, b) < t.decoded.entropy - 1e-9) return false;
  return true;
}

Outcome ac9() {
  // Two equiprobable outcomes, fully correlated: P(0,0) = P(1,1) = 1/2.
  const auto law = QuantizedJointPMF::from_matrix({{0.5, 0.0}, {0.0, 0.5}});
  const std::size_t n = 8;
  const auto margin = sw_error_experiment(law, n, 0.5, 0.5, kSwTrials, kSeed);
  // n H(Y1, Y2) = 8 bits; a quarter bit per symbol below is 6 bits.
  const double target_sum = n * entropies(law).joint - 0.25 * n;
  const unsigned b1 = static_cast<unsigned>(std::floor(target_sum / 2));
  const unsigned b2 = static_cast<unsigned>(std::floor(target_sum)) - b1;
  const auto converse = sw_error_experiment_bits(law, n, b1, b2, kSwTrials, kSeed);
  std::size_t optimal = 0;
  for (std::uint64_t t = 0; t < kSwTrials; ++t)
    optimal += decoded_pair_is_minimal(run_sw_trial(law, n, margin.b1, margin.b2, kSeed, t));
  for (std::uint64_t t = 0; t < kSwTrials; ++t)
    optimal += decoded_pair_is_minimal(run_sw_trial(law, n, b1, b2, kSeed, t));
  const bool ok = margin.error_rate <= kSwErrorCeiling && converse.error_rate >= kSwConverseFloor &&
                  optimal == 2 * kSwTrials;
  std::ostringstream o;
  o << "margin rates b=(" << margin.b1 << "," << margin.b2 << ") error " << margin.error_rate
    << " (ceiling " << kSwErrorCeiling << ", ties " << margin.tie_rate << "); sum "
    << (b1 + b2) << " bits error " << converse.error_rate << " (floor " << kSwConverseFloor
    << "); MJE optimal on " << optimal << "/" << 2 * kSwTrials << " rescans";
  return {ok, o.str()};
}

Outcome ac10() {
  ExperimentConfig c;
  c.trials = 60;
  c.dither_grid = 8;
  c.estimate_samples = 20000;
  std::vector<std::string> names;
  bool ok = true;
  for (int mode = 0; mode < 5; ++mode) {
    std::string a, b;
    for (unsigned threads : {1u, 8u}) {
      c.threads = threads;
      Report r;
      switch (mode) {
        case 0: r = run_pipeline(c); break;
        case 1: r = run_region(c); break;
        case 2: r = run_sw_sim(c); break;
        case 3: r = run_estimate(c); break;
        default: r = run_quantize_demo(c); break;
      }
      (threads == 1 ? a : b) = r.dump(2);
    }
    ok = ok && a == b;
  }
  return {ok, "pipeline, region, sw-sim, estimate, quantize-demo reports compared at 1 and 8 workers"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"AC1 redundancy constant", ac1},
      {"AC2 improved constant range", ac2},
      {"AC3 exact dithered distortion", ac3},
      {"AC4 additive-noise equivalence", ac4},
      {"AC5 channel moment identities", ac5},
      {"AC6 estimation-error formula", ac6},
      {"AC7 entropy bound", ac7},
      {"AC8 chain rule and memorylessness", ac8},
      {"AC9 universal SW codec", ac9},
      {"AC10 determinism across workers", ac10},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("raised: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s  %-36s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
