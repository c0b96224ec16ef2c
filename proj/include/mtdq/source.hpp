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
 *  \brief Bounded-support memoryless joint sources on [-A, A]^2.
 *
 *  Three families are provided:
 *  - truncated-gaussian: bivariate normal (sigma1, sigma2, rho) conditioned
 *    on the square; masses and moments by quadrature.
 *  - discrete-grid: finitely many weighted atoms; everything is exact.
 *  - uniform-square: mixture of the uniform law on the square (weight
 *    1 - mix) and the uniform law on its diagonal x1 = x2 (weight mix);
 *    masses and moments in closed form.
 */

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtdq/error.hpp"
#include "mtdq/quadrature.hpp"
#include "mtdq/quantizer.hpp"
#include "mtdq/rng.hpp"

namespace mtdq {

enum class SourceKind { truncated_gaussian, discrete_grid, uniform_square };

inline std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::truncated_gaussian: return "truncated-gaussian";
    case SourceKind::discrete_grid: return "discrete-grid";
    case SourceKind::uniform_square: return "uniform-square";
  }
  return "unknown";
}

inline SourceKind parse_source_kind(std::string_view name) {
  if (name == "truncated-gaussian") return SourceKind::truncated_gaussian;
  if (name == "discrete-grid") return SourceKind::discrete_grid;
  if (name == "uniform-square") return SourceKind::uniform_square;
  throw Error(ErrorCode::config, "unknown source kind '" + std::string(name) + "'");
}

struct TruncatedGaussianParams {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 0.0;
};

struct Atom {
  double x1 = 0.0;
  double x2 = 0.0;
  double weight = 0.0;
};

struct DiscreteGridParams {
  std::vector<Atom> atoms;
};

struct UniformSquareParams {
  double mix = 0.0;  // weight of the diagonal component
};

using SourceParams = std::variant<TruncatedGaussianParams, DiscreteGridParams, UniformSquareParams>;

struct SamplePair {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Raw (non-central) second-order statistics.
struct SecondOrderStats {
  double m1 = 0.0;
  double m2 = 0.0;
  double s11 = 0.0;  // E[X1^2]
  double s22 = 0.0;  // E[X2^2]
  double s12 = 0.0;  // E[X1 X2]

  double var1() const { return s11 - m1 * m1; }
  double var2() const { return s22 - m2 * m2; }
  double cov() const { return s12 - m1 * m2; }
};

/// Zeroth, first and second moments of a marginal restricted to an interval.
struct IntervalMoments {
  double mass = 0.0;
  double first = 0.0;
  double second = 0.0;
};

struct SamplerOptions {
  int attempt_cap = 1000;
  // Truncated-gaussian laws whose square holds less than this much of the
  // untruncated mass are rejected outright (sigma much larger than A).
  double min_acceptance = 0.25;
};

class JointSource {
 public:
  static JointSource truncated_gaussian(double support, double sigma1, double sigma2, double rho,
                                        QuadratureOptions quad = {}, SamplerOptions sampler = {}) {
    require(support > 0.0 && std::isfinite(support), ErrorCode::invalid_argument,
            "support half-width must be positive");
    require(sigma1 > 0.0 && sigma2 > 0.0, ErrorCode::invalid_argument, "sigmas must be positive");
    require(std::fabs(rho) < 1.0, ErrorCode::invalid_argument, "|rho| must be below 1");
    JointSource s(support, TruncatedGaussianParams{sigma1, sigma2, rho}, quad, sampler);
    const Interval side{-support, support};
    s.norm_ = integrate<1>(
        [&](double a, double b) { return std::array<double, 1>{s.gaussian_pdf(a, b)}; }, side,
        side, quad)[0];
    require(s.norm_ > 0.0, ErrorCode::invalid_argument, "truncated-gaussian has no mass in square");
    return s;
  }

  static JointSource discrete_grid(double support, std::vector<Atom> atoms) {
    require(support > 0.0 && std::isfinite(support), ErrorCode::invalid_argument,
            "support half-width must be positive");
    require(!atoms.empty(), ErrorCode::invalid_argument, "discrete-grid needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms) {
      require(a.weight >= 0.0, ErrorCode::invalid_argument, "negative atom weight");
      require(std::fabs(a.x1) <= support && std::fabs(a.x2) <= support,
              ErrorCode::invalid_argument, "atom outside [-A, A]^2");
      total += a.weight;
    }
    require(std::fabs(total - 1.0) <= 1e-9, ErrorCode::invalid_argument,
            "atom weights must sum to 1");
    return JointSource(support, DiscreteGridParams{std::move(atoms)}, {}, {});
  }

  static JointSource point_mass(double support, double x1, double x2) {
    return discrete_grid(support, {Atom{x1, x2, 1.0}});
  }

  static JointSource uniform_square(double support, double mix) {
    require(support > 0.0 && std::isfinite(support), ErrorCode::invalid_argument,
            "support half-width must be positive");
    require(mix >= 0.0 && mix <= 1.0, ErrorCode::invalid_argument, "mix must lie in [0, 1]");
    return JointSource(support, UniformSquareParams{mix}, {}, {});
  }

  SourceKind kind() const { return static_cast<SourceKind>(params_.index()); }
  double support() const { return support_; }
  const SourceParams& params() const { return params_; }
  const QuadratureOptions& quadrature() const { return quad_; }
  const SamplerOptions& sampler() const { return sampler_; }

  const DiscreteGridParams* as_discrete() const {
    return std::get_if<DiscreteGridParams>(&params_);
  }

  /// Mass of the untruncated gaussian inside the square (1 for other kinds).
  double acceptance() const { return kind() == SourceKind::truncated_gaussian ? norm_ : 1.0; }

  std::vector<SamplePair> sample(Rng& rng, std::size_t count) const {
    require(count >= 1, ErrorCode::invalid_argument, "sample count must be positive");
    std::vector<SamplePair> out;
    out.reserve(count);
    std::visit([&](const auto& p) { sample_into(p, rng, count, out); }, params_);
    return out;
  }

  SecondOrderStats moments() const {
    return std::visit([&](const auto& p) { return moments_of(p); }, params_);
  }

  /// Probability that (Q(X1 + z1), Q(X2 + z2)) = (i, j).
  double cell_mass(std::int64_t i, std::int64_t j, double step1, double step2, double z1,
                   double z2) const {
    require(step1 > 0.0 && step2 > 0.0, ErrorCode::invalid_argument, "steps must be positive");
    if (const auto* grid = as_discrete()) {
      double mass = 0.0;
      for (const auto& a : grid->atoms) {
        if (quantize(a.x1 + z1, step1) == i && quantize(a.x2 + z2, step2) == j) mass += a.weight;
      }
      return mass;
    }
    const Interval side{-support_, support_};
    const Interval r1 = intersect(side, cell_interval(i, step1, z1));
    const Interval r2 = intersect(side, cell_interval(j, step2, z2));
    return rect_mass(r1, r2);
  }

  /// Mass of r1 x r2 for the continuous kinds (boundaries carry no mass).
  double rect_mass(Interval r1, Interval r2) const {
    const Interval side{-support_, support_};
    r1 = intersect(side, r1);
    r2 = intersect(side, r2);
    if (r1.empty() || r2.empty()) return 0.0;
    if (const auto* g = std::get_if<TruncatedGaussianParams>(&params_)) {
      (void)g;
      return integrate<1>(
                 [&](double a, double b) { return std::array<double, 1>{gaussian_pdf(a, b)}; },
                 r1, r2, quad_)[0] /
             norm_;
    }
    if (const auto* u = std::get_if<UniformSquareParams>(&params_)) {
      const double area = r1.width() * r2.width() / (4.0 * support_ * support_);
      const Interval diag = intersect(r1, r2);
      const double line = diag.empty() ? 0.0 : diag.width() / (2.0 * support_);
      return (1.0 - u->mix) * area + u->mix * line;
    }
    throw Error(ErrorCode::invalid_argument, "rect_mass is defined for continuous sources only");
  }

  /// Moments of the marginal of user (1 or 2) over the half-open interval r.
  IntervalMoments marginal_moments(int user, Interval r) const {
    require(user == 1 || user == 2, ErrorCode::invalid_argument, "user must be 1 or 2");
    if (const auto* grid = as_discrete()) {
      IntervalMoments m;
      for (const auto& a : grid->atoms) {
        const double x = user == 1 ? a.x1 : a.x2;
        if (x >= r.lo && x < r.hi) {
          m.mass += a.weight;
          m.first += a.weight * x;
          m.second += a.weight * x * x;
        }
      }
      return m;
    }
    r = intersect({-support_, support_}, r);
    if (r.empty()) return {};
    if (kind() == SourceKind::uniform_square) {
      const double d = 1.0 / (2.0 * support_);
      return {d * r.width(), d * (r.hi * r.hi - r.lo * r.lo) / 2.0,
              d * (r.hi * r.hi * r.hi - r.lo * r.lo * r.lo) / 3.0};
    }
    const auto v = integrate<3>(
        [&](double x) {
          const double f = marginal_density(user, x);
          return std::array<double, 3>{f, f * x, f * x * x};
        },
        r, quad_);
    return {v[0], v[1], v[2]};
  }

  /// E[g(X_user)] for a smooth g.
  double marginal_expectation(int user, const std::function<double(double)>& g) const {
    require(user == 1 || user == 2, ErrorCode::invalid_argument, "user must be 1 or 2");
    if (const auto* grid = as_discrete()) {
      double acc = 0.0;
      for (const auto& a : grid->atoms) acc += a.weight * g(user == 1 ? a.x1 : a.x2);
      return acc;
    }
    return integrate<1>(
        [&](double x) { return std::array<double, 1>{g(x) * marginal_density(user, x)}; },
        {-support_, support_}, quad_)[0];
  }

  /// Density of X_user at x for the continuous kinds.
  double marginal_density(int user, double x) const {
    if (std::fabs(x) > support_) return 0.0;
    if (kind() == SourceKind::uniform_square) return 1.0 / (2.0 * support_);
    const auto& g = std::get<TruncatedGaussianParams>(params_);
    const double s_own = user == 1 ? g.sigma1 : g.sigma2;
    const double s_other = user == 1 ? g.sigma2 : g.sigma1;
    const double mean = g.rho * s_other / s_own * x;
    const double sd = s_other * std::sqrt(1.0 - g.rho * g.rho);
    const double inner = 0.5 * (std::erf((support_ - mean) / (sd * std::numbers::sqrt2)) -
                                std::erf((-support_ - mean) / (sd * std::numbers::sqrt2)));
    const double t = x / s_own;
    return std::exp(-0.5 * t * t) / (s_own * std::sqrt(2.0 * std::numbers::pi)) * inner / norm_;
  }

  /// x-interval mapped to index i by a quantizer with the given step and dither.
  static Interval cell_interval(std::int64_t i, double step, double dither) {
    const double c = static_cast<double>(i) * step;
    return {c - 0.5 * step - dither, c + 0.5 * step - dither};
  }

 private:
  JointSource(double support, SourceParams params, QuadratureOptions quad, SamplerOptions sampler)
      : support_(support), params_(std::move(params)), quad_(quad), sampler_(sampler) {}

  double gaussian_pdf(double x1, double x2) const {
    const auto& g = std::get<TruncatedGaussianParams>(params_);
    const double u = x1 / g.sigma1;
    const double v = x2 / g.sigma2;
    const double one_minus = 1.0 - g.rho * g.rho;
    const double q = (u * u - 2.0 * g.rho * u * v + v * v) / one_minus;
    return std::exp(-0.5 * q) / (2.0 * std::numbers::pi * g.sigma1 * g.sigma2 * std::sqrt(one_minus));
  }

  void sample_into(const TruncatedGaussianParams& g, Rng& rng, std::size_t count,
                   std::vector<SamplePair>& out) const {
    require(norm_ >= sampler_.min_acceptance, ErrorCode::sampler,
            "truncated-gaussian keeps only " + std::to_string(norm_) +
                " of its mass inside [-A, A]^2; sigma is too large for the support");
    std::normal_distribution<double> normal;
    const double c = std::sqrt(1.0 - g.rho * g.rho);
    for (std::size_t k = 0; k < count; ++k) {
      bool accepted = false;
      for (int attempt = 0; attempt < sampler_.attempt_cap; ++attempt) {
        const double a = normal(rng);
        const double b = normal(rng);
        const double x1 = g.sigma1 * a;
        const double x2 = g.sigma2 * (g.rho * a + c * b);
        if (std::fabs(x1) <= support_ && std::fabs(x2) <= support_) {
          out.push_back({x1, x2});
          accepted = true;
          break;
        }
      }
      require(accepted, ErrorCode::sampler, "rejection sampler exceeded its attempt cap");
    }
  }

  void sample_into(const DiscreteGridParams& grid, Rng& rng, std::size_t count,
                   std::vector<SamplePair>& out) const {
    std::vector<double> w;
    w.reserve(grid.atoms.size());
    for (const auto& a : grid.atoms) w.push_back(a.weight);
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    for (std::size_t k = 0; k < count; ++k) {
      const auto& a = grid.atoms[pick(rng)];
      out.push_back({a.x1, a.x2});
    }
  }

  void sample_into(const UniformSquareParams& u, Rng& rng, std::size_t count,
                   std::vector<SamplePair>& out) const {
    std::uniform_real_distribution<double> unit(-support_, support_);
    std::bernoulli_distribution diagonal(u.mix);
    for (std::size_t k = 0; k < count; ++k) {
      const double x1 = unit(rng);
      out.push_back({x1, diagonal(rng) ? x1 : unit(rng)});
    }
  }

  SecondOrderStats moments_of(const TruncatedGaussianParams&) const {
    const Interval side{-support_, support_};
    const auto v = integrate<6>(
        [&](double a, double b) {
          const double f = gaussian_pdf(a, b);
          return std::array<double, 6>{f, f * a, f * b, f * a * a, f * b * b, f * a * b};
        },
        side, side, quad_);
    return {v[1] / v[0], v[2] / v[0], v[3] / v[0], v[4] / v[0], v[5] / v[0]};
  }

  SecondOrderStats moments_of(const DiscreteGridParams& grid) const {
    SecondOrderStats s;
    for (const auto& a : grid.atoms) {
      s.m1 += a.weight * a.x1;
      s.m2 += a.weight * a.x2;
      s.s11 += a.weight * a.x1 * a.x1;
      s.s22 += a.weight * a.x2 * a.x2;
      s.s12 += a.weight * a.x1 * a.x2;
    }
    return s;
  }

  SecondOrderStats moments_of(const UniformSquareParams& u) const {
    const double v = support_ * support_ / 3.0;
    return {0.0, 0.0, v, v, u.mix * v};
  }

  double support_;
  SourceParams params_;
  QuadratureOptions quad_;
  SamplerOptions sampler_;
  double norm_ = 1.0;
};

}  // namespace mtdq
