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
 *  \brief Orchestration of the end-to-end scheme and the report-producing
 *  experiments behind each CLI subcommand.
 *
 *  Reports are ordered JSON objects. They contain nothing that depends on
 *  the worker count or on timing, so a config and seed always reproduce the
 *  same bytes.
 */

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtdq/config.hpp"
#include "mtdq/estimator.hpp"
#include "mtdq/parallel.hpp"
#include "mtdq/quantizer.hpp"
#include "mtdq/rate_region.hpp"
#include "mtdq/rng.hpp"
#include "mtdq/source.hpp"
#include "mtdq/sw_codec.hpp"

namespace mtdq {

using Report = nlohmann::ordered_json;

inline Report add_check(Report& checks, const std::string& name, bool pass,
                        const std::string& detail = {}) {
  Report c;
  c["name"] = name;
  c["pass"] = pass;
  if (!detail.empty()) c["detail"] = detail;
  checks.push_back(c);
  return c;
}

inline bool all_checks_pass(const Report& report) {
  if (!report.contains("checks")) return true;
  for (const auto& c : report["checks"])
    if (!c["pass"].get<bool>()) return false;
  return true;
}

inline Report region_json(const RateRegionSpec& r) {
  Report j;
  j["h1g2"] = r.h1g2;
  j["h2g1"] = r.h2g1;
  j["h12"] = r.h12;
  j["h1"] = r.h1;
  j["h2"] = r.h2;
  j["r1_interval"] = {r.h1g2, r.h1};
  j["r2_interval"] = {r.h2g1, r.h2};
  return j;
}

inline Report source_json(const ExperimentConfig& c) {
  Report j;
  j["kind"] = std::string(to_string(c.source.kind));
  j["A"] = c.source.support;
  switch (c.source.kind) {
    case SourceKind::truncated_gaussian:
      j["sigma1"] = c.source.sigma1;
      j["sigma2"] = c.source.sigma2;
      j["rho"] = c.source.rho;
      break;
    case SourceKind::uniform_square:
      j["mix"] = c.source.mix;
      break;
    case SourceKind::discrete_grid:
      j["atoms"] = c.source.atoms.size();
      break;
  }
  return j;
}

inline Report stats_json(const SecondOrderStats& s) {
  Report j;
  j["m1"] = s.m1;
  j["m2"] = s.m2;
  j["s11"] = s.s11;
  j["s22"] = s.s22;
  j["s12"] = s.s12;
  return j;
}

inline Report weights_json(const EstimatorWeights& w) {
  Report j;
  j["w11"] = w.w11;
  j["w12"] = w.w12;
  j["w21"] = w.w21;
  j["w22"] = w.w22;
  j["mean1"] = w.mean1;
  j["mean2"] = w.mean2;
  j["det_lambda"] = w.det_lambda;
  j["predicted_d1"] = w.predicted_d1;
  j["predicted_d2"] = w.predicted_d2;
  return j;
}

inline Report constants_json(const PredictedError& dstar, double d1, double d2) {
  Report j;
  j["c"] = redundancy_constant();
  j["c1"] = improved_constant(std::fmin(dstar.d1, d1), d1);
  j["c2"] = improved_constant(std::fmin(dstar.d2, d2), d2);
  return j;
}

/// `region` subcommand.
inline Report run_region(const ExperimentConfig& cfg) {
  const auto source = make_source(cfg.source, cfg.quad);
  const auto r = region(source, cfg.d1, cfg.d2, cfg.dither_grid, cfg.threads);
  const auto dstar = predicted_error(source.moments(), cfg.d1, cfg.d2);
  const auto line = outer_sum_line(r);
  Report rep;
  rep["mode"] = "region";
  rep["seed"] = cfg.seed;
  rep["source"] = source_json(cfg);
  rep["D1"] = cfg.d1;
  rep["D2"] = cfg.d2;
  rep["dither_grid"] = cfg.dither_grid;
  rep["region"] = region_json(r);
  rep["constants"] = constants_json(dstar, cfg.d1, cfg.d2);
  rep["predicted_dstar"] = {{"d1", dstar.d1}, {"d2", dstar.d2}};
  rep["outer_sum_line"] = {{"value", line.value}, {"reported", line.reported},
                           {"clamped", line.clamped}};
  Report checks = Report::array();
  add_check(checks, "region.chain_rule",
            std::fabs(r.h12 - r.h1 - r.h2g1) <= 1e-6 && std::fabs(r.h12 - r.h2 - r.h1g2) <= 1e-6);
  add_check(checks, "region.conditioning_reduces_entropy",
            r.h1g2 <= r.h1 + 1e-9 && r.h2g1 <= r.h2 + 1e-9);
  rep["checks"] = checks;
  return rep;
}

/// `quantize-demo` subcommand: one block through the dithered quantizer.
inline Report run_quantize_demo(const ExperimentConfig& cfg) {
  const auto source = make_source(cfg.source, cfg.quad);
  Rng src = make_stream(cfg.seed, StreamTag::demo, 0);
  Rng dz1 = make_stream(cfg.seed, StreamTag::dither1, 0);
  Rng dz2 = make_stream(cfg.seed, StreamTag::dither2, 0);
  const auto xs = source.sample(src, cfg.n);
  const auto d1 = draw_dither(cfg.d1, dz1);
  const auto d2 = draw_dither(cfg.d2, dz2);
  std::vector<double> x1, x2;
  for (const auto& p : xs) {
    x1.push_back(p.x1);
    x2.push_back(p.x2);
  }
  const auto q1 = encode_block(x1, d1);
  const auto q2 = encode_block(x2, d2);
  const auto r1 = reconstruct(q1);
  const auto r2 = reconstruct(q2);
  Report rep;
  rep["mode"] = "quantize-demo";
  rep["seed"] = cfg.seed;
  rep["step1"] = d1.step;
  rep["step2"] = d2.step;
  rep["z1"] = d1.offset;
  rep["z2"] = d2.offset;
  Report rows = Report::array();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    Report row;
    row["k"] = k;
    row["x1"] = x1[k];
    row["index1"] = q1.indices[k];
    row["xhat1"] = r1[k];
    row["err1"] = r1[k] - x1[k];
    row["x2"] = x2[k];
    row["index2"] = q2.indices[k];
    row["xhat2"] = r2[k];
    row["err2"] = r2[k] - x2[k];
    rows.push_back(row);
  }
  rep["trace"] = rows;
  Report checks = Report::array();
  bool radius = true;
  for (std::size_t k = 0; k < xs.size(); ++k)
    radius = radius && std::fabs(r1[k] - x1[k]) <= 0.5 * d1.step + 1e-12 &&
             std::fabs(r2[k] - x2[k]) <= 0.5 * d2.step + 1e-12;
  add_check(checks, "quantizer.cell_radius", radius);
  rep["checks"] = checks;
  return rep;
}

/// The law handed to `sw-sim`: explicit matrix, or the quantized source at
/// zero dither.
inline QuantizedJointPMF sw_law(const ExperimentConfig& cfg) {
  if (!cfg.sw_pmf.empty()) return QuantizedJointPMF::from_matrix(cfg.sw_pmf);
  const auto source = make_source(cfg.source, cfg.quad);
  return joint_pmf_given_dithers(source, step_for(cfg.d1), step_for(cfg.d2), 0.0, 0.0).trimmed();
}

/// `sw-sim` subcommand.
inline Report run_sw_sim(const ExperimentConfig& cfg) {
  const auto law = sw_law(cfg);
  const auto r = sw_error_experiment(law, cfg.n, cfg.eps1, cfg.eps2, cfg.trials, cfg.seed,
                                     cfg.threads, cfg.search_cap);
  Report rep;
  rep["mode"] = "sw-sim";
  rep["seed"] = cfg.seed;
  rep["n"] = r.n;
  rep["b1"] = r.b1;
  rep["b2"] = r.b2;
  rep["error_rate"] = r.error_rate;
  rep["tie_rate"] = r.tie_rate;
  rep["trials"] = r.trials;
  rep["alphabet"] = {law.rows, law.cols};
  rep["entropies"] = {{"h1g2", r.h1g2}, {"h2g1", r.h2g1}, {"h12", r.h12}};
  rep["target_rates"] = {{"r1", r.target_r1}, {"r2", r.target_r2}};
  rep["realized_rates"] = {{"r1", static_cast<double>(r.b1) / static_cast<double>(r.n)},
                           {"r2", static_cast<double>(r.b2) / static_cast<double>(r.n)}};
  rep["mean_candidate_pairs"] = r.mean_candidate_pairs;
  return rep;
}

struct EstimateOutcome {
  ChannelStats universal;
  SecondOrderStats oracle;
  EstimatorWeights universal_weights;
  EstimatorWeights oracle_weights;
  double raw_mse1 = 0.0;
  double raw_mse2 = 0.0;
  double mse1_universal = 0.0;
  double mse2_universal = 0.0;
  double mse1_oracle = 0.0;
  double mse2_oracle = 0.0;
  // Orthogonality residuals E[(X1 - X1_hat)(Y_j - Z_j)] under oracle weights.
  double orth11 = 0.0;
  double orth12 = 0.0;
  double orth_se = 0.0;
};

/// Monte Carlo of the estimation stage with a fresh dither per sample.
inline EstimateOutcome estimate_experiment(const JointSource& source, double d1, double d2,
                                           std::size_t samples, std::uint64_t seed) {
  Rng src = make_stream(seed, StreamTag::estimate, 0);
  Rng dz1 = make_stream(seed, StreamTag::dither1, 0);
  Rng dz2 = make_stream(seed, StreamTag::dither2, 0);
  const auto xs = source.sample(src, samples);
  std::vector<double> x1(samples), x2(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    x1[k] = xs[k].x1;
    x2[k] = xs[k].x2;
  }
  const auto y1 = encode_fresh_dither(x1, d1, dz1).reconstruct();
  const auto y2 = encode_fresh_dither(x2, d2, dz2).reconstruct();
  std::vector<ObservationPair> obs(samples);
  for (std::size_t k = 0; k < samples; ++k) obs[k] = {y1[k], y2[k]};

  EstimateOutcome out;
  out.universal = estimate_stats_from_channel(obs, d1, d2);
  out.oracle = source.moments();
  out.universal_weights = lmmse_weights(out.universal.stats, d1, d2);
  out.oracle_weights = lmmse_weights(out.oracle, d1, d2);
  const auto est_u = apply_weights(out.universal_weights, obs);
  const auto est_o = apply_weights(out.oracle_weights, obs);
  double e11 = 0, e12 = 0;
  std::vector<double> prod;
  prod.reserve(samples);
  for (std::size_t k = 0; k < samples; ++k) {
    out.raw_mse1 += (y1[k] - x1[k]) * (y1[k] - x1[k]);
    out.raw_mse2 += (y2[k] - x2[k]) * (y2[k] - x2[k]);
    out.mse1_universal += std::pow(est_u[k].x1 - x1[k], 2);
    out.mse2_universal += std::pow(est_u[k].x2 - x2[k], 2);
    out.mse1_oracle += std::pow(est_o[k].x1 - x1[k], 2);
    out.mse2_oracle += std::pow(est_o[k].x2 - x2[k], 2);
    const double e = x1[k] - est_o[k].x1;
    e11 += e * y1[k];
    e12 += e * y2[k];
    prod.push_back(e * y1[k]);
  }
  const double n = static_cast<double>(samples);
  out.raw_mse1 /= n;
  out.raw_mse2 /= n;
  out.mse1_universal /= n;
  out.mse2_universal /= n;
  out.mse1_oracle /= n;
  out.mse2_oracle /= n;
  out.orth11 = e11 / n;
  out.orth12 = e12 / n;
  double var = 0.0;
  for (double p : prod) var += (p - out.orth11) * (p - out.orth11);
  out.orth_se = std::sqrt(var / (n - 1) / n);
  return out;
}

/// `estimate` subcommand.
inline Report run_estimate(const ExperimentConfig& cfg) {
  const auto source = make_source(cfg.source, cfg.quad);
  const auto e = estimate_experiment(source, cfg.d1, cfg.d2, cfg.estimate_samples, cfg.seed);
  Report rep;
  rep["mode"] = "estimate";
  rep["seed"] = cfg.seed;
  rep["source"] = source_json(cfg);
  rep["D1"] = cfg.d1;
  rep["D2"] = cfg.d2;
  rep["samples"] = cfg.estimate_samples;
  rep["oracle_stats"] = stats_json(e.oracle);
  Report uni = stats_json(e.universal.stats);
  uni["se_s11"] = e.universal.se_s11;
  uni["se_s22"] = e.universal.se_s22;
  uni["se_s12"] = e.universal.se_s12;
  uni["floored"] = e.universal.floored;
  rep["universal_stats"] = uni;
  rep["oracle_weights"] = weights_json(e.oracle_weights);
  rep["universal_weights"] = weights_json(e.universal_weights);
  rep["empirical"] = {{"raw_mse1", e.raw_mse1},
                      {"raw_mse2", e.raw_mse2},
                      {"mse1_oracle", e.mse1_oracle},
                      {"mse2_oracle", e.mse2_oracle},
                      {"mse1_universal", e.mse1_universal},
                      {"mse2_universal", e.mse2_universal}};
  Report checks = Report::array();
  add_check(checks, "estimator.dstar_le_d",
            e.oracle_weights.predicted_d1 <= cfg.d1 && e.oracle_weights.predicted_d2 <= cfg.d2);
  add_check(checks, "estimator.no_flooring", !e.universal.floored,
            e.universal.floored ? "moment inversion went negative; more samples needed" : "");
  rep["checks"] = checks;
  return rep;
}

struct PipelineTrial {
  std::vector<SamplePair> x;
  std::vector<ObservationPair> y;  // de-dithered decoder output
  unsigned b1 = 0;
  unsigned b2 = 0;
  bool error = false;
  bool tie = false;
  bool consistent = true;
};

/// Runs one block: sample, dither and quantize, bin, decode, de-dither.
inline PipelineTrial run_pipeline_trial(const JointSource& source, const ExperimentConfig& cfg,
                                        const RatePlan& plan, std::uint64_t t) {
  Rng src = make_stream(cfg.seed, StreamTag::source, t);
  Rng dz1 = make_stream(cfg.seed, StreamTag::dither1, t);
  Rng dz2 = make_stream(cfg.seed, StreamTag::dither2, t);
  PipelineTrial out;
  out.x = source.sample(src, cfg.n);
  const auto d1 = draw_dither(cfg.d1, dz1);
  const auto d2 = draw_dither(cfg.d2, dz2);
  std::vector<double> x1, x2;
  for (const auto& p : out.x) {
    x1.push_back(p.x1);
    x2.push_back(p.x2);
  }
  const auto q1 = encode_block(x1, d1);
  const auto q2 = encode_block(x2, d2);
  // Finite alphabets: the cells with positive probability under these
  // dithers, widened to cover the block if a tail cell underflowed to zero.
  const auto law = joint_pmf_given_dithers(source, d1.step, d2.step, d1.offset, d2.offset).trimmed();
  IndexRange a1{law.lo1, law.lo1 + static_cast<std::int64_t>(law.rows) - 1};
  IndexRange a2{law.lo2, law.lo2 + static_cast<std::int64_t>(law.cols) - 1};
  for (std::size_t k = 0; k < cfg.n; ++k) {
    a1 = {std::min(a1.lo, q1.indices[k]), std::max(a1.hi, q1.indices[k])};
    a2 = {std::min(a2.lo, q2.indices[k]), std::max(a2.hi, q2.indices[k])};
  }
  Sequence s1(cfg.n), s2(cfg.n);
  for (std::size_t k = 0; k < cfg.n; ++k) {
    s1[k] = static_cast<std::uint32_t>(q1.indices[k] - a1.lo);
    s2[k] = static_cast<std::uint32_t>(q2.indices[k] - a2.lo);
  }
  out.b1 = bin_bits(plan.r1, cfg.n, a1.size());
  out.b2 = bin_bits(plan.r2, cfg.n, a2.size());
  const auto code = BinningCode::make(cfg.n, a1.size(), a2.size(), out.b1, out.b2,
                                      derive_seed(cfg.seed, StreamTag::binning, t));
  const auto t1 = assign_bin(s1, 1, code);
  const auto t2 = assign_bin(s2, 2, code);
  const auto dec = mje_decode(code, t1, t2, cfg.search_cap);
  out.consistent = assign_bin(dec.y1, 1, code) == t1 && assign_bin(dec.y2, 2, code) == t2;
  out.error = dec.y1 != s1 || dec.y2 != s2;
  out.tie = dec.tie;
  QuantizedBlock r1{{}, d1.step, d1.offset}, r2{{}, d2.step, d2.offset};
  for (std::size_t k = 0; k < cfg.n; ++k) {
    r1.indices.push_back(static_cast<std::int64_t>(dec.y1[k]) + a1.lo);
    r2.indices.push_back(static_cast<std::int64_t>(dec.y2[k]) + a2.lo);
  }
  const auto y1 = reconstruct(r1);
  const auto y2 = reconstruct(r2);
  for (std::size_t k = 0; k < cfg.n; ++k) out.y.push_back({y1[k], y2[k]});
  return out;
}

/// `pipeline` subcommand: the full two-user scheme followed by estimation.
inline Report run_pipeline(const ExperimentConfig& cfg) {
  const auto source = make_source(cfg.source, cfg.quad);
  const auto r = region(source, cfg.d1, cfg.d2, cfg.dither_grid, cfg.threads);
  const auto plan = plan_rates({r.h12, r.h1, r.h2}, cfg.eps1, cfg.eps2);

  std::vector<PipelineTrial> trials(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
    trials[t] = run_pipeline_trial(source, cfg, plan, t);
  });

  std::vector<ObservationPair> all_obs;
  std::size_t errors = 0, ties = 0, inconsistent = 0, clean_samples = 0;
  double bits1 = 0, bits2 = 0;
  double pre1 = 0, pre2 = 0, pre1_clean = 0, pre2_clean = 0;
  for (const auto& t : trials) {
    errors += t.error;
    ties += t.tie;
    inconsistent += !t.consistent;
    bits1 += t.b1;
    bits2 += t.b2;
    for (std::size_t k = 0; k < t.x.size(); ++k) {
      const double e1 = std::pow(t.y[k].y1 - t.x[k].x1, 2);
      const double e2 = std::pow(t.y[k].y2 - t.x[k].x2, 2);
      pre1 += e1;
      pre2 += e2;
      if (!t.error) {
        pre1_clean += e1;
        pre2_clean += e2;
        ++clean_samples;
      }
      all_obs.push_back(t.y[k]);
    }
  }
  const double total = static_cast<double>(all_obs.size());
  const double clean = static_cast<double>(clean_samples);

  const auto universal = estimate_stats_from_channel(all_obs, cfg.d1, cfg.d2);
  const auto weights = lmmse_weights(universal.stats, cfg.d1, cfg.d2);
  const auto oracle = source.moments();
  const auto dstar_oracle = predicted_error(oracle, cfg.d1, cfg.d2);
  const auto est = apply_weights(weights, all_obs);
  double post1 = 0, post2 = 0, post1_clean = 0, post2_clean = 0;
  std::size_t idx = 0;
  for (const auto& t : trials) {
    for (std::size_t k = 0; k < t.x.size(); ++k, ++idx) {
      const double e1 = std::pow(est[idx].x1 - t.x[k].x1, 2);
      const double e2 = std::pow(est[idx].x2 - t.x[k].x2, 2);
      post1 += e1;
      post2 += e2;
      if (!t.error) {
        post1_clean += e1;
        post2_clean += e2;
      }
    }
  }
  auto ratio = [](double a, double b) { return b > 0 ? a / b : 0.0; };

  Report rep;
  rep["mode"] = "pipeline";
  rep["seed"] = cfg.seed;
  rep["source"] = source_json(cfg);
  rep["D1"] = cfg.d1;
  rep["D2"] = cfg.d2;
  rep["n"] = cfg.n;
  rep["trials"] = cfg.trials;
  rep["region"] = region_json(r);
  rep["constants"] = constants_json(dstar_oracle, cfg.d1, cfg.d2);
  const auto line = outer_sum_line(r);
  rep["outer_sum_line"] = {{"value", line.value}, {"reported", line.reported},
                           {"clamped", line.clamped}};
  rep["rates"] = {{"target_r1", plan.r1},
                  {"target_r2", plan.r2},
                  {"realized_r1", bits1 / static_cast<double>(cfg.trials * cfg.n)},
                  {"realized_r2", bits2 / static_cast<double>(cfg.trials * cfg.n)}};
  rep["sw"] = {{"error_rate", static_cast<double>(errors) / static_cast<double>(cfg.trials)},
               {"tie_rate", static_cast<double>(ties) / static_cast<double>(cfg.trials)}};
  rep["distortion"] = {{"pre_d1", pre1 / total},
                       {"pre_d2", pre2 / total},
                       {"pre_d1_error_free", ratio(pre1_clean, clean)},
                       {"pre_d2_error_free", ratio(pre2_clean, clean)},
                       {"post_d1", post1 / total},
                       {"post_d2", post2 / total},
                       {"post_d1_error_free", ratio(post1_clean, clean)},
                       {"post_d2_error_free", ratio(post2_clean, clean)},
                       {"predicted_d1_oracle", dstar_oracle.d1},
                       {"predicted_d2_oracle", dstar_oracle.d2},
                       {"predicted_d1_universal", weights.predicted_d1},
                       {"predicted_d2_universal", weights.predicted_d2}};
  rep["universal_stats"] = stats_json(universal.stats);
  rep["oracle_stats"] = stats_json(oracle);
  rep["estimator"] = weights_json(weights);
  Report checks = Report::array();
  add_check(checks, "region.chain_rule",
            std::fabs(r.h12 - r.h1 - r.h2g1) <= 1e-6 && std::fabs(r.h12 - r.h2 - r.h1g2) <= 1e-6);
  add_check(checks, "sw.decoder_consistency", inconsistent == 0);
  add_check(checks, "estimator.dstar_le_d",
            dstar_oracle.d1 <= cfg.d1 && dstar_oracle.d2 <= cfg.d2 &&
                weights.predicted_d1 <= cfg.d1 && weights.predicted_d2 <= cfg.d2);
  rep["checks"] = checks;
  return rep;
}

/// Flattens scalar leaves into one CSV header line and one value line.
inline std::string to_csv(const Report& rep) {
  std::vector<std::pair<std::string, std::string>> cols;
  auto walk = [&](auto&& self, const Report& j, const std::string& prefix) -> void {
    if (j.is_object()) {
      for (auto it = j.begin(); it != j.end(); ++it)
        self(self, it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
    } else if (j.is_array()) {
      for (std::size_t i = 0; i < j.size(); ++i) {
        const auto& e = j[i];
        if (e.is_object() && e.contains("name"))
          self(self, e["pass"], prefix + "." + e["name"].get<std::string>());
        else
          self(self, e, prefix + "." + std::to_string(i));
      }
    } else {
      cols.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
    }
  };
  walk(walk, rep, "");
  std::ostringstream o;
  for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i].first;
  o << "\n";
  for (std::size_t i = 0; i < cols.size(); ++i) o << (i ? "," : "") << cols[i].second;
  o << "\n";
  return o.str();
}

/// Multi-row CSV for the quantizer trace.
inline std::string trace_csv(const Report& rep) {
  std::ostringstream o;
  o << "k,x1,index1,xhat1,err1,x2,index2,xhat2,err2\n";
  for (const auto& row : rep["trace"]) {
    bool first = true;
    for (auto it = row.begin(); it != row.end(); ++it) {
      o << (first ? "" : ",") << it.value().dump();
      first = false;
    }
    o << "\n";
  }
  return o.str();
}

}  // namespace mtdq
