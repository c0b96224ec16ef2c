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
 *  \brief Quick self-verification run behind the `selftest` subcommand.
 *
 *  Every check runs in isolation. A library error inside a check marks it
 *  failed and records the error code, and the remaining checks still run.
 */

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mtdq/experiments.hpp"

namespace mtdq {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  std::string error;  // error code name when the check raised
};

namespace detail {

inline CheckResult run_check(const std::string& name, const std::function<bool(std::string&)>& f) {
  CheckResult r{name, false, {}, {}};
  try {
    r.pass = f(r.detail);
  } catch (const Error& e) {
    r.error = std::string(to_string(e.code()));
    r.detail = e.what();
  }
  return r;
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

inline std::vector<CheckResult> run_selftest(const ExperimentConfig& cfg) {
  std::vector<CheckResult> out;
  auto add = [&](const std::string& name, const std::function<bool(std::string&)>& f) {
    out.push_back(detail::run_check(name, f));
  };

  add("quantizer.exact_distortion", [&](std::string& d) {
    double worst = 0.0;
    for (double x = -3.0; x <= 3.0; x += 0.37)
      worst = std::fmax(worst, std::fabs(conditional_distortion(x, cfg.d1) - cfg.d1));
    d = "max deviation " + detail::num(worst);
    return worst <= 1e-9;
  });

  add("quantizer.zero_bias", [&](std::string& d) {
    double worst = 0.0;
    for (double x = -3.0; x <= 3.0; x += 0.37)
      worst = std::fmax(worst, std::fabs(conditional_bias(x, cfg.d1)));
    d = "max bias " + detail::num(worst);
    return worst <= 1e-9;
  });

  add("constants.redundancy", [&](std::string& d) {
    const double c = redundancy_constant();
    d = "c = " + detail::num(c);
    return std::fabs(c - 0.5 * std::log2(M_PI * std::exp(1.0) / 3.0)) < 1e-12;
  });

  add("constants.improved_endpoints", [&](std::string& d) {
    const double lo = improved_constant(0.0, 1.0);
    const double hi = improved_constant(1.0, 1.0);
    d = "c_i in [" + detail::num(lo) + ", " + detail::num(hi) + "]";
    return std::fabs(hi - redundancy_constant()) < 1e-12 && std::fabs(hi - lo - 0.5) < 1e-12;
  });

  if (cfg.inject_dstar_ratio) {
    add("constants.injected_ratio", [&](std::string& d) {
      const double c = improved_constant(*cfg.inject_dstar_ratio * cfg.d1, cfg.d1);
      d = "c_i = " + detail::num(c);
      return c <= redundancy_constant() + 1e-12;
    });
  }

  add("source.sampler", [&](std::string& d) {
    const auto src = make_source(cfg.source, cfg.quad);
    Rng rng = make_stream(cfg.seed, StreamTag::source, 0);
    const auto xs = src.sample(rng, 1000);
    bool inside = true;
    for (const auto& p : xs)
      inside = inside && std::fabs(p.x1) <= src.support() && std::fabs(p.x2) <= src.support();
    d = "acceptance " + detail::num(src.acceptance());
    return inside;
  });

  add("region.chain_rule", [&](std::string& d) {
    const auto src = make_source(cfg.source, cfg.quad);
    const auto r = region(src, cfg.d1, cfg.d2, 8, cfg.threads);
    const double gap = std::fmax(std::fabs(r.h12 - r.h1 - r.h2g1), std::fabs(r.h12 - r.h2 - r.h1g2));
    d = "gap " + detail::num(gap);
    return gap <= 1e-6 && r.h1g2 <= r.h1 + 1e-9 && r.h2g1 <= r.h2 + 1e-9;
  });

  add("region.entropy_bound", [&](std::string& d) {
    const auto src = make_source(cfg.source, cfg.quad);
    const auto exact = entropy_bound_check(src, 1, cfg.d1, Reconstructor::identity(), 16);
    const auto noisy = entropy_bound_check(src, 1, cfg.d1, Reconstructor::dithered(cfg.d1), 16);
    d = "H(Y|X,Z) = " + detail::num(exact.measured) +
        ", H(Y|X+N,Z) = " + detail::num(noisy.measured);
    return exact.pass && noisy.pass;
  });

  add("estimator.dstar_le_d", [&](std::string& d) {
    const auto src = make_source(cfg.source, cfg.quad);
    const auto p = predicted_error(src.moments(), cfg.d1, cfg.d2);
    d = "D1* = " + detail::num(p.d1) + ", D2* = " + detail::num(p.d2);
    return p.d1 <= cfg.d1 && p.d2 <= cfg.d2;
  });

  add("sw.small_law", [&](std::string& d) {
    const auto law = QuantizedJointPMF::from_matrix({{0.45, 0.05}, {0.05, 0.45}});
    const auto r = sw_error_experiment(law, 8, 0.5, 0.5, 20, cfg.seed, cfg.threads, cfg.search_cap);
    d = "error rate " + detail::num(r.error_rate);
    return r.error_rate <= 0.5;
  });

  add("sw.decoder_consistency", [&](std::string& d) {
    const auto law = QuantizedJointPMF::from_matrix({{0.4, 0.1}, {0.1, 0.4}});
    const auto t = run_sw_trial(law, 6, 4, 4, cfg.seed, 0, cfg.search_cap);
    const bool ok = assign_bin(t.decoded.y1, 1, t.code) == assign_bin(t.y1, 1, t.code) &&
                    assign_bin(t.decoded.y2, 2, t.code) == assign_bin(t.y2, 2, t.code);
    d = ok ? "decoded pair lies in the received bins" : "decoded pair outside the bins";
    return ok;
  });

  return out;
}

inline Report selftest_report(const ExperimentConfig& cfg) {
  const auto results = run_selftest(cfg);
  Report rep;
  rep["mode"] = "selftest";
  rep["seed"] = cfg.seed;
  Report checks = Report::array();
  for (const auto& r : results) {
    Report c;
    c["name"] = r.name;
    c["pass"] = r.pass;
    if (!r.detail.empty()) c["detail"] = r.detail;
    if (!r.error.empty()) c["error"] = r.error;
    checks.push_back(c);
  }
  rep["checks"] = checks;
  return rep;
}

}  // namespace mtdq
