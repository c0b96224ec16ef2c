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
 *  \brief Experiment configuration in a sectioned key = value text format.
 *
 *  Example:
 *  \code
 *  [run]
 *  mode = pipeline
 *  seed = 1
 *
 *  [source]
 *  kind = truncated-gaussian
 *  A = 4
 *  sigma1 = 1
 *  sigma2 = 1
 *  rho = 0.9
 *
 *  [scheme]
 *  D1 = 0.1
 *  D2 = 0.1
 *  n = 8
 *  \endcode
 *
 *  Discrete atoms are written "x1 x2 weight" separated by commas; an
 *  explicit Slepian-Wolf law is written as rows separated by '|'.
 */

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mtdq/error.hpp"
#include "mtdq/quadrature.hpp"
#include "mtdq/source.hpp"
#include "mtdq/sw_codec.hpp"

namespace mtdq {

enum class Mode { pipeline, region, sw_sim, estimate, selftest, quantize_demo };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::pipeline: return "pipeline";
    case Mode::region: return "region";
    case Mode::sw_sim: return "sw-sim";
    case Mode::estimate: return "estimate";
    case Mode::selftest: return "selftest";
    case Mode::quantize_demo: return "quantize-demo";
  }
  return "unknown";
}

inline Mode parse_mode(std::string_view s) {
  for (auto m : {Mode::pipeline, Mode::region, Mode::sw_sim, Mode::estimate, Mode::selftest,
                 Mode::quantize_demo})
    if (to_string(m) == s) return m;
  throw Error(ErrorCode::config, "unknown mode '" + std::string(s) + "'");
}

struct SourceConfig {
  SourceKind kind = SourceKind::truncated_gaussian;
  double support = 4.0;
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double rho = 0.9;
  double mix = 0.0;
  std::vector<Atom> atoms;
  int attempt_cap = 1000;
  double min_acceptance = SamplerOptions{}.min_acceptance;

  bool operator==(const SourceConfig& o) const {
    if (atoms.size() != o.atoms.size()) return false;
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (atoms[i].x1 != o.atoms[i].x1 || atoms[i].x2 != o.atoms[i].x2 ||
          atoms[i].weight != o.atoms[i].weight)
        return false;
    return kind == o.kind && support == o.support && sigma1 == o.sigma1 && sigma2 == o.sigma2 &&
           rho == o.rho && mix == o.mix && attempt_cap == o.attempt_cap &&
           min_acceptance == o.min_acceptance;
  }
};

struct ExperimentConfig {
  Mode mode = Mode::pipeline;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string output;  // empty: stdout
  std::string format = "json";

  SourceConfig source;

  double d1 = 0.1;
  double d2 = 0.1;
  std::size_t n = 8;
  double eps1 = 0.5;
  double eps2 = 0.5;
  std::size_t trials = 500;
  std::size_t dither_grid = 32;

  QuadratureOptions quad;

  std::vector<std::vector<double>> sw_pmf;  // empty: derive from source at zero dither
  double search_cap = kDefaultSearchCap;

  std::size_t estimate_samples = 100000;

  // Forces an improved_constant evaluation with this D*/D ratio in selftest.
  std::optional<double> inject_dstar_ratio;

  bool operator==(const ExperimentConfig& o) const = default;
};

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, std::string text) {
  boost::algorithm::trim(text);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::config, "key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

inline std::uint64_t parse_uint(const std::string& key, std::string text) {
  boost::algorithm::trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
    throw Error(ErrorCode::config,
                "key '" + key + "': expected a nonnegative integer, got '" + text + "'");
  return v;
}

inline std::vector<double> parse_numbers(const std::string& key, const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::is_any_of(" \t"), boost::token_compress_on);
  std::vector<double> out;
  for (auto& p : parts) {
    boost::algorithm::trim(p);
    if (!p.empty()) out.push_back(parse_double(key, p));
  }
  return out;
}

}  // namespace detail

/// Checks value ranges; throws ErrorCode::config.
inline void validate(const ExperimentConfig& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorCode::config, what);
  };
  need(c.d1 > 0.0 && c.d2 > 0.0, "D1 and D2 must be positive");
  need(c.n >= 1 && c.n <= 32, "n must lie in [1, 32]");
  need(c.eps1 >= 0.0 && c.eps2 >= 0.0, "rate margins must be nonnegative");
  need(c.trials >= 1, "trials must be positive");
  need(c.dither_grid >= 8, "dither_grid must be at least 8");
  need(c.threads >= 1, "threads must be positive");
  need(c.format == "json" || c.format == "csv", "format must be json or csv");
  need(c.source.support > 0.0, "A must be positive");
  need(c.quad.rel_tol > 0.0 && c.quad.max_level >= 1 && c.quad.max_level <= 12,
       "quadrature settings out of range");
  need(c.search_cap >= 1.0, "search_cap must be at least 1");
  need(c.estimate_samples >= 2, "estimate samples must be at least 2");
  if (c.source.kind == SourceKind::truncated_gaussian)
    need(c.source.sigma1 > 0.0 && c.source.sigma2 > 0.0 && std::fabs(c.source.rho) < 1.0,
         "truncated-gaussian needs positive sigmas and |rho| < 1");
  if (c.source.kind == SourceKind::discrete_grid) need(!c.source.atoms.empty(), "atoms missing");
  if (c.source.kind == SourceKind::uniform_square)
    need(c.source.mix >= 0.0 && c.source.mix <= 1.0, "mix must lie in [0, 1]");
}

inline ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::config, e.what());
  }
  ExperimentConfig c;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.')))
      return boost::algorithm::trim_copy(*v);
    return std::nullopt;
  };
  auto num = [&](const std::string& path, double& dst) {
    if (auto v = get(path)) dst = detail::parse_double(path, *v);
  };
  auto count = [&](const std::string& path, auto& dst) {
    if (auto v = get(path))
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(detail::parse_uint(path, *v));
  };

  static const std::vector<std::pair<std::string, std::vector<std::string>>> known = {
      {"run", {"mode", "seed", "threads", "output", "format"}},
      {"source",
       {"kind", "A", "sigma1", "sigma2", "rho", "mix", "atoms", "attempt_cap", "min_acceptance"}},
      {"scheme", {"D1", "D2", "n", "eps1", "eps2", "trials", "dither_grid"}},
      {"quadrature", {"rel_tol", "abs_tol", "max_level"}},
      {"sw", {"pmf", "search_cap"}},
      {"estimate", {"samples"}},
      {"selftest", {"inject_dstar_ratio"}},
  };
  for (const auto& [section, body] : tree) {
    auto it = std::find_if(known.begin(), known.end(),
                           [&](const auto& k) { return k.first == section; });
    if (it == known.end()) throw Error(ErrorCode::config, "unknown section [" + section + "]");
    for (const auto& [key, _] : body)
      if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
        throw Error(ErrorCode::config, "unknown key '" + key + "' in [" + section + "]");
  }

  if (auto v = get("run.mode")) c.mode = parse_mode(*v);
  count("run.seed", c.seed);
  count("run.threads", c.threads);
  if (auto v = get("run.output")) c.output = *v;
  if (auto v = get("run.format")) c.format = *v;

  if (auto v = get("source.kind")) c.source.kind = parse_source_kind(*v);
  num("source.A", c.source.support);
  num("source.sigma1", c.source.sigma1);
  num("source.sigma2", c.source.sigma2);
  num("source.rho", c.source.rho);
  num("source.mix", c.source.mix);
  if (auto v = get("source.atoms")) {
    std::vector<std::string> items;
    boost::algorithm::split(items, *v, boost::is_any_of(","));
    for (const auto& item : items) {
      const auto xs = detail::parse_numbers("source.atoms", item);
      if (xs.size() != 3) throw Error(ErrorCode::config, "each atom needs 'x1 x2 weight'");
      c.source.atoms.push_back({xs[0], xs[1], xs[2]});
    }
  }
  if (auto v = get("source.attempt_cap"))
    c.source.attempt_cap = static_cast<int>(detail::parse_uint("source.attempt_cap", *v));
  num("source.min_acceptance", c.source.min_acceptance);

  num("scheme.D1", c.d1);
  num("scheme.D2", c.d2);
  count("scheme.n", c.n);
  num("scheme.eps1", c.eps1);
  num("scheme.eps2", c.eps2);
  count("scheme.trials", c.trials);
  count("scheme.dither_grid", c.dither_grid);

  num("quadrature.rel_tol", c.quad.rel_tol);
  num("quadrature.abs_tol", c.quad.abs_tol);
  if (auto v = get("quadrature.max_level"))
    c.quad.max_level = static_cast<int>(detail::parse_uint("quadrature.max_level", *v));

  if (auto v = get("sw.pmf")) {
    std::vector<std::string> rows;
    boost::algorithm::split(rows, *v, boost::is_any_of("|"));
    for (const auto& row : rows) c.sw_pmf.push_back(detail::parse_numbers("sw.pmf", row));
  }
  num("sw.search_cap", c.search_cap);
  count("estimate.samples", c.estimate_samples);
  if (auto v = get("selftest.inject_dstar_ratio"))
    c.inject_dstar_ratio = detail::parse_double("selftest.inject_dstar_ratio", *v);

  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Serializes every field; parse_config(to_text(c)) == c.
inline std::string to_text(const ExperimentConfig& c) {
  using detail::fmt_double;
  std::ostringstream o;
  o << "[run]\n"
    << "mode = " << to_string(c.mode) << "\n"
    << "seed = " << c.seed << "\n"
    << "threads = " << c.threads << "\n";
  if (!c.output.empty()) o << "output = " << c.output << "\n";
  o << "format = " << c.format << "\n\n";

  o << "[source]\n"
    << "kind = " << to_string(c.source.kind) << "\n"
    << "A = " << fmt_double(c.source.support) << "\n"
    << "sigma1 = " << fmt_double(c.source.sigma1) << "\n"
    << "sigma2 = " << fmt_double(c.source.sigma2) << "\n"
    << "rho = " << fmt_double(c.source.rho) << "\n"
    << "mix = " << fmt_double(c.source.mix) << "\n";
  if (!c.source.atoms.empty()) {
    o << "atoms = ";
    for (std::size_t i = 0; i < c.source.atoms.size(); ++i) {
      const auto& a = c.source.atoms[i];
      o << (i ? ", " : "") << fmt_double(a.x1) << " " << fmt_double(a.x2) << " "
        << fmt_double(a.weight);
    }
    o << "\n";
  }
  o << "attempt_cap = " << c.source.attempt_cap << "\n"
    << "min_acceptance = " << fmt_double(c.source.min_acceptance) << "\n\n";

  o << "[scheme]\n"
    << "D1 = " << fmt_double(c.d1) << "\n"
    << "D2 = " << fmt_double(c.d2) << "\n"
    << "n = " << c.n << "\n"
    << "eps1 = " << fmt_double(c.eps1) << "\n"
    << "eps2 = " << fmt_double(c.eps2) << "\n"
    << "trials = " << c.trials << "\n"
    << "dither_grid = " << c.dither_grid << "\n\n";

  o << "[quadrature]\n"
    << "rel_tol = " << fmt_double(c.quad.rel_tol) << "\n"
    << "abs_tol = " << fmt_double(c.quad.abs_tol) << "\n"
    << "max_level = " << c.quad.max_level << "\n\n";

  o << "[sw]\n";
  if (!c.sw_pmf.empty()) {
    o << "pmf = ";
    for (std::size_t r = 0; r < c.sw_pmf.size(); ++r) {
      o << (r ? " | " : "");
      for (std::size_t k = 0; k < c.sw_pmf[r].size(); ++k)
        o << (k ? " " : "") << fmt_double(c.sw_pmf[r][k]);
    }
    o << "\n";
  }
  o << "search_cap = " << fmt_double(c.search_cap) << "\n\n";

  o << "[estimate]\n"
    << "samples = " << c.estimate_samples << "\n";
  if (c.inject_dstar_ratio)
    o << "\n[selftest]\ninject_dstar_ratio = " << fmt_double(*c.inject_dstar_ratio) << "\n";
  return o.str();
}

inline JointSource make_source(const SourceConfig& s, const QuadratureOptions& quad) {
  switch (s.kind) {
    case SourceKind::truncated_gaussian:
      return JointSource::truncated_gaussian(s.support, s.sigma1, s.sigma2, s.rho, quad,
                                             {s.attempt_cap, s.min_acceptance});
    case SourceKind::discrete_grid:
      return JointSource::discrete_grid(s.support, s.atoms);
    case SourceKind::uniform_square:
      return JointSource::uniform_square(s.support, s.mix);
  }
  throw Error(ErrorCode::config, "unknown source kind");
}

}  // namespace mtdq
