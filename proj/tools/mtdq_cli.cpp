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

// Command-line front end.
//
//   mtdq <region|quantize-demo|sw-sim|estimate|pipeline|selftest>
//        [--config PATH] [--seed U64] [--out PATH] [--format json|csv]
//        [--threads N] [--timing]
//
// Exit status: 0 success, 1 a check failed, 2 bad configuration,
// 3 runtime error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mtdq/config.hpp"
#include "mtdq/experiments.hpp"
#include "mtdq/verification.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheck = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::string out;
  std::string format;
  bool timing = false;
  // sw-sim specific
  std::optional<std::size_t> n;
  std::optional<double> eps1;
  std::optional<double> eps2;
  std::optional<std::size_t> trials;
  std::string pmf_file;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mtdq::Error(mtdq::ErrorCode::config, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// A pmf file holds one matrix row per line, whitespace separated.
std::vector<std::vector<double>> read_pmf(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::vector<double>> m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::vector<double> r;
    double v;
    while (row >> v) r.push_back(v);
    if (!row.eof()) throw mtdq::Error(mtdq::ErrorCode::config, "bad number in " + path);
    if (!r.empty()) m.push_back(std::move(r));
  }
  return m;
}

mtdq::ExperimentConfig build_config(mtdq::Mode mode, const Overrides& o) {
  mtdq::ExperimentConfig cfg;
  if (!o.config.empty()) cfg = mtdq::load_config(o.config);
  cfg.mode = mode;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (!o.out.empty()) cfg.output = o.out;
  if (!o.format.empty()) cfg.format = o.format;
  if (o.n) cfg.n = *o.n;
  if (o.eps1) cfg.eps1 = *o.eps1;
  if (o.eps2) cfg.eps2 = *o.eps2;
  if (o.trials) cfg.trials = *o.trials;
  if (!o.pmf_file.empty()) cfg.sw_pmf = read_pmf(o.pmf_file);
  mtdq::validate(cfg);
  return cfg;
}

mtdq::Report dispatch(const mtdq::ExperimentConfig& cfg) {
  switch (cfg.mode) {
    case mtdq::Mode::region: return mtdq::run_region(cfg);
    case mtdq::Mode::quantize_demo: return mtdq::run_quantize_demo(cfg);
    case mtdq::Mode::sw_sim: return mtdq::run_sw_sim(cfg);
    case mtdq::Mode::estimate: return mtdq::run_estimate(cfg);
    case mtdq::Mode::pipeline: return mtdq::run_pipeline(cfg);
    case mtdq::Mode::selftest: return mtdq::selftest_report(cfg);
  }
  return {};
}

void report_error(mtdq::Mode mode, std::uint64_t seed, std::string_view code,
                  const std::string& message) {
  mtdq::Report err;
  err["mode"] = std::string(mtdq::to_string(mode));
  err["seed"] = seed;
  err["error"] = {{"code", std::string(code)}, {"message", message}};
  std::cerr << err.dump(2) << "\n";
}

int run(mtdq::Mode mode, const Overrides& o) {
  mtdq::ExperimentConfig cfg;
  try {
    cfg = build_config(mode, o);
  } catch (const mtdq::Error& e) {
    report_error(mode, o.seed.value_or(cfg.seed), mtdq::to_string(e.code()), e.what());
    return kExitConfig;
  }

  mtdq::Report report;
  try {
    const auto t0 = std::chrono::steady_clock::now();
    report = dispatch(cfg);
    if (o.timing)
      report["wall_clock_s"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  } catch (const mtdq::Error& e) {
    report_error(cfg.mode, cfg.seed, mtdq::to_string(e.code()), e.what());
    return e.code() == mtdq::ErrorCode::config ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    report_error(cfg.mode, cfg.seed, "runtime", e.what());
    return kExitRuntime;
  }

  std::string text;
  if (cfg.format == "csv")
    text = cfg.mode == mtdq::Mode::quantize_demo ? mtdq::trace_csv(report) : mtdq::to_csv(report);
  else
    text = report.dump(2) + "\n";

  if (cfg.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(cfg.output, std::ios::binary);
    if (!out) {
      report_error(cfg.mode, cfg.seed, "io", "cannot write " + cfg.output);
      return kExitRuntime;
    }
    out << text;
  }
  return mtdq::all_checks_pass(report) ? kExitOk : kExitCheck;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dithered two-user source coding experiments"};
  app.require_subcommand(1);

  Overrides o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output path (default stdout)");
    sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--timing", o.timing, "add wall-clock seconds to the report");
  };

  struct Entry {
    const char* name;
    const char* help;
    mtdq::Mode mode;
  };
  const Entry entries[] = {
      {"region", "rate region entropies and constants", mtdq::Mode::region},
      {"quantize-demo", "trace one block through the dithered quantizer",
       mtdq::Mode::quantize_demo},
      {"sw-sim", "Slepian-Wolf binning error experiment", mtdq::Mode::sw_sim},
      {"estimate", "LMMSE post-estimation experiment", mtdq::Mode::estimate},
      {"pipeline", "full scheme end to end", mtdq::Mode::pipeline},
      {"selftest", "run the verification suite", mtdq::Mode::selftest},
  };
  std::optional<mtdq::Mode> chosen;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    common(sub);
    if (e.mode == mtdq::Mode::sw_sim) {
      sub->add_option("--n", o.n, "block length");
      sub->add_option("--eps1", o.eps1, "rate margin, user 1 (bits)");
      sub->add_option("--eps2", o.eps2, "rate margin, user 2 (bits)");
      sub->add_option("--trials", o.trials, "Monte Carlo trials");
      sub->add_option("--pmf", o.pmf_file, "joint pmf file")->check(CLI::ExistingFile);
    }
    if (e.mode == mtdq::Mode::pipeline)
      sub->add_option("--trials", o.trials, "Monte Carlo trials");
    const auto mode = e.mode;
    sub->callback([&chosen, mode] { chosen = mode; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  return run(*chosen, o);
}
