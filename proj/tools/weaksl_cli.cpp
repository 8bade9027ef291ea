// Copyright 2026 The weaksl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "weaksl/weaksl.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace {

// Exit codes.
constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;
constexpr int kNonIdentifiable = 3;

bool parse_range(const std::string& text, int& lo, int& hi) {
  const auto colon = text.find(':');
  try {
    if (colon == std::string::npos) {
      lo = hi = std::stoi(text);
    } else {
      lo = std::stoi(text.substr(0, colon));
      hi = std::stoi(text.substr(colon + 1));
    }
  } catch (const std::exception&) {
    return false;
  }
  return lo <= hi;
}

int print_config_errors(const weaksl::ConfigResult& res) {
  for (const auto& e : res.errors) std::cerr << "config error: " << e << '\n';
  return kConfigError;
}

int cmd_validate(const std::string& path) {
  const auto res = weaksl::validate_config(path);
  if (!res.ok()) return print_config_errors(res);
  std::cout << path << ": valid\n";
  return kOk;
}

int cmd_run(const std::string& path, const std::optional<std::string>& out,
            const std::optional<std::uint64_t>& seed_override) {
  auto res = weaksl::validate_config(path);
  if (!res.ok()) return print_config_errors(res);
  auto cfg = *res.config;
  if (out) cfg.output_dir = *out;
  if (seed_override) cfg.seed = *seed_override;
  try {
    const auto report = weaksl::run_experiment(cfg);
    for (const auto& a : report.summary["receiving_agents"]) {
      std::cout << "agent " << a["agent"] << ": " << a["status"].get<std::string>();
      if (!a["theta_star"].is_null()) std::cout << ", theta* = " << a["theta_star"];
      if (!a["median_l_inf"].is_null()) std::cout << ", median l_inf = " << a["median_l_inf"].get<double>();
      std::cout << '\n';
    }
    std::cout << "results written to " << report.output_dir.string() << '\n';
    return report.any_non_identifiable ? kNonIdentifiable : kOk;
  } catch (const weaksl::StageError& e) {
    std::cerr << "runtime error in stage " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
  }
  return kRuntimeError;
}

int cmd_rank_scan(const std::string& model, const std::string& s_range, const std::string& h_range,
                  int draws, std::uint64_t seed, double tol, double perturb) {
  weaksl::RankScanOptions o;
  if (model == "gaussian") {
    o.model = weaksl::ModelKind::kGaussian;
  } else if (model == "diversity") {
    o.model = weaksl::ModelKind::kDiversity;
  } else {
    std::cerr << "unknown model '" << model << "'\n";
    return kConfigError;
  }
  if (!parse_range(s_range, o.s_min, o.s_max) || !parse_range(h_range, o.h_min, o.h_max) ||
      o.s_min < 1 || o.h_min < 2 || draws < 1) {
    std::cerr << "ranges must look like A:B with S >= 1, H >= 2, and draws >= 1\n";
    return kConfigError;
  }
  o.draws = draws;
  o.seed = seed;
  o.rank_tol = tol;
  o.perturb_range = perturb;

  std::printf("%3s %3s %7s  %-28s %10s  %s\n", "S", "H", "cases", "rank counts", "full rank", "flag");
  for (const auto& row : weaksl::rank_scan(o)) {
    std::string counts;
    for (const auto& [rank, n] : row.rank_counts)
      counts += (counts.empty() ? "" : " ") + std::to_string(rank) + ":" + std::to_string(n);
    const double frac = row.full_rank_fraction();
    std::printf("%3d %3d %7d  %-28s %9.1f%%  %s\n", row.senders, row.hypotheses, row.cases,
                counts.c_str(), 100.0 * frac, frac < 1.0 ? "non-identifiable" : "");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Social learning over weak graphs and recovery of sending sub-network influence"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed_override;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("--out", out, "Output directory (overrides the config)");
  run->add_option("--seed-override", seed_override, "Replace simulation.seed");

  auto* validate = app.add_subcommand("validate", "Check a config and list every problem");
  validate->add_option("config", config, "Experiment config (JSON)")->required();

  std::string model = "gaussian", s_range = "2:4", h_range = "2:6";
  int draws = 20;
  std::uint64_t seed = 1;
  double tol = weaksl::kDefaultRankTolerance;
  double perturb = 0.1;
  auto* scan = app.add_subcommand("rank-scan", "Tabulate rank(C) over random model draws");
  scan->add_option("--model", model, "gaussian | diversity")->check(CLI::IsMember({"gaussian", "diversity"}));
  scan->add_option("--s-range", s_range, "Sending sub-network counts A:B");
  scan->add_option("--h-range", h_range, "Hypothesis counts A:B");
  scan->add_option("--draws", draws, "Model draws per (S, H)");
  scan->add_option("--seed", seed, "Seed of the draw stream");
  scan->add_option("--tol", tol, "Relative singular-value threshold");
  scan->add_option("--perturb", perturb, "Perturbation half-width for diversity draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) return cmd_run(config, out, seed_override);
  if (*validate) return cmd_validate(config);
  if (*scan) return cmd_rank_scan(model, s_range, h_range, draws, seed, tol, perturb);
  return kConfigError;
}
