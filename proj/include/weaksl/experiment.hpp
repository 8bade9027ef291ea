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

// Config-driven experiment runner: build graph and models, simulate, invert
// every receiving agent's rates, write results to disk.
//
// Output layout (all paths under the output directory):
//   graph.csv, divergence_matrix.csv, summary.json, meta.json
//   trial_<t>/trajectory.csv, estimates.json, belief_evolution.csv, weights.csv
//
// Agent and hypothesis labels in every file are 1-based.

#pragma once

#include "weaksl/models.hpp"
#include "weaksl/social_learning.hpp"
#include "weaksl/topology_inference.hpp"
#include "weaksl/weakgraph.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace weaksl {

using json = nlohmann::json;
namespace fs = std::filesystem;

enum class ModelKind { kDiversity, kGaussian };
enum class GraphSource { kRandom, kCsv };

struct ExperimentConfig {
  int hypotheses = 0;

  ModelKind model = ModelKind::kDiversity;
  std::vector<int> sending_sizes;
  std::vector<double> base_means;
  double perturb_range = 0.1;
  std::uint64_t model_seed = 0;

  std::vector<int> receiving_sizes;
  std::optional<double> receiving_true_mean;  // default: base_means[0]

  GraphSource graph_source = GraphSource::kRandom;
  std::string graph_path;
  double density = 0.5;
  std::uint64_t graph_seed = 0;

  int steps = 20000;
  std::vector<int> sample_times;  // empty: geometric grid
  int trials = 1;
  std::uint64_t seed = 0;

  double rank_tol = kDefaultRankTolerance;
  double constraint_weight = 1.0;
  std::vector<int> observation_times;  // empty: every sample time

  std::string output_dir = "out";

  std::vector<int> resolved_sample_times() const {
    return sample_times.empty() ? geometric_sample_times(steps) : sample_times;
  }
  std::vector<int> resolved_observation_times() const {
    return observation_times.empty() ? resolved_sample_times() : observation_times;
  }
};

struct ConfigResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;
  bool ok() const { return config.has_value(); }
};

namespace detail {

// Collects every problem with a JSON document instead of stopping at the first.
class FieldReader {
 public:
  explicit FieldReader(std::vector<std::string>& errors) : errors_(errors) {}

  const json* find(const json& obj, const std::string& path, bool required) {
    const json* cur = &obj;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (!cur->is_object() || !cur->contains(key)) {
        if (required) errors_.push_back("missing field '" + path + "'");
        return nullptr;
      }
      cur = &(*cur)[key];
      if (dot == std::string::npos) return cur;
      start = dot + 1;
    }
  }

  template <typename T>
  std::optional<T> get(const json& obj, const std::string& path, bool required) {
    const json* v = find(obj, path, required);
    if (!v) return std::nullopt;
    try {
      if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!v->is_number_unsigned()) throw std::invalid_argument("not a nonnegative integer");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw std::invalid_argument("not an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw std::invalid_argument("not a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v->is_string()) throw std::invalid_argument("not a string");
      }
      return v->get<T>();
    } catch (const std::exception&) {
      errors_.push_back("malformed value for '" + path + "'");
      return std::nullopt;
    }
  }

  template <typename T>
  std::optional<std::vector<T>> get_list(const json& obj, const std::string& path, bool required) {
    const json* v = find(obj, path, required);
    if (!v) return std::nullopt;
    if (!v->is_array()) {
      errors_.push_back("malformed value for '" + path + "' (expected a list)");
      return std::nullopt;
    }
    std::vector<T> out;
    for (const auto& e : *v) {
      const bool good = std::is_integral_v<T> ? e.is_number_integer() : e.is_number();
      if (!good) {
        errors_.push_back("malformed value for '" + path + "' (non-numeric entry)");
        return std::nullopt;
      }
      out.push_back(e.get<T>());
    }
    return out;
  }

  void error(std::string msg) { errors_.push_back(std::move(msg)); }

 private:
  std::vector<std::string>& errors_;
};

inline bool strictly_increasing(const std::vector<int>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] <= v[i - 1]) return false;
  return true;
}

}  // namespace detail

/// Parses a config document. Relative graph paths are resolved against base_dir.
inline ConfigResult parse_config(const json& doc, const fs::path& base_dir = {}) {
  ConfigResult out;
  auto& errors = out.errors;
  detail::FieldReader r(errors);
  ExperimentConfig c;

  if (!doc.is_object()) {
    errors.push_back("config must be a JSON object");
    return out;
  }

  if (auto h = r.get<int>(doc, "hypotheses", true)) {
    c.hypotheses = *h;
    if (*h < 2) r.error("H >= 2 required (hypotheses = " + std::to_string(*h) + ")");
  }

  if (auto kind = r.get<std::string>(doc, "sending.model", false)) {
    if (*kind == "diversity")
      c.model = ModelKind::kDiversity;
    else if (*kind == "gaussian")
      c.model = ModelKind::kGaussian;
    else
      r.error("malformed value for 'sending.model' (expected \"diversity\" or \"gaussian\")");
  }
  if (auto v = r.get_list<int>(doc, "sending.sizes", true)) c.sending_sizes = *v;
  if (auto v = r.get_list<double>(doc, "sending.base_means", true)) c.base_means = *v;
  if (auto v = r.get<double>(doc, "sending.perturb_range", false)) c.perturb_range = *v;
  if (c.model == ModelKind::kGaussian) c.perturb_range = 0.0;
  if (auto v = r.get<std::uint64_t>(doc, "sending.seed", c.model == ModelKind::kDiversity)) c.model_seed = *v;

  if (auto v = r.get_list<int>(doc, "receiving.sizes", true)) c.receiving_sizes = *v;
  if (auto v = r.get<double>(doc, "receiving.true_mean", false)) c.receiving_true_mean = *v;

  if (auto src = r.get<std::string>(doc, "graph.source", true)) {
    if (*src == "random") {
      c.graph_source = GraphSource::kRandom;
      if (auto v = r.get<double>(doc, "graph.density", false)) c.density = *v;
      if (auto v = r.get<std::uint64_t>(doc, "graph.seed", true)) c.graph_seed = *v;
      if (!(c.density > 0.0 && c.density <= 1.0)) r.error("graph.density must lie in (0, 1]");
    } else if (*src == "csv") {
      c.graph_source = GraphSource::kCsv;
      if (auto p = r.get<std::string>(doc, "graph.path", true)) {
        fs::path path(*p);
        if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
        c.graph_path = path.string();
        if (!fs::exists(path)) r.error("graph file '" + c.graph_path + "' does not exist");
      }
    } else {
      r.error("malformed value for 'graph.source' (expected \"random\" or \"csv\")");
    }
  }

  if (auto v = r.get<int>(doc, "simulation.steps", false)) c.steps = *v;
  if (c.steps < 1) r.error("simulation.steps must be >= 1");
  if (const json* st = r.find(doc, "simulation.sample_times", false)) {
    if (st->is_string()) {
      if (st->get<std::string>() != "geometric")
        r.error("malformed value for 'simulation.sample_times' (expected \"geometric\" or a list)");
    } else if (auto v = r.get_list<int>(doc, "simulation.sample_times", false)) {
      c.sample_times = *v;
    }
  }
  if (auto v = r.get<int>(doc, "simulation.trials", false)) c.trials = *v;
  if (c.trials < 1) r.error("simulation.trials must be >= 1");
  if (auto v = r.get<std::uint64_t>(doc, "simulation.seed", true)) c.seed = *v;

  if (auto v = r.get<double>(doc, "inference.rank_tol", false)) c.rank_tol = *v;
  if (!(c.rank_tol > 0.0 && c.rank_tol < 1.0)) r.error("inference.rank_tol must lie in (0, 1)");
  if (auto v = r.get<double>(doc, "inference.constraint_weight", false)) c.constraint_weight = *v;
  if (!(c.constraint_weight > 0.0)) r.error("inference.constraint_weight must be > 0");
  if (const json* ot = r.find(doc, "inference.observation_time", false)) {
    if (ot->is_number_integer())
      c.observation_times = {ot->get<int>()};
    else if (auto v = r.get_list<int>(doc, "inference.observation_time", false))
      c.observation_times = *v;
  }

  if (auto v = r.get<std::string>(doc, "output", false)) c.output_dir = *v;

  // Cross-field consistency.
  for (int n : c.sending_sizes)
    if (n < 1) r.error("sending.sizes entries must be >= 1");
  for (int n : c.receiving_sizes)
    if (n < 1) r.error("receiving.sizes entries must be >= 1");
  if (r.find(doc, "sending.sizes", false) && c.sending_sizes.empty())
    r.error("sending.sizes must list at least one sub-network");
  if (r.find(doc, "receiving.sizes", false) && c.receiving_sizes.empty())
    r.error("receiving.sizes must list at least one sub-network");
  const int s = static_cast<int>(c.sending_sizes.size());
  if (c.hypotheses >= 2 && !c.base_means.empty()) {
    if (static_cast<int>(c.base_means.size()) < std::max(c.hypotheses, s))
      r.error("sending.base_means needs at least max(H, S) = " +
              std::to_string(std::max(c.hypotheses, s)) + " entries");
    if (c.model == ModelKind::kGaussian) {
      if (s > c.hypotheses) r.error("gaussian model needs S <= H");
      const auto first = c.base_means.begin();
      const auto last = first + std::min<std::ptrdiff_t>(c.hypotheses, static_cast<std::ptrdiff_t>(c.base_means.size()));
      if (std::set<double>(first, last).size() != static_cast<std::size_t>(last - first))
        r.error("gaussian model needs distinct base_means");
    }
  }
  if (!(c.perturb_range >= 0.0)) r.error("sending.perturb_range must be >= 0");
  for (double m : c.base_means)
    if (!std::isfinite(m)) r.error("sending.base_means entries must be finite");

  if (c.steps >= 1) {
    if (!c.sample_times.empty()) {
      if (!detail::strictly_increasing(c.sample_times) || c.sample_times.front() < 1 ||
          c.sample_times.back() > c.steps)
        r.error("simulation.sample_times must be strictly increasing within [1, steps]");
    }
    const auto grid = c.resolved_sample_times();
    for (int t : c.observation_times)
      if (std::find(grid.begin(), grid.end(), t) == grid.end())
        r.error("inference.observation_time " + std::to_string(t) + " is not a sample time");
  }

  if (errors.empty()) out.config = std::move(c);
  return out;
}

/// Reads and validates a config file, listing every violation found.
inline ConfigResult validate_config(const std::string& path) {
  ConfigResult out;
  std::ifstream in(path);
  if (!in) {
    out.errors.push_back("cannot read config file '" + path + "'");
    return out;
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    out.errors.push_back(std::string("config is not valid JSON: ") + e.what());
    return out;
  }
  return parse_config(doc, fs::path(path).parent_path());
}

/// An error raised while running one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// One estimates.json record.
struct EstimateRecord {
  int agent = 0;             // 1-based
  int theta_star = 0;        // 1-based, estimated from the same rates
  int rank = 0;
  bool feasible = false;
  std::vector<double> x_hat;  // empty when not feasible
  std::vector<double> x_true;
  std::optional<double> l_inf, l2, residual;
  int observation_time = 0;
};

inline json to_json(const EstimateRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"agent", r.agent},
              {"theta_star", r.theta_star},
              {"rank", r.rank},
              {"feasible", r.feasible},
              {"x_hat", r.x_hat},
              {"x_true", r.x_true},
              {"l_inf", opt(r.l_inf)},
              {"l2", opt(r.l2)},
              {"residual", opt(r.residual)},
              {"observation_time", r.observation_time}};
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

/// Inverts one receiving agent's empirical rates at one observation time.
inline EstimateRecord estimate_agent(const Trajectory& traj, const DivergenceMatrix& d, int agent,
                                     int time, const Vector& x_true, const SystemOptions& opt) {
  EstimateRecord rec;
  rec.agent = agent + 1;
  rec.observation_time = time;
  rec.x_true = to_std(x_true);
  const Vector y_hat = empirical_rates(traj, agent, time);
  const auto theta = estimate_theta_star(y_hat);
  rec.theta_star = theta.theta + 1;
  const auto sys = build_system(d, theta.theta, y_hat, opt);
  rec.rank = sys.rank;
  rec.feasible = sys.feasible;
  if (sys.feasible) {
    const auto est = solve_topology(sys);
    const auto err = estimation_error(est.x_hat, x_true);
    rec.x_hat = to_std(est.x_hat);
    rec.l_inf = err.l_inf;
    rec.l2 = err.l2;
    rec.residual = est.residual;
  }
  return rec;
}

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  Trajectory trajectory;
  std::vector<EstimateRecord> estimates;
};

struct ExperimentReport {
  fs::path output_dir;
  Partition partition;
  Matrix X;  // true aggregate weights, S x |R|
  std::vector<TrialResult> trials;
  json summary;
  bool any_non_identifiable = false;
};

/// Builds the models named by the config.
inline ModelInstance build_models(const ExperimentConfig& c) {
  const int s = static_cast<int>(c.sending_sizes.size());
  ModelInstance mi =
      c.model == ModelKind::kGaussian
          ? structured_gaussian_model(
                std::vector<double>(c.base_means.begin(), c.base_means.begin() + c.hypotheses), s)
          : diversity_model(c.hypotheses, s, c.base_means, c.perturb_range, c.model_seed);
  if (c.receiving_true_mean) mi.suite.receiving_default.true_mean = *c.receiving_true_mean;
  return mi;
}

inline WeakGraph build_graph(const ExperimentConfig& c) {
  Partition p(c.sending_sizes, c.receiving_sizes);
  if (c.graph_source == GraphSource::kRandom) return random_weak_graph(p, c.density, c.graph_seed);
  auto g = load_graph_csv(c.graph_path);
  if (!(g.partition() == p)) throw DimensionError("graph file partition does not match the config sizes");
  return g;
}

namespace detail {

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

template <typename F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace detail

/// belief_evolution.csv (time, agent, mu_1..mu_H) and weights.csv
/// (agent, s, x_true, x_hat) for one trial. x_hat comes from the last
/// observation time and is left blank when the agent is not identifiable.
inline void emit_plot_data(const TrialResult& trial, const Partition& partition, const fs::path& dir) {
  std::ostringstream beliefs;
  beliefs.precision(17);
  const int h = trial.trajectory.snapshots.empty()
                    ? 0
                    : static_cast<int>(trial.trajectory.snapshots.front().log_mu.cols());
  beliefs << "time,agent";
  for (int t = 1; t <= h; ++t) beliefs << ",mu_" << t;
  beliefs << '\n';
  for (const auto& snap : trial.trajectory.snapshots)
    for (int k = partition.sending_agents(); k < partition.agents(); ++k) {
      beliefs << snap.time << ',' << k + 1;
      for (int t = 0; t < h; ++t) beliefs << ',' << std::exp(snap.log_mu(k, t));
      beliefs << '\n';
    }
  detail::write_text(dir / "belief_evolution.csv", beliefs.str());

  std::map<int, const EstimateRecord*> last;
  for (const auto& rec : trial.estimates) {
    auto& slot = last[rec.agent];
    if (!slot || rec.observation_time > slot->observation_time) slot = &rec;
  }
  std::ostringstream weights;
  weights.precision(17);
  weights << "agent,s,x_true,x_hat\n";
  for (const auto& [agent, rec] : last)
    for (std::size_t s = 0; s < rec->x_true.size(); ++s) {
      weights << agent << ',' << s + 1 << ',' << rec->x_true[s] << ',';
      if (rec->feasible) weights << rec->x_hat[s];
      weights << '\n';
    }
  detail::write_text(dir / "weights.csv", weights.str());
}

/// Runs the whole pipeline and writes every output file. Deterministic for a
/// given config; the wall-clock timestamp lives only in meta.json.
inline ExperimentReport run_experiment(const ExperimentConfig& c) {
  ExperimentReport report;
  report.output_dir = c.output_dir;
  fs::create_directories(report.output_dir);

  const WeakGraph g = detail::stage("graph", [&] { return build_graph(c); });
  const auto& part = g.partition();
  report.partition = part;
  const ModelInstance mi = detail::stage("models", [&] {
    auto m = build_models(c);
    m.suite.check(part);
    return m;
  });
  const LimitingProfile profile = detail::stage("limiting profile", [&] { return limiting_profile(g); });
  report.X = profile.X;

  {
    std::ostringstream os;
    write_graph_csv(os, g);
    detail::write_text(report.output_dir / "graph.csv", os.str());
    os.str({});
    write_divergence_csv(os, mi.divergence);
    detail::write_text(report.output_dir / "divergence_matrix.csv", os.str());
  }

  const SystemOptions opt{c.rank_tol, c.constraint_weight};
  const auto times = c.resolved_sample_times();
  const auto obs_times = c.resolved_observation_times();
  const int nr = part.receiving_agents();
  const int ns = part.sending_agents();

  for (int t = 0; t < c.trials; ++t) {
    TrialResult trial;
    trial.trial = t;
    trial.seed = c.seed + static_cast<std::uint64_t>(t);
    trial.trajectory = detail::stage("simulation", [&] { return simulate(g, mi.suite, c.steps, times, trial.seed); });
    detail::stage("inference", [&] {
      for (int k = 0; k < nr; ++k)
        for (int time : obs_times)
          trial.estimates.push_back(estimate_agent(trial.trajectory, mi.divergence, ns + k, time, profile.X.col(k), opt));
      return 0;
    });

    const fs::path dir = report.output_dir / ("trial_" + std::to_string(t));
    fs::create_directories(dir);
    std::ostringstream os;
    write_trajectory_csv(os, trial.trajectory);
    detail::write_text(dir / "trajectory.csv", os.str());
    json est = json::array();
    for (const auto& rec : trial.estimates) est.push_back(to_json(rec));
    detail::write_text(dir / "estimates.json", est.dump(2) + "\n");
    emit_plot_data(trial, part, dir);
    report.trials.push_back(std::move(trial));
  }

  // Summary: theory-side theta* and identifiability per receiving agent, plus
  // the estimation error at the last observation time of every trial.
  json agents = json::array();
  const int final_time = obs_times.back();
  for (int k = 0; k < nr; ++k) {
    const Vector x = profile.X.col(k);
    const auto prof = divergence_profile(mi.divergence, x);
    json a{{"agent", ns + k + 1}, {"x_true", to_std(x)}, {"divergence_profile", to_std(prof.values)}};
    if (prof.tie) {
      a["theta_star"] = nullptr;
      a["rank"] = nullptr;
      a["feasible"] = false;
      a["status"] = "AssumptionViolation";
    } else {
      const auto sys = build_system(mi.divergence, prof.theta_star, theoretical_rates(mi.divergence, x), opt);
      a["theta_star"] = prof.theta_star + 1;
      a["rank"] = sys.rank;
      a["feasible"] = sys.feasible;
      a["status"] = sys.feasible ? "Identifiable" : "NonIdentifiable";
      if (!sys.feasible) report.any_non_identifiable = true;
    }
    json per_trial = json::array();
    std::vector<double> errs;
    for (const auto& trial : report.trials)
      for (const auto& rec : trial.estimates)
        if (rec.agent == ns + k + 1 && rec.observation_time == final_time) {
          per_trial.push_back({{"trial", trial.trial},
                               {"theta_star_hat", rec.theta_star},
                               {"feasible", rec.feasible},
                               {"l_inf", rec.l_inf ? json(*rec.l_inf) : json(nullptr)}});
          if (rec.l_inf) errs.push_back(*rec.l_inf);
        }
    a["trials"] = per_trial;
    if (errs.empty()) {
      a["median_l_inf"] = nullptr;
    } else {
      std::sort(errs.begin(), errs.end());
      const auto m = errs.size() / 2;
      a["median_l_inf"] = errs.size() % 2 ? errs[m] : 0.5 * (errs[m - 1] + errs[m]);
    }
    agents.push_back(a);
  }
  report.summary = json{{"hypotheses", c.hypotheses},
                        {"sending_subnetworks", part.num_sending()},
                        {"agents_total", part.agents()},
                        {"model", c.model == ModelKind::kGaussian ? "gaussian" : "diversity"},
                        {"trials", c.trials},
                        {"steps", c.steps},
                        {"final_observation_time", final_time},
                        {"any_non_identifiable", report.any_non_identifiable},
                        {"receiving_agents", agents}};
  detail::write_text(report.output_dir / "summary.json", report.summary.dump(2) + "\n");

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  detail::write_text(report.output_dir / "meta.json", json{{"finished_at", stamp}}.dump(2) + "\n");
  return report;
}

/// One row of a rank scan: how often rank(C) took each value.
struct RankScanRow {
  int senders = 0;
  int hypotheses = 0;
  int cases = 0;
  std::map<int, int> rank_counts;
  double full_rank_fraction() const {
    const auto it = rank_counts.find(senders);
    return cases ? static_cast<double>(it == rank_counts.end() ? 0 : it->second) / cases : 0.0;
  }
};

struct RankScanOptions {
  ModelKind model = ModelKind::kGaussian;
  int s_min = 2, s_max = 4;
  int h_min = 2, h_max = 6;
  int draws = 20;
  std::uint64_t seed = 1;
  double rank_tol = kDefaultRankTolerance;
  double perturb_range = 0.1;
};

/// Tabulates rank(C) over random model draws and every choice of theta*.
/// Gaussian draws use random distinct means (S <= H only); diversity draws
/// perturb the base means 1..max(H, S).
inline std::vector<RankScanRow> rank_scan(const RankScanOptions& o) {
  std::vector<RankScanRow> rows;
  std::mt19937_64 rng(o.seed);
  for (int s = o.s_min; s <= o.s_max; ++s)
    for (int h = std::max(o.h_min, 2); h <= o.h_max; ++h) {
      if (o.model == ModelKind::kGaussian && s > h) continue;
      RankScanRow row{s, h, 0, {}};
      for (int draw = 0; draw < o.draws; ++draw) {
        ModelInstance mi;
        if (o.model == ModelKind::kGaussian) {
          mi = structured_gaussian_model(random_distinct_means(h, rng), s);
        } else {
          std::vector<double> base;
          for (int m = 1; m <= std::max(h, s); ++m) base.push_back(m);
          mi = diversity_model(h, s, base, o.perturb_range, rng());
        }
        for (int theta = 0; theta < h; ++theta) {
          const auto sys = build_system(mi.divergence, theta, Vector::Zero(h), {o.rank_tol, 1.0});
          ++row.rank_counts[sys.rank];
          ++row.cases;
        }
      }
      rows.push_back(std::move(row));
    }
  return rows;
}

}  // namespace weaksl
