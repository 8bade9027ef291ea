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

// Diffusion social learning with log-linear combination. Each step, every
// agent folds a private observation into its belief (Bayes), then replaces
// its belief with the normalized geometric mean of its neighbors'
// intermediate beliefs, weighted by its column of A. Beliefs are kept as
// logarithms; they decay exponentially and would underflow otherwise.

#pragma once

#include "weaksl/linalg.hpp"
#include "weaksl/models.hpp"
#include "weaksl/weakgraph.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace weaksl {

/// A belief over H hypotheses stored as log-probabilities with logsumexp = 0.
class BeliefState {
 public:
  static BeliefState uniform(int hypotheses) {
    return BeliefState(Vector::Constant(hypotheses, -std::log(static_cast<double>(hypotheses))));
  }

  /// Normalizes arbitrary finite log-weights.
  static BeliefState from_log_weights(Vector log_weights) {
    if (!log_weights.allFinite()) throw Error("belief log-weights must be finite");
    const double z = logsumexp(log_weights);
    log_weights.array() -= z;
    return BeliefState(std::move(log_weights));
  }

  const Vector& log_belief() const { return log_; }
  Vector probabilities() const { return log_.array().exp(); }
  int hypotheses() const { return static_cast<int>(log_.size()); }

 private:
  explicit BeliefState(Vector v) : log_(std::move(v)) {}
  Vector log_;
};

/// psi(theta) proportional to mu(theta) L(xi | theta).
inline BeliefState bayesian_update(const BeliefState& prior, const Vector& log_likelihoods) {
  if (log_likelihoods.size() != prior.hypotheses())
    throw DimensionError("likelihood vector length must equal H");
  return BeliefState::from_log_weights(prior.log_belief() + log_likelihoods);
}

struct WeightedBelief {
  double weight;
  BeliefState psi;
};

class InvalidColumn : public Error {
 public:
  using Error::Error;
};

/// log mu(theta) = sum_l a(l, k) log psi_l(theta), renormalized.
inline BeliefState combine_step(std::span<const WeightedBelief> neighbors) {
  if (neighbors.empty()) throw InvalidColumn("combination needs at least one neighbor");
  double total = 0.0;
  Vector acc = Vector::Zero(neighbors.front().psi.hypotheses());
  for (const auto& n : neighbors) {
    if (n.weight < 0.0) throw InvalidColumn("negative combination weight");
    if (n.psi.hypotheses() != acc.size()) throw DimensionError("neighbor beliefs differ in H");
    total += n.weight;
    acc += n.weight * n.psi.log_belief();
  }
  if (std::abs(total - 1.0) > kColumnSumTolerance)
    throw InvalidColumn("combination weights sum to " + std::to_string(total) + ", not 1");
  return BeliefState::from_log_weights(std::move(acc));
}

/// Beliefs of all agents at one recorded time, rows = agents, cols = hypotheses.
struct Snapshot {
  int time = 0;
  Matrix log_psi;
  Matrix log_mu;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  int horizon = 0;
  std::uint64_t seed = 0;
  // Receiving agents (0-based) whose average divergence has no unique
  // minimizer; their limiting hypothesis is not certified.
  std::vector<int> uncertified_agents;

  const Snapshot& at(int time) const {
    for (const auto& s : snapshots)
      if (s.time == time) return s;
    throw LookupError("time " + std::to_string(time) + " was not recorded");
  }

  std::vector<int> times() const {
    std::vector<int> out;
    for (const auto& s : snapshots) out.push_back(s.time);
    return out;
  }
};

/// {first, 2 first, 4 first, ...} below horizon, then horizon itself.
inline std::vector<int> geometric_sample_times(int horizon, int first = 10) {
  std::vector<int> out;
  for (long t = first; t < horizon; t *= 2) out.push_back(static_cast<int>(t));
  out.push_back(horizon);
  return out;
}

/// Runs T synchronous steps from uniform beliefs. Observations are drawn agent
/// by agent in index order at every step from one stream seeded with `seed`.
inline Trajectory simulate(const WeakGraph& g, const ModelSuite& suite, int steps,
                           std::vector<int> sample_times, std::uint64_t seed) {
  const auto& part = g.partition();
  suite.check(part);
  if (steps < 1) throw DimensionError("simulation needs at least one step");
  if (sample_times.empty()) sample_times = geometric_sample_times(steps);
  for (std::size_t i = 0; i < sample_times.size(); ++i) {
    if (sample_times[i] < 1 || sample_times[i] > steps)
      throw DimensionError("sample times must lie in [1, T]");
    if (i && sample_times[i] <= sample_times[i - 1])
      throw DimensionError("sample times must be strictly increasing");
  }

  Trajectory traj;
  traj.horizon = steps;
  traj.seed = seed;
  {
    const auto profile = limiting_profile(g);
    const auto d = divergence_matrix(suite);
    for (int k = 0; k < part.receiving_agents(); ++k)
      if (divergence_profile(d, profile.X.col(k)).tie)
        traj.uncertified_agents.push_back(part.sending_agents() + k);
  }

  const int n = g.agents();
  const int h = suite.hypotheses.size;
  std::vector<const AgentModel*> models;
  for (int k = 0; k < n; ++k) models.push_back(&suite.model_for(k, part));
  Matrix lik_means(n, h);
  for (int k = 0; k < n; ++k)
    for (int t = 0; t < h; ++t) lik_means(k, t) = models[static_cast<std::size_t>(k)]->likelihood_means[static_cast<std::size_t>(t)];

  const Matrix a_t = g.matrix().transpose();
  Matrix log_mu = Matrix::Constant(n, h, -std::log(static_cast<double>(h)));
  Matrix log_psi(n, h);
  std::mt19937_64 rng(seed);

  auto normalize_rows = [](Matrix& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double top = m.row(r).maxCoeff();
      const double lse = top + std::log((m.row(r).array() - top).exp().sum());
      m.row(r).array() -= lse;
    }
  };

  std::size_t next_sample = 0;
  for (int i = 1; i <= steps; ++i) {
    for (int k = 0; k < n; ++k) {
      const double xi = sample_observation(*models[static_cast<std::size_t>(k)], rng);
      log_psi.row(k) = log_mu.row(k).array() - 0.5 * (xi - lik_means.row(k).array()).square();
    }
    normalize_rows(log_psi);
    log_mu.noalias() = a_t * log_psi;
    normalize_rows(log_mu);
    if (next_sample < sample_times.size() && sample_times[next_sample] == i) {
      traj.snapshots.push_back({i, log_psi, log_mu});
      ++next_sample;
    }
  }
  return traj;
}

/// y_hat(theta) = log psi_{k,i}(theta) / i.
inline Vector empirical_rates(const Trajectory& traj, int agent, int time) {
  const auto& snap = traj.at(time);
  if (agent < 0 || agent >= snap.log_psi.rows()) throw LookupError("agent index out of range");
  return snap.log_psi.row(agent).transpose() / static_cast<double>(time);
}

/// Same ratio computed from the combined belief mu instead of psi.
inline Vector empirical_rates_from_mu(const Trajectory& traj, int agent, int time) {
  const auto& snap = traj.at(time);
  if (agent < 0 || agent >= snap.log_mu.rows()) throw LookupError("agent index out of range");
  return snap.log_mu.row(agent).transpose() / static_cast<double>(time);
}

struct ThetaEstimate {
  int theta = 0;
  bool ambiguous = false;
};

/// argmax of y_hat; a runner-up within 1e-9 (scaled) makes the answer
/// ambiguous and the smallest tied index is returned.
inline ThetaEstimate estimate_theta_star(const Vector& y_hat) {
  if (y_hat.size() == 0) throw DimensionError("empty rate vector");
  const double top = y_hat.maxCoeff();
  const double tol = 1e-9 * std::max(1.0, std::abs(top));
  ThetaEstimate out{-1, false};
  for (Eigen::Index t = 0; t < y_hat.size(); ++t) {
    if (top - y_hat(t) <= tol) {
      if (out.theta < 0)
        out.theta = static_cast<int>(t);
      else
        out.ambiguous = true;
    }
  }
  return out;
}

class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

/// Limiting log-belief rates y(theta) = D_k(theta*) - D_k(theta).
inline Vector theoretical_rates(const DivergenceMatrix& d, const Vector& x) {
  const auto prof = divergence_profile(d, x);
  if (prof.tie) throw AssumptionViolation("average divergence has no unique minimizer");
  return prof.values(prof.theta_star) - prof.values.array();
}

/// Columns: time, agent, hypothesis, log_psi. Agents and hypotheses are 1-based.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "time,agent,hypothesis,log_psi\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& snap : traj.snapshots)
    for (Eigen::Index k = 0; k < snap.log_psi.rows(); ++k)
      for (Eigen::Index t = 0; t < snap.log_psi.cols(); ++t) {
        line.str({});
        line << snap.time << ',' << k + 1 << ',' << t + 1 << ',' << snap.log_psi(k, t);
        os << line.str() << '\n';
      }
}

}  // namespace weaksl
