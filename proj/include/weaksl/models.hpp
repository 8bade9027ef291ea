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

// Unit-variance Gaussian observation models and the H x S divergence matrix
// D(theta, s) = KL(f_s || L_s(theta)) they induce.

#pragma once

#include "weaksl/linalg.hpp"
#include "weaksl/weakgraph.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace weaksl {

class ModelError : public Error {
 public:
  using Error::Error;
};

struct HypothesisSet {
  int size = 2;

  explicit HypothesisSet(int h) : size(h) {
    if (h < 2) throw ModelError("H >= 2 required");
  }
};

/// Observation model of one agent: the data are N(true_mean, 1) and the
/// likelihood of hypothesis theta is N(likelihood_means[theta], 1).
struct AgentModel {
  double true_mean = 0.0;
  std::vector<double> likelihood_means;

  /// log L(xi | theta) up to the additive constant shared by all theta.
  Vector log_likelihoods(double xi) const {
    Vector out(static_cast<Eigen::Index>(likelihood_means.size()));
    for (std::size_t t = 0; t < likelihood_means.size(); ++t) {
      const double d = xi - likelihood_means[t];
      out(static_cast<Eigen::Index>(t)) = -0.5 * d * d;
    }
    return out;
  }
};

/// Models for every agent. All agents of sending sub-network s share
/// sending_models[s]. Receiving agents use receiving_default unless an
/// override is registered under their (0-based, global) agent index.
struct ModelSuite {
  HypothesisSet hypotheses{2};
  std::vector<AgentModel> sending_models;
  AgentModel receiving_default;
  std::map<int, AgentModel> receiving_overrides;

  const AgentModel& model_for(int agent, const Partition& partition) const {
    const int s = partition.sending_group(agent);
    if (s >= 0) return sending_models.at(static_cast<std::size_t>(s));
    auto it = receiving_overrides.find(agent);
    return it == receiving_overrides.end() ? receiving_default : it->second;
  }

  /// Throws if the suite does not fit the partition or a mean is not finite.
  void check(const Partition& partition) const {
    if (static_cast<int>(sending_models.size()) != partition.num_sending())
      throw ModelError("model suite has " + std::to_string(sending_models.size()) +
                       " sending models but the partition has " +
                       std::to_string(partition.num_sending()) + " sending sub-networks");
    auto check_one = [&](const AgentModel& m, const std::string& who) {
      if (static_cast<int>(m.likelihood_means.size()) != hypotheses.size)
        throw ModelError(who + " has " + std::to_string(m.likelihood_means.size()) +
                         " likelihoods, expected H = " + std::to_string(hypotheses.size));
      if (!std::isfinite(m.true_mean)) throw ModelError(who + " has a non-finite true mean");
      for (double v : m.likelihood_means)
        if (!std::isfinite(v)) throw ModelError(who + " has a non-finite likelihood mean");
    };
    for (std::size_t s = 0; s < sending_models.size(); ++s)
      check_one(sending_models[s], "sending model " + std::to_string(s + 1));
    check_one(receiving_default, "receiving model");
    for (const auto& [agent, m] : receiving_overrides) {
      if (partition.is_sending(agent) || agent >= partition.agents())
        throw ModelError("receiving override for agent " + std::to_string(agent + 1) +
                         " which is not a receiving agent");
      check_one(m, "receiving model of agent " + std::to_string(agent + 1));
    }
  }
};

/// H x S matrix of KL divergences, in nats. Entries are nonnegative and finite.
class DivergenceMatrix {
 public:
  DivergenceMatrix() = default;
  explicit DivergenceMatrix(Matrix d) : d_(std::move(d)) {
    for (Eigen::Index i = 0; i < d_.size(); ++i) {
      const double v = d_.data()[i];
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ModelError("divergence entries must be nonnegative and finite");
    }
  }

  const Matrix& matrix() const { return d_; }
  int hypotheses() const { return static_cast<int>(d_.rows()); }
  int senders() const { return static_cast<int>(d_.cols()); }
  double operator()(int theta, int s) const { return d_(theta, s); }

 private:
  Matrix d_;
};

struct ModelInstance {
  ModelSuite suite;
  DivergenceMatrix divergence;
};

/// KL(N(mean_f, 1) || N(mean_l, 1)).
inline double gaussian_kl(double mean_f, double mean_l) {
  const double d = mean_f - mean_l;
  return 0.5 * d * d;
}

/// Squared-distance matrix of scalar points.
inline Matrix build_edm(const std::vector<double>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = points[static_cast<std::size_t>(i)] - points[static_cast<std::size_t>(j)];
      m(i, j) = d * d;
    }
  return m;
}

/// Divergence matrix of a suite, read off the sending models.
inline DivergenceMatrix divergence_matrix(const ModelSuite& suite) {
  const int h = suite.hypotheses.size;
  const auto s_count = static_cast<int>(suite.sending_models.size());
  Matrix d(h, s_count);
  for (int s = 0; s < s_count; ++s) {
    const auto& m = suite.sending_models[static_cast<std::size_t>(s)];
    for (int t = 0; t < h; ++t) d(t, s) = gaussian_kl(m.true_mean, m.likelihood_means[static_cast<std::size_t>(t)]);
  }
  return DivergenceMatrix(std::move(d));
}

/// Every agent uses the likelihood family N(means[theta], 1); sending
/// sub-network s observes N(means[s], 1). Receiving agents observe N(means[0], 1).
inline ModelInstance structured_gaussian_model(const std::vector<double>& means, int senders) {
  const int h = static_cast<int>(means.size());
  if (senders < 1 || senders > h) throw ModelError("structured model needs 1 <= S <= H");
  if (std::set<double>(means.begin(), means.end()).size() != means.size())
    throw ModelError("structured model needs pairwise distinct means");
  ModelSuite suite{HypothesisSet(h), {}, {means.front(), means}, {}};
  for (int s = 0; s < senders; ++s)
    suite.sending_models.push_back({means[static_cast<std::size_t>(s)], means});
  auto d = divergence_matrix(suite);
  return {std::move(suite), std::move(d)};
}

/// Sending sub-network s observes N(base_means[s], 1) and its likelihood for
/// theta has mean base_means[theta] + u(theta, s), u uniform on
/// [-perturb_range, perturb_range]. Receiving agents keep the unperturbed
/// family and observe N(base_means[0], 1).
inline ModelInstance diversity_model(int hypotheses, int senders, const std::vector<double>& base_means,
                                     double perturb_range, std::uint64_t seed) {
  HypothesisSet hs(hypotheses);
  if (senders < 1) throw ModelError("diversity model needs S >= 1");
  if (!(perturb_range >= 0.0)) throw ModelError("perturb_range must be >= 0");
  if (static_cast<int>(base_means.size()) < std::max(hypotheses, senders))
    throw ModelError("diversity model needs at least max(H, S) base means");
  const std::vector<double> family(base_means.begin(), base_means.begin() + hypotheses);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-perturb_range, perturb_range);
  std::vector<std::vector<double>> lik(static_cast<std::size_t>(senders), family);
  if (perturb_range > 0.0)
    for (int t = 0; t < hypotheses; ++t)
      for (int s = 0; s < senders; ++s) lik[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)] += u(rng);

  ModelSuite suite{hs, {}, {base_means.front(), family}, {}};
  for (int s = 0; s < senders; ++s)
    suite.sending_models.push_back({base_means[static_cast<std::size_t>(s)], lik[static_cast<std::size_t>(s)]});
  auto d = divergence_matrix(suite);
  return {std::move(suite), std::move(d)};
}

/// Draws `count` means uniformly on [lo, hi] with pairwise gaps of at least min_gap.
inline std::vector<double> random_distinct_means(int count, std::mt19937_64& rng, double lo = -5.0,
                                                 double hi = 5.0, double min_gap = 0.05) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> out;
  while (static_cast<int>(out.size()) < count) {
    const double m = u(rng);
    bool ok = true;
    for (double v : out) ok = ok && std::abs(v - m) >= min_gap;
    if (ok) out.push_back(m);
  }
  return out;
}

/// Average divergence D x_k per hypothesis with its minimizer.
struct DivergenceProfile {
  Vector values;
  int theta_star = 0;
  bool tie = false;  // runner-up within the tie tolerance: no unique minimizer
};

inline constexpr double kTieRelativeTolerance = 1e-9;

inline void check_probability_vector(const Vector& x, const char* what) {
  if ((x.array() < -1e-12).any() || std::abs(x.sum() - 1.0) > 1e-9 || !x.allFinite())
    throw DimensionError(std::string(what) + " must be a probability vector");
}

inline DivergenceProfile divergence_profile(const DivergenceMatrix& d, const Vector& x) {
  if (x.size() != d.senders()) throw DimensionError("weight vector length must equal S");
  check_probability_vector(x, "aggregate weight vector");
  DivergenceProfile out;
  out.values = d.matrix() * x;
  const auto h = out.values.size();
  Eigen::Index best = 0;
  out.values.minCoeff(&best);
  out.theta_star = static_cast<int>(best);
  for (Eigen::Index t = 0; t < h; ++t) {
    if (t == best) continue;
    const double a = out.values(best), b = out.values(t);
    if (b - a <= kTieRelativeTolerance * std::max(std::abs(a), std::abs(b))) out.tie = true;
  }
  return out;
}

/// One observation xi ~ N(true_mean, 1).
inline double sample_observation(const AgentModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  return model.true_mean + z(rng);
}

inline void write_divergence_csv(std::ostream& os, const DivergenceMatrix& d) {
  os << "# H S " << d.hypotheses() << ' ' << d.senders() << '\n';
  write_matrix_rows(os, d.matrix());
}

inline DivergenceMatrix read_divergence_csv(std::istream& is) {
  return DivergenceMatrix(read_matrix_rows(is));
}

}  // namespace weaksl
