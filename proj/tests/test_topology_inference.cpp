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

#include "weaksl/topology_inference.hpp"
#include "weaksl/social_learning.hpp"

#include <gtest/gtest.h>

namespace weaksl {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

Vector random_simplex(int n, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(1.0);
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = g(rng);
  return x / x.sum();
}

// Exhaustive NNLS: best unconstrained solution over every support whose
// solution is nonnegative.
Vector nnls_by_enumeration(const Matrix& a, const Vector& b) {
  const auto n = a.cols();
  Vector best = Vector::Zero(n);
  double best_res = b.norm();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (mask & (1u << j)) idx.push_back(j);
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(c) = a.col(idx[c]);
    const Vector z = sub.colPivHouseholderQr().solve(b);
    if ((z.array() < 0).any()) continue;
    Vector x = Vector::Zero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) x(idx[c]) = z(c);
    const double res = (a * x - b).norm();
    if (res < best_res - 1e-14) best_res = res, best = x;
  }
  return best;
}

// Simplex projection by bisection on the shift tau: sum(max(v - tau, 0)) = 1.
Vector simplex_by_bisection(const Vector& v) {
  double lo = v.minCoeff() - 1.0, hi = v.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((v.array() - mid).max(0.0).sum() > 1.0) lo = mid; else hi = mid;
  }
  return (v.array() - 0.5 * (lo + hi)).max(0.0);
}

const DivergenceMatrix kToy(mat({{0, 2}, {2, 0}}));

TEST(BuildSystemTest, HandAssembled) {
  const auto sys = build_system(kToy, 0, vec({0, -0.8}));
  EXPECT_EQ(sys.C, mat({{0, 0}, {-2, 2}, {1, 1}}));
  EXPECT_EQ(sys.y_tilde, vec({0, -0.8, 1}));
  EXPECT_EQ(sys.B, mat({{0, 0}, {-2, 2}}));
  EXPECT_EQ(sys.rank, 2);
  EXPECT_TRUE(sys.feasible);
}

TEST(BuildSystemTest, ThetaStarRowIsZero) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto mi = diversity_model(5, 3, {1, 2, 3, 4, 5}, 0.1, seed);
    for (int t = 0; t < 5; ++t) {
      const auto sys = build_system(mi.divergence, t, Vector::Zero(5));
      EXPECT_EQ(sys.B.row(t).cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(sys.C.row(5), Eigen::RowVectorXd::Ones(3));
      EXPECT_EQ(sys.y_tilde(5), 1.0);
    }
  }
}

TEST(BuildSystemTest, IdenticalColumnsGiveRankOne) {
  const DivergenceMatrix d(mat({{0.3, 0.3, 0.3}, {1.1, 1.1, 1.1}, {2.0, 2.0, 2.0}}));
  const auto sys = build_system(d, 0, Vector::Zero(3));
  EXPECT_EQ(sys.B.bottomRows(2).rowwise().squaredNorm().maxCoeff() > 0, true);
  EXPECT_EQ(sys.rank, 1);
  // Rows of B are constant across s, so only the direction 1_S survives.
  const DivergenceMatrix flat(mat({{0.3, 0.3}, {0.3, 0.3}}));
  EXPECT_EQ(build_system(flat, 0, Vector::Zero(2)).B, Matrix::Zero(2, 2));
}

TEST(BuildSystemTest, ConstraintWeightKnob) {
  const auto sys = build_system(kToy, 0, vec({0, -0.8}), {kDefaultRankTolerance, 10.0});
  EXPECT_EQ(sys.C.row(2), Eigen::RowVectorXd::Constant(2, 10.0));
  EXPECT_EQ(sys.y_tilde(2), 10.0);
  EXPECT_LE((solve_topology(sys).x_hat - vec({0.7, 0.3})).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BuildSystemTest, Preconditions) {
  EXPECT_THROW(build_system(kToy, 2, vec({0, 0})), DimensionError);
  EXPECT_THROW(build_system(kToy, 0, vec({0, 0, 0})), DimensionError);
}

TEST(RankFeasibilityTest, StructuredGaussianIsRankTwo) {
  const auto mi = structured_gaussian_model({1, 2, 3}, 3);
  const auto sys = build_system(mi.divergence, 1, Vector::Zero(3));
  EXPECT_EQ(sys.B, mat({{0.5, -0.5, -1.5}, {0, 0, 0}, {-1.5, -0.5, 0.5}}));
  const auto v = rank_feasibility(sys);
  EXPECT_EQ(v.rank, 2);
  EXPECT_FALSE(v.feasible);
  EXPECT_TRUE(v.enough_hypotheses);
}

TEST(RankFeasibilityTest, FewerHypothesesThanSenders) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto mi = diversity_model(2, 3, {1, 2, 3}, 0.5, seed);
    for (int t = 0; t < 2; ++t) {
      const auto v = rank_feasibility(build_system(mi.divergence, t, Vector::Zero(2)));
      EXPECT_FALSE(v.feasible);
      EXPECT_FALSE(v.enough_hypotheses);
      EXPECT_NE(v.verdict.find("H = 2 < S = 3"), std::string::npos);
    }
  }
}

TEST(RankFeasibilityTest, DiversityDrawsAreFullRank) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto mi = diversity_model(3, 3, {1, 2, 3}, 0.1, seed);
    for (int t = 0; t < 3; ++t) {
      const auto v = rank_feasibility(build_system(mi.divergence, t, Vector::Zero(3)));
      EXPECT_EQ(v.rank, 3);
      EXPECT_TRUE(v.feasible);
    }
  }
}

TEST(RankFeasibilityTest, ToleranceControlsRank) {
  const auto mi = diversity_model(3, 3, {1, 2, 3}, 0.1, 3);
  const auto sys = build_system(mi.divergence, 0, Vector::Zero(3));
  EXPECT_EQ(rank_feasibility(sys, 1e-10).rank, 3);
  EXPECT_LT(rank_feasibility(sys, 0.5).rank, 3);
}

TEST(NnlsTest, MatchesEnumeration) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 3 + trial % 4, n = 2 + trial % 4;
    Matrix a(m, n);
    Vector b(m);
    for (int i = 0; i < m; ++i) {
      b(i) = z(rng);
      for (int j = 0; j < n; ++j) a(i, j) = z(rng);
    }
    const Vector x = nonnegative_least_squares(a, b);
    const Vector oracle = nnls_by_enumeration(a, b);
    EXPECT_TRUE((x.array() >= 0).all());
    EXPECT_NEAR((a * x - b).norm(), (a * oracle - b).norm(), 1e-10) << "trial " << trial;
  }
}

TEST(SimplexProjectionTest, MatchesBisection) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    Vector v(2 + trial % 5);
    for (auto& e : v) e = z(rng);
    const Vector p = project_to_simplex(v);
    EXPECT_TRUE((p.array() >= 0).all());
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_LE((p - simplex_by_bisection(v)).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_LE((project_to_simplex(vec({0.2, 0.8})) - vec({0.2, 0.8})).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SolveTopologyTest, TwoByTwo) {
  const auto est = solve_topology(build_system(kToy, 0, vec({0, -0.8})));
  EXPECT_LE((est.x_hat - vec({0.7, 0.3})).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(est.residual, 1e-10);
  EXPECT_EQ(est.boundary_zeros, 0);
}

TEST(SolveTopologyTest, NoiselessRoundTrip) {
  std::mt19937_64 rng(21);
  int checked = 0;
  for (std::uint64_t seed = 0; checked < 100; ++seed) {
    const int s = 2 + static_cast<int>(seed % 3);
    const int h = s + static_cast<int>(seed % 2);
    std::vector<double> base;
    for (int m = 1; m <= h; ++m) base.push_back(m);
    const auto mi = diversity_model(h, s, base, 0.1, seed);
    const Vector x = random_simplex(s, rng);
    const auto prof = divergence_profile(mi.divergence, x);
    if (prof.tie) continue;
    const auto sys = build_system(mi.divergence, prof.theta_star, theoretical_rates(mi.divergence, x));
    ASSERT_TRUE(sys.feasible);
    const auto est = solve_topology(sys);
    EXPECT_LE(estimation_error(est.x_hat, x).l_inf, 1e-9) << "seed " << seed;
    ++checked;
  }
}

TEST(SolveTopologyTest, StructuredGaussianIsNonIdentifiable) {
  const auto mi = structured_gaussian_model({1, 2, 3}, 3);
  const Vector x = vec({0.2, 0.5, 0.3});
  const auto prof = divergence_profile(mi.divergence, x);
  const auto sys = build_system(mi.divergence, prof.theta_star, theoretical_rates(mi.divergence, x));
  EXPECT_THROW(solve_topology(sys), NonIdentifiable);
}

TEST(SolveTopologyTest, NoisyRatesStayOnSimplex) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0, 1);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto mi = diversity_model(4, 3, {1, 2, 3, 4}, 0.2, seed);
    Vector y(4);
    for (auto& e : y) e = z(rng);
    const auto sys = build_system(mi.divergence, static_cast<int>(seed % 4), y);
    if (!sys.feasible) continue;
    const auto est = solve_topology(sys);
    EXPECT_TRUE((est.x_hat.array() >= 0).all());
    EXPECT_NEAR(est.x_hat.sum(), 1.0, 1e-9);
  }
}

TEST(SolveTopologyTest, CorruptedDataIsConstraintInfeasible) {
  auto sys = build_system(kToy, 0, vec({0, -0.8}));
  sys.y_tilde(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_topology(sys), ConstraintInfeasible);
}

TEST(EstimationErrorTest, Arithmetic) {
  const auto same = estimation_error(vec({0.3, 0.7}), vec({0.3, 0.7}));
  EXPECT_EQ(same.l_inf, 0.0);
  EXPECT_EQ(same.l2, 0.0);
  const auto swap = estimation_error(vec({1, 0}), vec({0, 1}));
  EXPECT_EQ(swap.l_inf, 1.0);
  EXPECT_DOUBLE_EQ(swap.l2, std::sqrt(2.0));
  EXPECT_NEAR(estimation_error(vec({0.7, 0.3}), vec({0.6, 0.4})).l_inf, 0.1, 1e-15);
  EXPECT_THROW(estimation_error(vec({1}), vec({0.5, 0.5})), DimensionError);
}

}  // namespace
}  // namespace weaksl
