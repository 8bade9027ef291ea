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

// Recovering the aggregate influence x_k of each sending sub-network on a
// receiving agent from its limiting log-belief rates y_k. With
//
//   B_k = (1_H e_{theta*}^T - I_H) D,   C_k = [B_k; 1_S^T],   y~_k = [y_k; 1]
//
// the rates satisfy y~_k = C_k x_k, and x_k is identifiable exactly when
// C_k has full column rank S. Row theta* of B_k is zero, so rank <= H and
// H >= S is necessary.

#pragma once

#include "weaksl/linalg.hpp"
#include "weaksl/models.hpp"

#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace weaksl {

inline constexpr double kDefaultRankTolerance = 1e-10;

struct InverseSystem {
  Matrix B;         // H x S
  Matrix C;         // (H + 1) x S
  Vector y_tilde;   // H + 1
  int theta_star = 0;
  int rank = 0;
  bool feasible = false;
  Vector singular_values;  // of C, descending
};

struct SystemOptions {
  double rank_tolerance = kDefaultRankTolerance;
  // Scale of the appended sum-to-one row (both in C and in y~).
  double constraint_weight = 1.0;
};

/// Number of singular values above tol * sigma_max.
inline int numerical_rank(const Vector& singular_values, double tol) {
  if (singular_values.size() == 0 || singular_values(0) <= 0.0) return 0;
  const double cut = tol * singular_values(0);
  return static_cast<int>((singular_values.array() > cut).count());
}

inline Vector singular_values(const Matrix& m) {
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
}

inline InverseSystem build_system(const DivergenceMatrix& d, int theta_star, const Vector& y,
                                  SystemOptions opt = {}) {
  const int h = d.hypotheses();
  const int s = d.senders();
  if (theta_star < 0 || theta_star >= h) throw DimensionError("theta* out of range");
  if (y.size() != h) throw DimensionError("rate vector length must equal H");

  InverseSystem sys;
  sys.theta_star = theta_star;
  // (1 e_*^T - I) D: row theta is D(theta*, :) - D(theta, :).
  sys.B = (-d.matrix()).rowwise() + d.matrix().row(theta_star);
  sys.C.resize(h + 1, s);
  sys.C.topRows(h) = sys.B;
  sys.C.row(h).setConstant(opt.constraint_weight);
  sys.y_tilde.resize(h + 1);
  sys.y_tilde.head(h) = y;
  sys.y_tilde(h) = opt.constraint_weight;
  sys.singular_values = singular_values(sys.C);
  sys.rank = numerical_rank(sys.singular_values, opt.rank_tolerance);
  sys.feasible = sys.rank == s;
  return sys;
}

struct RankVerdict {
  int rank = 0;
  bool feasible = false;
  bool enough_hypotheses = false;  // H >= S
  std::string verdict;
};

inline RankVerdict rank_feasibility(const InverseSystem& sys, double tol = kDefaultRankTolerance) {
  const auto s = static_cast<int>(sys.C.cols());
  const auto h = static_cast<int>(sys.C.rows()) - 1;
  RankVerdict out;
  out.rank = numerical_rank(sys.singular_values, tol);
  out.feasible = out.rank == s;
  out.enough_hypotheses = h >= s;
  if (!out.enough_hypotheses)
    out.verdict = "non-identifiable: H = " + std::to_string(h) + " < S = " + std::to_string(s);
  else if (!out.feasible)
    out.verdict = "non-identifiable: rank(C) = " + std::to_string(out.rank) + " < S = " + std::to_string(s);
  else
    out.verdict = "identifiable: rank(C) = S = " + std::to_string(s);
  return out;
}

class NonIdentifiable : public Error {
 public:
  using Error::Error;
};

class ConstraintInfeasible : public Error {
 public:
  using Error::Error;
};

/// min ||A x - b|| subject to x >= 0 (Lawson-Hanson active set).
inline Vector nonnegative_least_squares(const Matrix& a, const Vector& b, int max_outer = 0) {
  const auto n = a.cols();
  if (max_outer <= 0) max_outer = static_cast<int>(3 * n + 10);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.cwiseAbs().maxCoeff() *
                     static_cast<double>(std::max(a.rows(), a.cols()));
  Vector x = Vector::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);

  auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j)
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    Eigen::MatrixXd ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) ap.col(static_cast<Eigen::Index>(c)) = a.col(idx[c]);
    const Vector zp = ap.colPivHouseholderQr().solve(b);
    Vector z = Vector::Zero(n);
    for (std::size_t c = 0; c < idx.size(); ++c) z(idx[c]) = zp(static_cast<Eigen::Index>(c));
    return z;
  };

  for (int outer = 0; outer < max_outer; ++outer) {
    const Vector w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    if (best < 0) return x;
    passive[static_cast<std::size_t>(best)] = true;

    for (int inner = 0; inner <= static_cast<int>(n); ++inner) {
      Vector z = solve_passive();
      bool all_positive = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) all_positive = false;
      if (all_positive) {
        x = std::move(z);
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0)
          alpha = std::min(alpha, x(j) / (x(j) - z(j)));
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < n; ++j)
        if (passive[static_cast<std::size_t>(j)] && x(j) <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x(j) = 0.0;
        }
    }
  }
  throw ConstraintInfeasible("nonnegative least squares did not terminate");
}

/// Euclidean projection onto {x >= 0, sum x = 1}.
inline Vector project_to_simplex(const Vector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, shift = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) shift = t;
  }
  return (v.array() - shift).max(0.0);
}

struct TopologyEstimate {
  Vector x_hat;
  double residual = 0.0;        // ||C x_hat - y~||_2
  double condition = 0.0;       // sigma_max / sigma_min of C
  int boundary_zeros = 0;       // entries of x_hat pinned at 0
};

/// Simplex-constrained least squares on C x = y~. In the noiseless
/// full-rank case this returns the exact solution.
inline TopologyEstimate solve_topology(const InverseSystem& sys) {
  if (!sys.feasible)
    throw NonIdentifiable("rank(C) = " + std::to_string(sys.rank) + " < S = " +
                          std::to_string(sys.C.cols()) + "; aggregate weights are not identifiable");
  if (!sys.C.allFinite() || !sys.y_tilde.allFinite())
    throw ConstraintInfeasible("system contains non-finite entries");
  const Vector raw = nonnegative_least_squares(sys.C, sys.y_tilde);
  if (!raw.allFinite()) throw ConstraintInfeasible("solver produced non-finite weights");

  TopologyEstimate est;
  est.x_hat = project_to_simplex(raw);
  est.residual = (sys.C * est.x_hat - sys.y_tilde).norm();
  const auto& sv = sys.singular_values;
  est.condition = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                          : std::numeric_limits<double>::infinity();
  est.boundary_zeros = static_cast<int>((est.x_hat.array() == 0.0).count());
  return est;
}

struct EstimationError {
  double l_inf = 0.0;
  double l2 = 0.0;
};

inline EstimationError estimation_error(const Vector& x_hat, const Vector& x_true) {
  if (x_hat.size() != x_true.size()) throw DimensionError("estimate and truth differ in length");
  const Vector diff = x_hat - x_true;
  return {diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0, diff.norm()};
}

}  // namespace weaksl
