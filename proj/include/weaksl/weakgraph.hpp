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

// Weak graphs: agents split into sending sub-networks (strongly connected,
// never listening to anyone outside themselves) and receiving sub-networks.
// The combination matrix A is left-stochastic: a(l, k) is the weight agent k
// puts on agent l, so column k lists k's in-neighbors.
//
//        [ A_S | A_SR ]                      [ E | E W ]
//    A = [-----+------]      lim A^i  =      [---+-----]
//        [  0  | A_R  ]                      [ 0 |  0  ]
//
// with E = blockdiag{p(s) 1^T}, W = A_SR (I - A_R)^-1 and Omega = E W.

#pragma once

#include "weaksl/linalg.hpp"

#include <cstdint>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace weaksl {

/// Sizes of the S sending and R receiving sub-networks. Agents are numbered
/// with all sending agents first, sub-network by sub-network.
class Partition {
 public:
  Partition() = default;

  Partition(std::vector<int> sending_sizes, std::vector<int> receiving_sizes)
      : sending_(std::move(sending_sizes)), receiving_(std::move(receiving_sizes)) {
    if (sending_.empty()) throw DimensionError("partition needs at least one sending sub-network");
    if (receiving_.empty()) throw DimensionError("partition needs at least one receiving sub-network");
    for (int n : sending_)
      if (n <= 0) throw DimensionError("sending sub-network sizes must be positive");
    for (int n : receiving_)
      if (n <= 0) throw DimensionError("receiving sub-network sizes must be positive");
  }

  const std::vector<int>& sending_sizes() const { return sending_; }
  const std::vector<int>& receiving_sizes() const { return receiving_; }

  int num_sending() const { return static_cast<int>(sending_.size()); }
  int num_receiving() const { return static_cast<int>(receiving_.size()); }
  int sending_agents() const { return std::accumulate(sending_.begin(), sending_.end(), 0); }
  int receiving_agents() const { return std::accumulate(receiving_.begin(), receiving_.end(), 0); }
  int agents() const { return sending_agents() + receiving_agents(); }

  /// First agent index of sending sub-network s.
  int sending_offset(int s) const {
    return std::accumulate(sending_.begin(), sending_.begin() + s, 0);
  }
  /// First agent index of receiving sub-network r (global numbering).
  int receiving_offset(int r) const {
    return sending_agents() + std::accumulate(receiving_.begin(), receiving_.begin() + r, 0);
  }

  bool is_sending(int agent) const { return agent < sending_agents(); }

  /// Sending sub-network containing `agent`, or -1 for receiving agents.
  int sending_group(int agent) const {
    int offset = 0;
    for (int s = 0; s < num_sending(); ++s) {
      offset += sending_[static_cast<std::size_t>(s)];
      if (agent < offset) return s;
    }
    return -1;
  }

  /// Receiving sub-network containing `agent`, or -1 for sending agents.
  int receiving_group(int agent) const {
    int offset = sending_agents();
    if (agent < offset) return -1;
    for (int r = 0; r < num_receiving(); ++r) {
      offset += receiving_[static_cast<std::size_t>(r)];
      if (agent < offset) return r;
    }
    return -1;
  }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> sending_;
  std::vector<int> receiving_;
};

enum class GraphIssue {
  kDimensionMismatch,
  kNegativeWeight,
  kNonStochasticColumn,
  kReceivingToSending,
  kCrossSendingLink,
  kNotStronglyConnected,
  kNoSelfLoop,
  kNoSendingLink,
  kUnreachableReceivingAgent,
};

struct GraphDiagnostic {
  GraphIssue issue;
  std::vector<int> indices;  // 0-based; message uses 1-based labels
  std::string message;
};

class InvalidGraph : public Error {
 public:
  explicit InvalidGraph(std::vector<GraphDiagnostic> diagnostics)
      : Error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  const std::vector<GraphDiagnostic>& diagnostics() const { return diagnostics_; }

 private:
  static std::string summarize(const std::vector<GraphDiagnostic>& d) {
    std::string out = "invalid weak graph:";
    for (const auto& x : d) out += "\n  " + x.message;
    return out;
  }
  std::vector<GraphDiagnostic> diagnostics_;
};

class WeakGraph;
struct GraphValidation;
GraphValidation validate_weak_graph(const Matrix& a, const Partition& partition);

/// A combination matrix that has passed validation. Immutable.
class WeakGraph {
 public:
  /// Validates and throws InvalidGraph listing every violation.
  static WeakGraph from(const Matrix& a, const Partition& partition);

  const Matrix& matrix() const { return a_; }
  const Partition& partition() const { return partition_; }
  int agents() const { return static_cast<int>(a_.rows()); }

  Matrix sending_block(int s) const {
    const int off = partition_.sending_offset(s);
    const int n = partition_.sending_sizes()[static_cast<std::size_t>(s)];
    return a_.block(off, off, n, n);
  }

 private:
  friend GraphValidation validate_weak_graph(const Matrix&, const Partition&);
  WeakGraph(Matrix a, Partition p) : a_(std::move(a)), partition_(std::move(p)) {}

  Matrix a_;
  Partition partition_;
};

struct GraphValidation {
  std::optional<WeakGraph> graph;
  std::vector<GraphDiagnostic> diagnostics;
  bool ok() const { return graph.has_value(); }
};

inline constexpr double kColumnSumTolerance = 1e-9;

namespace detail {

inline std::string label(int i) { return std::to_string(i + 1); }

// Agents reachable from `seeds` following edges l -> k whenever adj(l, k) > 0.
inline std::vector<bool> reachable(const Matrix& adj, const std::vector<int>& seeds, bool reverse) {
  const auto n = adj.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<int> q;
  for (int s : seeds) {
    seen[static_cast<std::size_t>(s)] = true;
    q.push(s);
  }
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v = 0; v < n; ++v) {
      const double w = reverse ? adj(v, u) : adj(u, v);
      if (w > 0.0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        q.push(v);
      }
    }
  }
  return seen;
}

}  // namespace detail

/// Checks every weak-graph invariant and reports all violations found.
inline GraphValidation validate_weak_graph(const Matrix& a, const Partition& partition) {
  GraphValidation out;
  auto& diag = out.diagnostics;
  const int n = partition.agents();
  if (a.rows() != a.cols() || a.rows() != n) {
    diag.push_back({GraphIssue::kDimensionMismatch, {},
                    "matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                        " but partition has " + std::to_string(n) + " agents"});
    return out;
  }

  for (int l = 0; l < n; ++l)
    for (int k = 0; k < n; ++k)
      if (!(a(l, k) >= 0.0) || !std::isfinite(a(l, k)))
        diag.push_back({GraphIssue::kNegativeWeight, {l, k},
                        "weight a(" + detail::label(l) + "," + detail::label(k) +
                            ") is negative or not finite"});

  for (int k = 0; k < n; ++k) {
    const double sum = a.col(k).sum();
    if (std::abs(sum - 1.0) > kColumnSumTolerance)
      diag.push_back({GraphIssue::kNonStochasticColumn, {k},
                      "non-stochastic column " + detail::label(k) + " (sums to " +
                          std::to_string(sum) + ")"});
  }

  const int ns = partition.sending_agents();
  for (int l = ns; l < n; ++l)
    for (int k = 0; k < ns; ++k)
      if (a(l, k) != 0.0)
        diag.push_back({GraphIssue::kReceivingToSending, {l, k},
                        "forbidden receiving->sending weight a(" + detail::label(l) + "," +
                            detail::label(k) + ")"});

  for (int l = 0; l < ns; ++l)
    for (int k = 0; k < ns; ++k)
      if (a(l, k) != 0.0 && partition.sending_group(l) != partition.sending_group(k))
        diag.push_back({GraphIssue::kCrossSendingLink, {l, k},
                        "weight a(" + detail::label(l) + "," + detail::label(k) +
                            ") links distinct sending sub-networks"});

  for (int s = 0; s < partition.num_sending(); ++s) {
    const int off = partition.sending_offset(s);
    const int size = partition.sending_sizes()[static_cast<std::size_t>(s)];
    const Matrix block = a.block(off, off, size, size);
    const auto fwd = detail::reachable(block, {0}, false);
    const auto bwd = detail::reachable(block, {0}, true);
    const bool strong = std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
                        std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
    if (!strong)
      diag.push_back({GraphIssue::kNotStronglyConnected, {s},
                      "sending sub-network " + detail::label(s) + " is not strongly connected"});
    if ((block.diagonal().array() > 0.0).count() == 0)
      diag.push_back({GraphIssue::kNoSelfLoop, {s},
                      "sending sub-network " + detail::label(s) + " has no self-loop"});
  }

  std::vector<int> sending_agents(static_cast<std::size_t>(ns));
  std::iota(sending_agents.begin(), sending_agents.end(), 0);
  const auto reached = detail::reachable(a, sending_agents, false);
  for (int r = 0; r < partition.num_receiving(); ++r) {
    const int off = partition.receiving_offset(r);
    const int size = partition.receiving_sizes()[static_cast<std::size_t>(r)];
    if (a.block(0, off, ns, size).maxCoeff() <= 0.0) {
      diag.push_back({GraphIssue::kNoSendingLink, {r},
                      "receiving sub-network " + detail::label(r) +
                          " has no inbound sending link"});
      continue;
    }
    for (int k = off; k < off + size; ++k)
      if (!reached[static_cast<std::size_t>(k)])
        diag.push_back({GraphIssue::kUnreachableReceivingAgent, {k},
                        "receiving agent " + detail::label(k) +
                            " is not reachable from any sending agent"});
  }

  if (diag.empty()) out.graph = WeakGraph(a, partition);
  return out;
}

inline WeakGraph WeakGraph::from(const Matrix& a, const Partition& partition) {
  auto v = validate_weak_graph(a, partition);
  if (!v.ok()) throw InvalidGraph(std::move(v.diagnostics));
  return *std::move(v.graph);
}

class PerronNotConverged : public Error {
 public:
  using Error::Error;
};

class SingularReceivingSystem : public Error {
 public:
  using Error::Error;
};

struct PowerIterationOptions {
  double relative_tolerance = 1e-12;
  long max_iterations = 1'000'000;
};

/// Perron eigenvector of a primitive left-stochastic block by power iteration:
/// block * p = p, p > 0, sum(p) = 1.
inline Vector perron_vector(const Matrix& block, PowerIterationOptions opt = {}) {
  if (block.rows() != block.cols() || block.rows() == 0)
    throw DimensionError("perron_vector needs a non-empty square block");
  const auto n = block.rows();
  Vector p = Vector::Constant(n, 1.0 / static_cast<double>(n));
  for (long it = 0; it < opt.max_iterations; ++it) {
    Vector next = block * p;
    const double mass = next.sum();
    if (!(mass > 0.0) || !std::isfinite(mass))
      throw PerronNotConverged("power iteration lost all mass; block is not stochastic");
    next /= mass;
    const double step = (next - p).cwiseAbs().maxCoeff();
    p = std::move(next);
    if (step <= opt.relative_tolerance * p.cwiseAbs().maxCoeff()) {
      if ((p.array() <= 0.0).any())
        throw PerronNotConverged("Perron vector has non-positive entries; block is reducible");
      return p;
    }
  }
  throw PerronNotConverged("power iteration did not converge in " +
                           std::to_string(opt.max_iterations) +
                           " iterations; block may be periodic or ill-conditioned");
}

/// Closed-form limit of A^i, split into its pieces.
struct LimitingProfile {
  Matrix E;                          // |S| x |S|
  std::vector<Vector> perron_vectors;
  Matrix W;                          // |S| x |R|
  Matrix Omega;                      // |S| x |R|, columns sum to 1
  Matrix X;                          // S x |R| aggregate weights

  /// The full N x N matrix [E Omega; 0 0].
  Matrix limit_matrix() const {
    const auto ns = E.rows();
    const auto nr = Omega.cols();
    Matrix out = Matrix::Zero(ns + nr, ns + nr);
    out.topLeftCorner(ns, ns) = E;
    out.topRightCorner(ns, nr) = Omega;
    return out;
  }
};

namespace detail {

inline Matrix sum_rows_by_group(const Matrix& m, const Partition& partition) {
  if (m.rows() != partition.sending_agents())
    throw DimensionError("row count does not match the number of sending agents");
  Matrix x(partition.num_sending(), m.cols());
  for (int s = 0; s < partition.num_sending(); ++s) {
    const int off = partition.sending_offset(s);
    const int n = partition.sending_sizes()[static_cast<std::size_t>(s)];
    x.row(s) = m.middleRows(off, n).colwise().sum();
  }
  return x;
}

}  // namespace detail

/// x(s, k) = sum of omega(l, k) over agents l of sending sub-network s.
inline Matrix aggregate_weights(const LimitingProfile& profile, const Partition& partition) {
  return detail::sum_rows_by_group(profile.Omega, partition);
}

/// Same aggregate weights computed from the transfer matrix W instead of Omega.
inline Matrix aggregate_weights_from_transfer(const Matrix& w, const Partition& partition) {
  return detail::sum_rows_by_group(w, partition);
}

inline LimitingProfile limiting_profile(const WeakGraph& g, PowerIterationOptions opt = {}) {
  const auto& part = g.partition();
  const int ns = part.sending_agents();
  const int nr = part.receiving_agents();
  const Matrix& a = g.matrix();

  LimitingProfile out;
  out.E = Matrix::Zero(ns, ns);
  for (int s = 0; s < part.num_sending(); ++s) {
    const int off = part.sending_offset(s);
    const int n = part.sending_sizes()[static_cast<std::size_t>(s)];
    Vector p = perron_vector(g.sending_block(s), opt);
    out.E.block(off, off, n, n) = p * Eigen::RowVectorXd::Ones(n);
    out.perron_vectors.push_back(std::move(p));
  }

  // W (I - A_R) = A_SR  <=>  (I - A_R)^T W^T = A_SR^T, one solve per column of W^T.
  const Matrix a_sr = a.topRightCorner(ns, nr);
  const Matrix m = Matrix::Identity(nr, nr) - a.bottomRightCorner(nr, nr);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m.transpose());
  if (!(lu.rcond() > 1e-13))
    throw SingularReceivingSystem(
        "I - A_R is numerically singular; some receiving agent is not fed by a sending agent");
  out.W = lu.solve(Eigen::MatrixXd(a_sr.transpose())).transpose();
  out.Omega = out.E * out.W;
  out.X = aggregate_weights(out, part);
  return out;
}

/// A^i by repeated multiplication. Independent check of limiting_profile.
inline Matrix matrix_power_limit(const WeakGraph& g, int i) {
  if (i < 1) throw DimensionError("matrix_power_limit needs i >= 1");
  Matrix p = g.matrix();
  for (int t = 1; t < i; ++t) p = p * g.matrix();
  return p;
}

/// Random valid weak graph. Each sending block gets a directed ring plus
/// self-loops on every agent; each receiving sub-network gets a ring plus one
/// guaranteed sending edge. Every other admissible entry is switched on with
/// probability `density`. Columns are then normalized.
inline WeakGraph random_weak_graph(const Partition& partition, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) throw DimensionError("density must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::bernoulli_distribution coin(density);
  const int n = partition.agents();
  const int ns = partition.sending_agents();
  Matrix a = Matrix::Zero(n, n);

  auto maybe = [&](int l, int k) {
    const bool on = coin(rng);
    const double w = weight(rng);
    if (on && a(l, k) == 0.0) a(l, k) = w;
  };

  for (int s = 0; s < partition.num_sending(); ++s) {
    const int off = partition.sending_offset(s);
    const int size = partition.sending_sizes()[static_cast<std::size_t>(s)];
    for (int j = 0; j < size; ++j) {
      a(off + j, off + j) = weight(rng);
      if (size > 1) a(off + j, off + (j + 1) % size) = weight(rng);
    }
    for (int l = off; l < off + size; ++l)
      for (int k = off; k < off + size; ++k) maybe(l, k);
  }

  std::uniform_int_distribution<int> pick_sender(0, ns - 1);
  for (int r = 0; r < partition.num_receiving(); ++r) {
    const int off = partition.receiving_offset(r);
    const int size = partition.receiving_sizes()[static_cast<std::size_t>(r)];
    for (int j = 0; j < size && size > 1; ++j) a(off + j, off + (j + 1) % size) = weight(rng);
    std::uniform_int_distribution<int> pick_receiver(off, off + size - 1);
    const int from = pick_sender(rng);
    const int to = pick_receiver(rng);
    a(from, to) = weight(rng);
  }
  for (int l = 0; l < ns; ++l)
    for (int k = ns; k < n; ++k) maybe(l, k);
  for (int l = ns; l < n; ++l)
    for (int k = ns; k < n; ++k) maybe(l, k);

  for (int k = 0; k < n; ++k) a.col(k) /= a.col(k).sum();
  return WeakGraph::from(a, partition);
}

/// Writes "# N S R <sending sizes> <receiving sizes>" followed by the rows of A.
inline void write_graph_csv(std::ostream& os, const WeakGraph& g) {
  const auto& p = g.partition();
  os << "# " << p.agents() << ' ' << p.num_sending() << ' ' << p.num_receiving();
  for (int n : p.sending_sizes()) os << ' ' << n;
  for (int n : p.receiving_sizes()) os << ' ' << n;
  os << '\n';
  write_matrix_rows(os, g.matrix());
}

struct RawGraph {
  Matrix matrix;
  Partition partition;
};

/// Parses the CSV form without validating the weak-graph invariants.
inline RawGraph parse_graph_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ParseError("empty graph file");
  header = detail::trim(header);
  if (header.empty() || header.front() != '#') throw ParseError("graph file must start with '# N S R <sizes>'");
  std::istringstream hs(header.substr(1));
  int n = 0, s = 0, r = 0;
  if (!(hs >> n >> s >> r) || s < 1 || r < 1) throw ParseError("malformed graph header: " + header);
  std::vector<int> sending(static_cast<std::size_t>(s)), receiving(static_cast<std::size_t>(r));
  for (auto& x : sending)
    if (!(hs >> x)) throw ParseError("graph header lists fewer sizes than S + R");
  for (auto& x : receiving)
    if (!(hs >> x)) throw ParseError("graph header lists fewer sizes than S + R");
  Partition partition(sending, receiving);
  if (partition.agents() != n) throw ParseError("graph header sizes do not add up to N");
  return {read_matrix_rows(is), std::move(partition)};
}

inline WeakGraph read_graph_csv(std::istream& is) {
  auto raw = parse_graph_csv(is);
  return WeakGraph::from(raw.matrix, raw.partition);
}

inline WeakGraph load_graph_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open graph file " + path);
  return read_graph_csv(in);
}

}  // namespace weaksl
