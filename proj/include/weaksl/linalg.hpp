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

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace weaksl {

// Dense row-major storage throughout; networks are desk-scale.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// log(sum(exp(v))) without overflow. Returns -inf for an empty span.
inline double logsumexp(const Vector& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

inline double max_abs_column_sum_error(const Matrix& m) {
  if (m.cols() == 0) return 0.0;
  return (m.colwise().sum().array() - 1.0).abs().maxCoeff();
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_csv_row(const std::string& line, std::size_t line_no) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(cell, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != cell.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed number '" + cell + "'");
    }
    row.push_back(value);
  }
  return row;
}

}  // namespace detail

/// Writes one matrix row per line with 17 significant digits.
inline void write_matrix_rows(std::ostream& os, const Matrix& m) {
  std::ostringstream line;
  line.precision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    line.str({});
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) line << ',';
      line << m(r, c);
    }
    os << line.str() << '\n';
  }
}

/// Reads comma-separated numeric rows; blank lines and lines starting with '#' are skipped.
inline Matrix read_matrix_rows(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    rows.push_back(detail::parse_csv_row(t, line_no));
    if (rows.back().size() != rows.front().size()) {
      throw ParseError("line " + std::to_string(line_no) + ": ragged row");
    }
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return m;
}

}  // namespace weaksl
