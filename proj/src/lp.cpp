/*
 Copyright 2026 The hvacctl Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "hvac/lp.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "hvac/errors.hpp"

namespace hvac {

namespace {

constexpr double kEps = 1e-9;

// Row-major tableau; the last column is the right-hand side, the last row the reduced costs.
class Tableau {
 public:
  Tableau(int rows, int cols) : rows_(rows), cols_(cols), t_(static_cast<std::size_t>((rows + 1) * (cols + 1)), 0.0) {}

  double& at(int r, int c) { return t_[static_cast<std::size_t>(r * (cols_ + 1) + c)]; }
  double at(int r, int c) const { return t_[static_cast<std::size_t>(r * (cols_ + 1) + c)]; }
  double& rhs(int r) { return at(r, cols_); }
  double& cost(int c) { return at(rows_, c); }

  void pivot(int pr, int pc) {
    const double inv = 1.0 / at(pr, pc);
    for (int c = 0; c <= cols_; ++c) at(pr, c) *= inv;
    at(pr, pc) = 1.0;
    for (int r = 0; r <= rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_;
  int cols_;
  std::vector<double> t_;
};

// Runs simplex iterations on columns [0, active_cols). Returns false if unbounded.
bool iterate(Tableau& t, std::vector<int>& basis, int active_cols, int& pivots, int max_pivots) {
  while (true) {
    int enter = -1;
    for (int c = 0; c < active_cols; ++c) {
      if (t.at(t.rows(), c) < -kEps) {
        enter = c;
        break;
      }
    }
    if (enter < 0) return true;
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < t.rows(); ++r) {
      const double a = t.at(r, enter);
      if (a <= kEps) continue;
      const double ratio = t.at(r, t.cols()) / a;
      if (ratio < best - 1e-12 || (std::abs(ratio - best) <= 1e-12 && leave >= 0 && basis[r] < basis[leave])) {
        best = ratio;
        leave = r;
      }
    }
    if (leave < 0) return false;
    if (++pivots > max_pivots) throw NumericalError("simplex pivot limit reached (" + std::to_string(max_pivots) + ")");
    t.pivot(leave, enter);
    basis[static_cast<std::size_t>(leave)] = enter;
  }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, int max_pivots) {
  const int m = static_cast<int>(lp.a.size());
  const int n = static_cast<int>(lp.c.size());
  if (static_cast<int>(lp.b.size()) != m) throw ConfigError("LP right-hand side length differs from row count");
  for (const auto& row : lp.a) {
    if (static_cast<int>(row.size()) != n) throw ConfigError("LP row length differs from variable count");
  }

  // Columns: x (n), slack (m), artificial (one per negative-rhs row).
  std::vector<int> art_row;
  for (int r = 0; r < m; ++r) {
    if (lp.b[static_cast<std::size_t>(r)] < 0.0) art_row.push_back(r);
  }
  const int n_art = static_cast<int>(art_row.size());
  const int cols = n + m + n_art;
  Tableau t(m, cols);
  std::vector<int> basis(static_cast<std::size_t>(m));
  int k = 0;
  for (int r = 0; r < m; ++r) {
    const double sign = lp.b[static_cast<std::size_t>(r)] < 0.0 ? -1.0 : 1.0;
    for (int c = 0; c < n; ++c) t.at(r, c) = sign * lp.a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    t.at(r, n + r) = sign;
    t.rhs(r) = sign * lp.b[static_cast<std::size_t>(r)];
    if (sign < 0.0) {
      t.at(r, n + m + k) = 1.0;
      basis[static_cast<std::size_t>(r)] = n + m + k;
      ++k;
    } else {
      basis[static_cast<std::size_t>(r)] = n + r;
    }
  }

  int pivots = 0;
  if (n_art > 0) {
    // Phase one: minimise the sum of artificials, priced out against the basis.
    for (int c = 0; c <= cols; ++c) t.at(m, c) = 0.0;
    for (int r : art_row) {
      for (int c = 0; c <= cols; ++c) t.at(m, c) -= t.at(r, c);
    }
    for (int j = 0; j < n_art; ++j) t.at(m, n + m + j) = 0.0;
    iterate(t, basis, cols, pivots, max_pivots);
    if (t.at(m, cols) < -1e-7) throw NumericalError("linear program is infeasible");
    // Drive remaining artificials out of the basis where possible.
    for (int r = 0; r < m; ++r) {
      if (basis[static_cast<std::size_t>(r)] < n + m) continue;
      for (int c = 0; c < n + m; ++c) {
        if (std::abs(t.at(r, c)) > kEps) {
          t.pivot(r, c);
          basis[static_cast<std::size_t>(r)] = c;
          break;
        }
      }
    }
  }

  // Phase two: original costs, artificial columns excluded from entering.
  for (int c = 0; c <= cols; ++c) t.at(m, c) = 0.0;
  for (int c = 0; c < n; ++c) t.at(m, c) = lp.c[static_cast<std::size_t>(c)];
  for (int r = 0; r < m; ++r) {
    const int bc = basis[static_cast<std::size_t>(r)];
    const double cb = bc < n ? lp.c[static_cast<std::size_t>(bc)] : 0.0;
    if (cb == 0.0) continue;
    for (int c = 0; c <= cols; ++c) t.at(m, c) -= cb * t.at(r, c);
  }
  if (!iterate(t, basis, n + m, pivots, max_pivots)) throw NumericalError("linear program is unbounded");

  LpSolution sol;
  sol.x.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < m; ++r) {
    const int bc = basis[static_cast<std::size_t>(r)];
    if (bc < n) sol.x[static_cast<std::size_t>(bc)] = std::max(0.0, t.rhs(r));
  }
  for (int c = 0; c < n; ++c) sol.objective += lp.c[static_cast<std::size_t>(c)] * sol.x[static_cast<std::size_t>(c)];
  sol.pivots = pivots;
  return sol;
}

}  // namespace hvac
