// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "dsbeam/types.hpp"

namespace dsbeam {

/// Minimum-cost injective column -> row matching of a nonnegative M x N cost
/// matrix (M >= N). total_cost is the left-to-right sum over columns.
struct AssignmentResult {
  Eigen::VectorXi row_of_column;  // length N, pairwise distinct values in 0..M-1
  double total_cost = 0.0;
};

namespace assignment_detail {

inline void validate_cost(const RMatrix& cost) {
  if (cost.rows() < cost.cols())
    throw InfeasibleAssignmentError("cost matrix needs at least as many rows as columns (" +
                                    std::to_string(cost.rows()) + " < " +
                                    std::to_string(cost.cols()) + ")");
  for (Eigen::Index r = 0; r < cost.rows(); ++r)
    for (Eigen::Index c = 0; c < cost.cols(); ++c)
      if (!std::isfinite(cost(r, c)) || cost(r, c) < 0.0)
        throw InvalidCostError("cost entries must be finite and nonnegative");
}

// Hungarian method with potentials (Jonker-Volgenant flavour) on an
// n x m matrix with n <= m: every row is matched to a distinct column.
// Returns the matched column per row.
inline std::vector<int> hungarian_rows(const RMatrix& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j)
        if (!used[j]) {
          const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

// Optimal row per column of an M x N (M >= N) matrix, via the transpose.
inline std::vector<int> optimal_rows(const RMatrix& cost) {
  const RMatrix t = cost.transpose();
  return hungarian_rows(t);
}

inline double column_order_sum(const RMatrix& cost, const std::vector<int>& rows) {
  double s = 0.0;
  for (std::size_t j = 0; j < rows.size(); ++j) s += cost(rows[j], static_cast<Eigen::Index>(j));
  return s;
}

}  // namespace assignment_detail

/// Exact solver for the unbalanced assignment problem: pick one entry per
/// column, all in distinct rows, minimizing the sum. Ties are broken towards
/// the lexicographically smallest row vector so reruns and ports agree.
template <typename Derived>
AssignmentResult solve_unbalanced(const Eigen::MatrixBase<Derived>& cost_in) {
  const RMatrix cost = cost_in.template cast<double>();
  assignment_detail::validate_cost(cost);
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());

  AssignmentResult result;
  result.row_of_column.resize(n);
  if (n == 0) return result;

  const std::vector<int> base = assignment_detail::optimal_rows(cost);
  const double best = assignment_detail::column_order_sum(cost, base);

  // Canonicalize: fix columns left to right onto the smallest row index that
  // still admits an optimal completion. Each probe solves the remaining
  // subproblem; matrices here are small enough that this is cheap.
  std::vector<int> chosen(n, -1);
  std::vector<char> used(m, 0);
  double prefix = 0.0;
  for (int j = 0; j < n; ++j) {
    int pick = -1;
    int fallback = -1;
    double fallback_total = std::numeric_limits<double>::infinity();
    for (int r = 0; r < m; ++r) {
      if (used[r]) continue;
      double total = prefix + cost(r, j);
      if (j + 1 < n) {
        RMatrix sub(m - j - 1, n - j - 1);
        std::vector<int> sub_rows;
        sub_rows.reserve(m - j - 1);
        for (int rr = 0; rr < m; ++rr)
          if (!used[rr] && rr != r) sub_rows.push_back(rr);
        for (int rr = 0; rr < static_cast<int>(sub_rows.size()); ++rr)
          for (int cc = j + 1; cc < n; ++cc) sub(rr, cc - j - 1) = cost(sub_rows[rr], cc);
        const std::vector<int> sub_sol = assignment_detail::optimal_rows(sub);
        for (int cc = 0; cc < n - j - 1; ++cc) total += sub(sub_sol[cc], cc);
      }
      if (total == best) {
        pick = r;
        break;
      }
      if (total < fallback_total) {
        fallback_total = total;
        fallback = r;
      }
    }
    if (pick == -1) pick = fallback;  // last-ulp mismatch; fallback is still an optimum
    chosen[j] = pick;
    used[pick] = 1;
    prefix += cost(pick, j);
  }

  for (int j = 0; j < n; ++j) result.row_of_column(j) = chosen[j];
  result.total_cost = assignment_detail::column_order_sum(cost, chosen);
  return result;
}

/// Exhaustive oracle: enumerates injective column -> row maps in lexicographic
/// order of the row vector, keeping the first optimum seen. Guarded to small
/// instances; intended for tests and the acceptance suite.
template <typename Derived>
AssignmentResult brute_force_assignment(const Eigen::MatrixBase<Derived>& cost_in) {
  const RMatrix cost = cost_in.template cast<double>();
  assignment_detail::validate_cost(cost);
  const int m = static_cast<int>(cost.rows());
  const int n = static_cast<int>(cost.cols());
  if (m > 10) throw OracleTooLargeError("brute_force_assignment is limited to 10 rows");

  AssignmentResult best;
  best.row_of_column.resize(n);
  if (n == 0) return best;
  best.total_cost = std::numeric_limits<double>::infinity();

  std::vector<int> rows(n, -1);
  std::vector<char> used(m, 0);
  auto recurse = [&](auto&& self, int j) -> void {
    if (j == n) {
      const double total = assignment_detail::column_order_sum(cost, rows);
      if (total < best.total_cost) {
        best.total_cost = total;
        for (int c = 0; c < n; ++c) best.row_of_column(c) = rows[c];
      }
      return;
    }
    for (int r = 0; r < m; ++r) {
      if (used[r]) continue;
      used[r] = 1;
      rows[j] = r;
      self(self, j + 1);
      used[r] = 0;
    }
  };
  recurse(recurse, 0);
  return best;
}

}  // namespace dsbeam
