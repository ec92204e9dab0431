#include "vrsp/assignment.hpp"

#include <cmath>
#include <limits>

namespace vrsp {

const AssignmentSolution& AssignmentSolver::solve(const CostMatrix& C) {
  if (C.rows() != C.cols()) throw DimensionError("solve_assignment: cost matrix must be square");
  if (C.rows() == 0) throw std::invalid_argument("solve_assignment: empty cost matrix");
  require_finite(C, "solve_assignment");

  const int n = static_cast<int>(C.rows());
  n_ = n;
  const double inf = std::numeric_limits<double>::infinity();
  u_.assign(n + 1, 0.0);
  v_.assign(n + 1, 0.0);
  match_.assign(n + 1, 0);  // match_[col] = row, both 1-based, 0 = free
  way_.assign(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match_[0] = i;
    int j0 = 0;
    minv_.assign(n + 1, inf);
    used_.assign(n + 1, 0);
    do {
      used_[j0] = 1;
      const int i0 = match_[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used_[j]) continue;
        const double cur = C(i0 - 1, j - 1) - u_[i0] - v_[j];
        if (cur < minv_[j]) {
          minv_[j] = cur;
          way_[j] = j0;
        }
        if (minv_[j] < delta) {
          delta = minv_[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used_[j]) {
          u_[match_[j]] += delta;
          v_[j] -= delta;
        } else {
          minv_[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_[j0] != 0);
    do {
      const int j1 = way_[j0];
      match_[j0] = match_[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  sol_.assignment.assign(n, -1);
  for (int j = 1; j <= n; ++j) sol_.assignment[match_[j] - 1] = j - 1;
  double best = 0.0;
  for (int i = 0; i < n; ++i) best += C(i, sol_.assignment[i]);
  sol_.total_cost = best;

  // Every optimal assignment uses only edges with zero reduced cost under the
  // optimal duals, so the lexicographically smallest optimum is the
  // lexicographically smallest perfect matching of the tight-edge graph.
  const double tol = 1e-11 * (1.0 + C.cwiseAbs().maxCoeff());
  tight_.assign(static_cast<size_t>(n) * n, 0);
  bool unique = true;
  for (int i = 0; i < n; ++i) {
    int count = 0;
    for (int j = 0; j < n; ++j) {
      if (C(i, j) - u_[i + 1] - v_[j + 1] <= tol) {
        tight_[static_cast<size_t>(i) * n + j] = 1;
        ++count;
      }
    }
    if (count > 1) unique = false;
  }
  if (unique) return sol_;

  std::vector<int> lex(n, -1);
  col_owner_.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (!tight_[static_cast<size_t>(i) * n + j] || col_owner_[j] >= 0) continue;
      col_owner_[j] = i;
      if (can_complete(i + 1)) {
        lex[i] = j;
        break;
      }
      col_owner_[j] = -1;
    }
    if (lex[i] < 0) return sol_;  // numerical trouble; keep the Hungarian optimum
  }
  double lex_cost = 0.0;
  for (int i = 0; i < n; ++i) lex_cost += C(i, lex[i]);
  if (lex_cost <= best + tol * n) {
    sol_.assignment = std::move(lex);
    sol_.total_cost = lex_cost;
  }
  return sol_;
}

// Can rows [from_row, n) be matched into columns not owned by rows < from_row
// using tight edges only?
bool AssignmentSolver::can_complete(int from_row) {
  std::vector<int> saved = col_owner_;
  bool ok = true;
  for (int r = from_row; r < n_ && ok; ++r) {
    visited_.assign(n_, 0);
    ok = augment(r, from_row);
  }
  col_owner_ = std::move(saved);
  return ok;
}

bool AssignmentSolver::augment(int row, int from_row) {
  for (int j = 0; j < n_; ++j) {
    if (!tight_[static_cast<size_t>(row) * n_ + j] || visited_[j]) continue;
    visited_[j] = 1;
    const int owner = col_owner_[j];
    if (owner < 0 || (owner >= from_row && augment(owner, from_row))) {
      col_owner_[j] = row;
      return true;
    }
  }
  return false;
}

AssignmentSolution solve_assignment(const CostMatrix& C) {
  AssignmentSolver solver;
  return solver.solve(C);
}

}  // namespace vrsp
