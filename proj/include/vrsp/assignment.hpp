// Square linear assignment problem (Hungarian method).
#pragma once

#include "vrsp/tensor.hpp"

#include <vector>

namespace vrsp {

/// q x q finite costs; c(i, j) is the cost of assigning row i to column j.
using CostMatrix = Matrix;

struct AssignmentSolution {
  std::vector<int> assignment;  // row i -> column assignment[i]
  double total_cost = 0.0;
};

/// Reusable solver; keeps scratch buffers between calls so the per-draw
/// alignment loop does not allocate. Not thread-safe; use one per thread.
class AssignmentSolver {
 public:
  /// Minimum-cost bijection. Among optimal assignments the lexicographically
  /// smallest row -> column mapping is returned.
  const AssignmentSolution& solve(const CostMatrix& C);

 private:
  bool can_complete(int from_row);
  bool augment(int row, int from_row);

  AssignmentSolution sol_;
  std::vector<double> u_, v_, minv_;
  std::vector<int> match_, way_, col_owner_;
  std::vector<char> used_, tight_, visited_;
  int n_ = 0;
};

AssignmentSolution solve_assignment(const CostMatrix& C);

}  // namespace vrsp
