// Orthogonal Procrustes reordering baseline, finished with a common varimax
// rotation and one exact sign-permutation alignment.
#pragma once

#include "vrsp/rsp.hpp"

namespace vrsp {

struct OpConfig {
  int max_iters = 100;
  double convergence_factor = 1e-6;
  /// 0-based index of the draw used as the initial reference.
  int init_draw = 0;
  VarimaxConfig varimax;
  int threads = 1;
};

struct OpResult {
  LoadingsSample reordered;
  /// Full per-draw orthogonal transform: reordered[t] == raw[t] * rotations[t].
  std::vector<RotationMatrix> rotations;
  LoadingsMatrix reference;
  /// sum_t ||raw[t] R_t - mean||^2 after the initial pass and each iteration,
  /// before the final varimax pass.
  std::vector<double> objective_trace;
  bool converged = false;
  int iters = 0;
};

/// Orthogonal R minimizing ||Lt R - Lstar||_F: with Lt^T Lstar = U D V^T,
/// R = U V^T.
RotationMatrix procrustes_rotate(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar);

OpResult op_run(const LoadingsSample& raw, const OpConfig& cfg = {});

}  // namespace vrsp
