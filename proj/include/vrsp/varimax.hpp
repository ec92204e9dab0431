// Varimax rotation of a single loading matrix and of a whole MCMC sample.
#pragma once

#include "vrsp/tensor.hpp"

namespace vrsp {

struct VarimaxConfig {
  /// Stop once a full sweep improves the criterion by less than
  /// eps * |criterion| (relative).
  double eps = 1e-5;
  int max_sweeps = 1000;
  /// Kaiser row normalization before rotating.
  bool normalize = false;

  void validate() const;
};

struct VarimaxResult {
  LoadingsMatrix rotated;
  RotationMatrix rotation;  // rotated == input * rotation
  double objective = 0.0;
  int sweeps = 0;
};

/// (1/4) sum_j [ sum_r l_rj^4 - (1/p) (sum_r l_rj^2)^2 ].
double varimax_objective(const LoadingsMatrix& L);

/// Kaiser's pairwise planar-rotation algorithm. The result is only defined up
/// to a signed permutation of its columns.
VarimaxResult varimax_rotate(const LoadingsMatrix& L,
                             const VarimaxConfig& cfg = {});

struct VarimaxSample {
  LoadingsSample rotated;
  std::vector<RotationMatrix> rotations;
};

/// Rotates every draw independently. Variances are carried over unchanged;
/// factor scores are not (rsp_run moves them with transform_factors).
VarimaxSample varimax_map(const LoadingsSample& sample,
                          const VarimaxConfig& cfg = {}, int threads = 1);

}  // namespace vrsp
