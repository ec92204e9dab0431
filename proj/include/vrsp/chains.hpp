// Alignment of independently post-processed chains to one labeling.
#pragma once

#include "vrsp/rsp.hpp"

#include <vector>

namespace vrsp {

struct ChainAlignment {
  /// Q^(c): applied to every reordered draw of chain c.
  std::vector<SignedPermutation> per_chain;
  std::vector<LoadingsSample> aligned;
  /// Mean of the aligned chain means.
  LoadingsMatrix reference;
  /// sum_c ||mean_c Q^(c) - reference||^2.
  double objective = 0.0;
  /// Chain whose labeling is kept as is.
  int anchor = 0;
};

/// Runs the sign-permutation stage (no varimax) on the per-chain posterior
/// means, starting from each mean matched to the anchor's mean, then applies
/// each chain's transform to all of its draws. The chain
/// with the largest total absolute loading mass anchors the labeling (its
/// transform is the identity).
ChainAlignment align_chains(const std::vector<LoadingsSample>& chains, int threads = 1);

ChainAlignment align_chains(const std::vector<RspResult>& chains, int threads = 1);

}  // namespace vrsp
