// Synthetic factor-analysis data and a conjugate Gibbs sampler for the
// strict factor model Y_i = Lambda F_i + e_i, F_i ~ N(0, I), e_i ~ N(0, Sigma).
#pragma once

#include "vrsp/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vrsp {

/// (2p + 1 - sqrt(8p + 1)) / 2.
double ledermann_bound(int p);

struct FaScenario {
  int n = 100;
  int p = 8;
  int q_true = 2;
  /// Factor (0-based) each variable loads on; -1 for none. Size p.
  std::vector<int> block_map;
  /// Nonzero true loadings are loading_scale + U(-jitter, jitter).
  double loading_scale = 0.8;
  double jitter = 0.1;
  /// One shared idiosyncratic variance, or one per variable.
  std::vector<double> sigma2{0.36};
  std::uint64_t seed = 1;

  void validate() const;
};

/// Parses "1-4,5-8" (1-based inclusive ranges, one per factor) into a block
/// map over p variables. Variables outside every range map to -1.
std::vector<int> parse_blocks(const std::string& text, int p);

/// Contiguous equal blocks: variables split evenly over q factors.
std::vector<int> even_blocks(int p, int q);

struct SyntheticData {
  Matrix data;           // n x p
  LoadingsMatrix truth;  // p x q_true
  Matrix factors;        // n x q_true
  Vector sigma2;         // p
};

SyntheticData generate_synthetic(const FaScenario& scn);

/// T noisy copies of one block-structured p x q loading matrix, each hit by
/// a uniformly random signed permutation. Draw t is
/// (base + noise * Z_t) with columns relabeled.
LoadingsSample relabeling_instance(int p, int q, int T, double noise, std::uint64_t seed);

/// Independent priors: lambda_rj ~ N(l0, 1/L0) (flat when L0 == 0),
/// sigma2_r ~ IG(a0 / 2, b0 / 2).
struct FaPriors {
  double l0 = 0.0;
  double L0 = 0.0;
  double a0 = 0.001;
  double b0 = 0.001;

  void validate() const;
};

struct GibbsConfig {
  /// Total iterations including burn-in.
  int iters = 12000;
  int burnin = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
  /// Standardize each column to mean 0 and variance 1 before sampling.
  bool center_data = true;
  bool store_factors = false;
  /// Fix the upper triangle of Lambda at zero. Sign switching is not removed
  /// by this constraint; it is here for demonstration only.
  bool lower_triangular = false;

  int kept_draws() const { return (iters - burnin) / thin; }
  void validate() const;
};

/// Column-wise centering and scaling to unit sample variance (n - 1).
Matrix standardize(const Matrix& Y);

/// Returns thinned post-burn-in loading draws with per-draw variances (and
/// factor scores when requested).
LoadingsSample gibbs_sample(const Matrix& Y, int q, const FaPriors& priors,
                            const GibbsConfig& cfg);

}  // namespace vrsp
