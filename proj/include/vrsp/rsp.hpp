// Rotation-sign-permutation (RSP) post-processing of MCMC loading draws.
//
// Step 1 varimax-rotates every draw. Step 2 alternates two minimizations of
//   Psi = sum_t sum_r sum_j (s_j^(t) * L~^(t)[r, nu_j^(t)] - L*[r, j])^2
// until the decrease in Psi falls below convergence_factor * T * p * q:
//   - reference update: L* <- mean of the currently reordered draws;
//   - sign-permutation update: per draw, (s, nu) minimizing its term given L*.
// The per-draw update is solved exactly (one assignment problem per sign
// vector) or approximately by simulated annealing.
#pragma once

#include "vrsp/assignment.hpp"
#include "vrsp/tensor.hpp"
#include "vrsp/varimax.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace vrsp {

enum class SpScheme { Exact, FullSA, PartialSA };

const char* to_string(SpScheme s);
SpScheme parse_scheme(const std::string& name);  // exact | full-sa | partial-sa

/// Factor counts above which the exact scheme warns / refuses.
inline constexpr int kExactWarnQ = 10;
inline constexpr int kExactMaxQ = 25;

struct RspConfig {
  SpScheme scheme = SpScheme::Exact;
  int max_outer_iters = 100;
  /// Stop when Psi decreases by less than convergence_factor * T * p * q.
  double convergence_factor = 1e-6;
  /// Annealing loops B; 0 selects 20 for partial SA and 100 for full SA.
  int sa_loops = 0;
  /// Cooling schedule T_b = gamma / log(b + gamma0), b = 1..B.
  double gamma = 1.0;
  double gamma0 = 1.0;
  std::uint64_t rng_seed = 1;
  /// Commit the final annealing state even if it is worse than the draw's
  /// current state (the literal annealing step; Psi may then increase).
  bool faithful_sa = false;
  /// Extra runs from seeded random initial transforms; the lowest final Psi
  /// wins. Run 0 always starts from identity transforms.
  int restarts = 0;
  /// Varimax step on/off. Off runs the sign-permutation stage alone.
  bool rotate = true;
  VarimaxConfig varimax;
  int threads = 1;
  std::function<void(const std::string&)> on_warning;
  /// Called with (restart, outer_iter, psi) after initialization (iter 0) and
  /// after every outer iteration.
  std::function<void(int, int, double)> on_iteration;

  int effective_sa_loops() const;
  void validate() const;
};

struct DrawTransform {
  RotationMatrix rotation;  // varimax rotation R^(t)
  SignedPermutation sp;

  /// Overall orthogonal map: reordered = raw * full().
  Matrix full() const { return rotation * action_matrix(sp); }
};

struct RspResult {
  LoadingsSample reordered;
  std::vector<DrawTransform> transforms;
  LoadingsMatrix reference;
  /// Psi after initialization, then after every outer iteration. Each value
  /// is evaluated with the reference equal to the mean of the reordered
  /// draws at that point.
  std::vector<double> objective_trace;
  bool converged = false;
  int outer_iters = 0;
  int best_restart = 0;
};

/// sum_r sum_j (s_j * Lt[r, nu_j] - Lstar[r, j])^2.
double sp_cost(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
               const SignedPermutation& sp);

/// c(i, j) = sum_r (sigma_j * Lt[r, j] - Lstar[r, i])^2, where sigma holds one
/// sign per column of Lt. An assignment row i -> column j then corresponds to
/// nu_i = j and s_i = sigma_j.
CostMatrix build_cost_matrix(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
                             std::span<const int> sigma);

struct SpStep {
  SignedPermutation sp;
  double cost = 0.0;
};

/// Global minimizer of sp_cost over all 2^q * q! signed permutations by
/// solving one assignment problem per sign vector. Sign vectors whose
/// row/column-minimum lower bound cannot beat the incumbent are skipped.
/// When `incumbent` is given it is kept unless something strictly better
/// exists.
SpStep sp_step_exact(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
                     const SignedPermutation* incumbent = nullptr,
                     const std::function<void(const std::string&)>& warn = {});

/// Simulated-annealing search started from `init`. Full SA flips one sign
/// and swaps one pair of nu (possibly the no-op pair k == l) per proposal;
/// partial SA flips one sign and re-solves nu by assignment. Unless cfg.faithful_sa, the final state is
/// returned only if it is no worse than `init`.
SpStep sp_step_sa(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
                  const SignedPermutation& init, const RspConfig& cfg,
                  std::mt19937_64& rng);

/// Mean of the draws after applying their signed permutations.
LoadingsMatrix rlme_step(const LoadingsSample& rotated,
                         const std::vector<SignedPermutation>& sps);

/// Psi for the given transforms and reference.
double rsp_objective(const LoadingsSample& rotated,
                     const std::vector<SignedPermutation>& sps,
                     const LoadingsMatrix& reference);

/// Per-draw RNG stream for the annealing step, independent of thread count.
std::mt19937_64 sa_stream(std::uint64_t seed, int draw, int outer_iter, int restart);

RspResult rsp_run(const LoadingsSample& raw, const RspConfig& cfg = {});

/// F^(t) * R^(t) * S^(t) * P^(t) for every draw.
std::vector<Matrix> transform_factors(const std::vector<Matrix>& factors,
                                      const std::vector<DrawTransform>& transforms);

}  // namespace vrsp
