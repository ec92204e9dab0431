// Posterior summaries of a reordered loadings sample.
#pragma once

#include "vrsp/procrustes.hpp"
#include "vrsp/rsp.hpp"
#include "vrsp/tensor.hpp"

#include <span>
#include <vector>

namespace vrsp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Shortest interval [x[i], x[i + k]] with k = ceil(level * T) over the sorted
/// draws; ties go to the lowest start index. `sorted` must be ascending.
Interval hpd_interval(std::span<const double> sorted, double level);

/// Equal-tail counterpart with the same index span k, centred in the sorted
/// draws.
Interval equal_tail_interval(std::span<const double> sorted, double level);

struct SimultaneousBands {
  std::vector<double> lo, hi;  // one band per scalar
  int t_star = 0;              // lower order-statistic rank (1-based)
  int joint_coverage = 0;      // draws inside every band simultaneously
};

/// Rank-based simultaneous credible region over the columns of `draws`
/// (T x m). Each band runs from the t*-th to the (T + 1 - t*)-th order
/// statistic of its scalar, with t* the largest rank for which at least
/// ceil(level * T) draws lie inside all m bands at once.
SimultaneousBands simultaneous_credible_region(const Matrix& draws, double level);

struct EffectiveColumns {
  std::vector<int> redundant;  // 0-based column indices
  int q_hat = 0;
};

/// A column is redundant when every band in it contains zero.
EffectiveColumns effective_columns(const Matrix& lo, const Matrix& hi);

struct CredibleSummary {
  Matrix mean, sd;
  Matrix hpd_lo, hpd_hi;
  Matrix scr_lo, scr_hi;
  double level = 0.99;
  std::vector<int> redundant_columns;
  int q_hat = 0;
  int t_star = 0;
  int joint_coverage = 0;
};

CredibleSummary summarize(const LoadingsSample& reordered, double level = 0.99);
CredibleSummary summarize(const RspResult& result, double level = 0.99);
CredibleSummary summarize(const OpResult& result, double level = 0.99);

}  // namespace vrsp
