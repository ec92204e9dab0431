#include "vrsp/summaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vrsp {

namespace {

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("credible level must lie in (0, 1)");
}

// ceil(level * T) without spurious round-up from binary representation.
int mass_count(double level, int T) {
  return static_cast<int>(std::ceil(level * T - 1e-9));
}

}  // namespace

Interval hpd_interval(std::span<const double> sorted, double level) {
  check_level(level);
  const int T = static_cast<int>(sorted.size());
  if (T == 0) throw std::invalid_argument("hpd_interval: empty input");
  if (!std::is_sorted(sorted.begin(), sorted.end())) {
    throw std::invalid_argument("hpd_interval: draws must be sorted ascending");
  }
  const int k = mass_count(level, T);
  if (k >= T) return {sorted.front(), sorted.back()};
  int best = 0;
  double width = sorted[k] - sorted[0];
  for (int i = 1; i + k < T; ++i) {
    const double w = sorted[i + k] - sorted[i];
    if (w < width) {
      width = w;
      best = i;
    }
  }
  return {sorted[best], sorted[best + k]};
}

Interval equal_tail_interval(std::span<const double> sorted, double level) {
  check_level(level);
  const int T = static_cast<int>(sorted.size());
  if (T == 0) throw std::invalid_argument("equal_tail_interval: empty input");
  const int k = mass_count(level, T);
  if (k >= T) return {sorted.front(), sorted.back()};
  const int lo = (T - 1 - k) / 2;
  return {sorted[lo], sorted[lo + k]};
}

SimultaneousBands simultaneous_credible_region(const Matrix& draws, double level) {
  check_level(level);
  const int T = static_cast<int>(draws.rows());
  const int m = static_cast<int>(draws.cols());
  if (m < 1) throw std::invalid_argument("simultaneous_credible_region: no scalars");
  if (T < 2 || T < 2.0 / level) {
    throw std::invalid_argument("simultaneous_credible_region: too few draws for the requested level");
  }
  require_finite(draws, "simultaneous_credible_region");

  // depth(t) = min over scalars of min(rank, T + 1 - rank).
  std::vector<int> depth(T, T);
  std::vector<int> order(T);
  Matrix sorted(T, m);
  for (int k = 0; k < m; ++k) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return draws(a, k) < draws(b, k); });
    for (int r = 0; r < T; ++r) {
      const int t = order[r];
      sorted(r, k) = draws(t, k);
      depth[t] = std::min(depth[t], std::min(r + 1, T - r));
    }
  }

  const int need = mass_count(level, T);
  std::vector<int> by_depth = depth;
  std::sort(by_depth.begin(), by_depth.end(), std::greater<>());
  SimultaneousBands out;
  out.t_star = by_depth[need - 1];
  out.lo.resize(m);
  out.hi.resize(m);
  for (int k = 0; k < m; ++k) {
    out.lo[k] = sorted(out.t_star - 1, k);
    out.hi[k] = sorted(T - out.t_star, k);
  }
  for (int t = 0; t < T; ++t) {
    bool inside = true;
    for (int k = 0; k < m && inside; ++k) {
      inside = draws(t, k) >= out.lo[k] && draws(t, k) <= out.hi[k];
    }
    out.joint_coverage += inside ? 1 : 0;
  }
  return out;
}

EffectiveColumns effective_columns(const Matrix& lo, const Matrix& hi) {
  require_same_shape(lo, hi, "effective_columns");
  EffectiveColumns out;
  for (Eigen::Index j = 0; j < lo.cols(); ++j) {
    bool all_zero = true;
    for (Eigen::Index r = 0; r < lo.rows() && all_zero; ++r) {
      all_zero = lo(r, j) <= 0.0 && hi(r, j) >= 0.0;
    }
    if (all_zero) out.redundant.push_back(static_cast<int>(j));
  }
  out.q_hat = static_cast<int>(lo.cols()) - static_cast<int>(out.redundant.size());
  return out;
}

CredibleSummary summarize(const LoadingsSample& reordered, double level) {
  reordered.validate();
  check_level(level);
  const int T = reordered.draws(), p = reordered.p(), q = reordered.q();

  // Flatten to T x (p*q), column index j * p + r (factor-major).
  Matrix flat(T, p * q);
  for (int t = 0; t < T; ++t) {
    const auto d = reordered.draw(t);
    for (int j = 0; j < q; ++j) {
      for (int r = 0; r < p; ++r) flat(t, j * p + r) = d(r, j);
    }
  }

  CredibleSummary s;
  s.level = level;
  s.mean = sample_mean(reordered);
  s.sd = Matrix::Zero(p, q);
  s.hpd_lo = s.hpd_hi = s.scr_lo = s.scr_hi = Matrix::Zero(p, q);
  std::vector<double> col(T);
  for (int j = 0; j < q; ++j) {
    for (int r = 0; r < p; ++r) {
      const int k = j * p + r;
      for (int t = 0; t < T; ++t) col[t] = flat(t, k);
      if (T > 1) {
        double ss = 0.0;
        for (double x : col) ss += (x - s.mean(r, j)) * (x - s.mean(r, j));
        s.sd(r, j) = std::sqrt(ss / (T - 1));
      }
      std::sort(col.begin(), col.end());
      const Interval h = hpd_interval(col, level);
      s.hpd_lo(r, j) = h.lo;
      s.hpd_hi(r, j) = h.hi;
    }
  }

  const SimultaneousBands bands = simultaneous_credible_region(flat, level);
  for (int j = 0; j < q; ++j) {
    for (int r = 0; r < p; ++r) {
      s.scr_lo(r, j) = bands.lo[j * p + r];
      s.scr_hi(r, j) = bands.hi[j * p + r];
    }
  }
  s.t_star = bands.t_star;
  s.joint_coverage = bands.joint_coverage;
  const EffectiveColumns eff = effective_columns(s.scr_lo, s.scr_hi);
  s.redundant_columns = eff.redundant;
  s.q_hat = eff.q_hat;
  return s;
}

CredibleSummary summarize(const RspResult& result, double level) {
  return summarize(result.reordered, level);
}

CredibleSummary summarize(const OpResult& result, double level) {
  return summarize(result.reordered, level);
}

}  // namespace vrsp
