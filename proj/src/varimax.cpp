#include "vrsp/varimax.hpp"

#include "vrsp/parallel.hpp"

#include <cmath>
#include <string>

namespace vrsp {

void VarimaxConfig::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("varimax: eps must be > 0");
  if (max_sweeps < 1) throw std::invalid_argument("varimax: max_sweeps must be >= 1");
}

double varimax_objective(const LoadingsMatrix& L) {
  require_finite(L, "varimax_objective");
  const double p = static_cast<double>(L.rows());
  double total = 0.0;
  for (Eigen::Index j = 0; j < L.cols(); ++j) {
    const auto sq = L.col(j).array().square();
    const double s2 = sq.sum();
    total += sq.square().sum() - s2 * s2 / p;
  }
  return 0.25 * total;
}

namespace {

// Closed-form optimal planar rotation of columns (j, k). Returns the angle
// applied, or 0 when the pair is degenerate.
double rotate_pair(Matrix& L, Matrix& R, Eigen::Index j, Eigen::Index k) {
  const double p = static_cast<double>(L.rows());
  double A = 0.0, B = 0.0, C = 0.0, D = 0.0;
  for (Eigen::Index r = 0; r < L.rows(); ++r) {
    const double x = L(r, j), y = L(r, k);
    const double u = x * x - y * y;
    const double v = 2.0 * x * y;
    A += u;
    B += v;
    C += u * u - v * v;
    D += 2.0 * u * v;
  }
  const double num = D - 2.0 * A * B / p;
  const double den = C - (A * A - B * B) / p;
  if (std::abs(num) < 1e-300 && std::abs(den) < 1e-300) return 0.0;
  const double phi = 0.25 * std::atan2(num, den);
  if (phi == 0.0) return 0.0;
  const double c = std::cos(phi), s = std::sin(phi);
  for (Matrix* M : {&L, &R}) {
    for (Eigen::Index r = 0; r < M->rows(); ++r) {
      const double x = (*M)(r, j), y = (*M)(r, k);
      (*M)(r, j) = c * x + s * y;
      (*M)(r, k) = -s * x + c * y;
    }
  }
  return phi;
}

}  // namespace

VarimaxResult varimax_rotate(const LoadingsMatrix& L, const VarimaxConfig& cfg) {
  cfg.validate();
  require_finite(L, "varimax_rotate");
  const Eigen::Index p = L.rows(), q = L.cols();
  if (q < 1 || p < 1) throw DimensionError("varimax_rotate: empty matrix");

  VarimaxResult res;
  res.rotation = RotationMatrix::Identity(q, q);
  if (q == 1 || p < 2) {
    res.rotated = L;
    res.objective = varimax_objective(L);
    return res;
  }

  Vector h = Vector::Ones(p);
  Matrix work = L;
  if (cfg.normalize) {
    h = L.rowwise().norm();
    for (Eigen::Index r = 0; r < p; ++r) {
      if (h(r) > 0.0) work.row(r) /= h(r);
      else h(r) = 1.0;
    }
  }

  double obj = varimax_objective(work);
  for (int sweep = 1; sweep <= cfg.max_sweeps; ++sweep) {
    double max_angle = 0.0;
    for (Eigen::Index j = 0; j + 1 < q; ++j) {
      for (Eigen::Index k = j + 1; k < q; ++k) {
        max_angle = std::max(max_angle, std::abs(rotate_pair(work, res.rotation, j, k)));
      }
    }
    res.sweeps = sweep;
    const double next = varimax_objective(work);
    const double gain = next - obj;
    obj = next;
    if (max_angle < 1e-14 || gain <= cfg.eps * std::max(std::abs(obj), 1e-300)) break;
  }

  // Recompute from the accumulated rotation so rotated == L * rotation holds
  // to machine precision.
  res.rotated = L * res.rotation;
  res.objective = varimax_objective(res.rotated);
  return res;
}

VarimaxSample varimax_map(const LoadingsSample& sample, const VarimaxConfig& cfg,
                          int threads) {
  sample.validate();
  cfg.validate();
  VarimaxSample out;
  out.rotated = LoadingsSample(sample.p(), sample.q(), sample.draws());
  out.rotations.assign(sample.draws(), RotationMatrix());
  parallel_for(sample.draws(), threads, [&](int t) {
    try {
      VarimaxResult r = varimax_rotate(sample.matrix(t), cfg);
      out.rotated.draw(t) = r.rotated;
      out.rotations[t] = std::move(r.rotation);
    } catch (const std::exception& e) {
      throw std::runtime_error("varimax: draw " + std::to_string(t + 1) + ": " + e.what());
    }
  });
  if (sample.has_variances()) out.rotated.set_variances(sample.variances());
  return out;
}

}  // namespace vrsp
