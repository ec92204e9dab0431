#include "vrsp/procrustes.hpp"

#include "vrsp/parallel.hpp"

#include <Eigen/SVD>

namespace vrsp {

RotationMatrix procrustes_rotate(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar) {
  require_same_shape(Lt, Lstar, "procrustes_rotate");
  require_finite(Lt, "procrustes_rotate");
  require_finite(Lstar, "procrustes_rotate");
  const Matrix M = Lt.transpose() * Lstar;
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw std::runtime_error("procrustes_rotate: SVD failed");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

OpResult op_run(const LoadingsSample& raw, const OpConfig& cfg) {
  raw.validate();
  if (cfg.max_iters < 1) throw std::invalid_argument("op: max_iters must be >= 1");
  if (cfg.init_draw < 0 || cfg.init_draw >= raw.draws()) {
    throw std::invalid_argument("op: init draw index out of range");
  }
  const int T = raw.draws(), p = raw.p(), q = raw.q();
  const double tol = cfg.convergence_factor * T * p * q;

  OpResult res;
  res.rotations.assign(T, RotationMatrix::Identity(q, q));
  Matrix ref = raw.matrix(cfg.init_draw);

  auto rotate_all = [&] {
    parallel_for(T, cfg.threads, [&](int t) {
      res.rotations[t] = procrustes_rotate(raw.matrix(t), ref);
    });
  };
  auto mean_and_psi = [&] {
    Matrix acc = Matrix::Zero(p, q);
    for (int t = 0; t < T; ++t) acc += raw.draw(t) * res.rotations[t];
    acc /= static_cast<double>(T);
    double psi = 0.0;
    for (int t = 0; t < T; ++t) psi += (raw.draw(t) * res.rotations[t] - acc).squaredNorm();
    ref = acc;
    return psi;
  };

  rotate_all();
  res.objective_trace.push_back(mean_and_psi());
  for (int it = 1; it <= cfg.max_iters; ++it) {
    rotate_all();
    const double psi = mean_and_psi();
    const double gain = res.objective_trace.back() - psi;
    res.objective_trace.push_back(psi);
    res.iters = it;
    if (gain < tol) {
      res.converged = true;
      break;
    }
  }

  // Common varimax rotation of the reference, then one exact sign-permutation
  // alignment of each draw to the rotated reference.
  const VarimaxResult vm = varimax_rotate(ref, cfg.varimax);
  res.reference = vm.rotated;
  res.reordered = LoadingsSample(p, q, T);
  parallel_for(T, cfg.threads, [&](int t) {
    const Matrix rotated = raw.draw(t) * res.rotations[t] * vm.rotation;
    const SpStep step = sp_step_exact(rotated, res.reference);
    res.rotations[t] = res.rotations[t] * vm.rotation * action_matrix(step.sp);
    res.reordered.draw(t) = raw.draw(t) * res.rotations[t];
  });
  res.reference = sample_mean(res.reordered);
  if (raw.has_factors()) {
    std::vector<Matrix> f(T);
    for (int t = 0; t < T; ++t) f[t] = raw.factors()[t] * res.rotations[t];
    res.reordered.set_factors(std::move(f));
  }
  if (raw.has_variances()) res.reordered.set_variances(raw.variances());
  return res;
}

}  // namespace vrsp
