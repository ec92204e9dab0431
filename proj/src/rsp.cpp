#include "vrsp/rsp.hpp"

#include "vrsp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>

namespace vrsp {

const char* to_string(SpScheme s) {
  switch (s) {
    case SpScheme::Exact: return "exact";
    case SpScheme::FullSA: return "full-sa";
    case SpScheme::PartialSA: return "partial-sa";
  }
  return "?";
}

SpScheme parse_scheme(const std::string& name) {
  if (name == "exact") return SpScheme::Exact;
  if (name == "full-sa") return SpScheme::FullSA;
  if (name == "partial-sa") return SpScheme::PartialSA;
  throw std::invalid_argument("unknown scheme '" + name + "' (exact|full-sa|partial-sa)");
}

int RspConfig::effective_sa_loops() const {
  if (sa_loops > 0) return sa_loops;
  return scheme == SpScheme::FullSA ? 100 : 20;
}

void RspConfig::validate() const {
  if (max_outer_iters < 1) throw std::invalid_argument("rsp: max_outer_iters must be >= 1");
  if (sa_loops < 0) throw std::invalid_argument("rsp: sa_loops must be >= 0 (0 selects the default)");
  if (!(gamma > 0.0)) throw std::invalid_argument("rsp: gamma must be > 0");
  if (!(gamma0 > 0.0)) throw std::invalid_argument("rsp: gamma0 must be > 0");
  if (!(convergence_factor >= 0.0)) throw std::invalid_argument("rsp: convergence factor must be >= 0");
  if (restarts < 0) throw std::invalid_argument("rsp: restarts must be >= 0");
  varimax.validate();
}

namespace {

// Cost of every (reference column i, draw column j) pairing:
//   sum_r (sigma * Lt[r, j] - Lstar[r, i])^2 = a_j + b_i - 2 sigma G(i, j).
struct PairCosts {
  Matrix G;  // Lstar^T Lt
  Vector a;  // squared column norms of Lt
  Vector b;  // squared column norms of Lstar

  PairCosts(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar)
      : G(Lstar.transpose() * Lt),
        a(Lt.colwise().squaredNorm().transpose()),
        b(Lstar.colwise().squaredNorm().transpose()) {}

  double cost(const SignedPermutation& sp) const {
    double c = 0.0;
    for (int i = 0; i < sp.size(); ++i) {
      const int j = sp.source(i);
      c += a(j) + b(i) - 2.0 * sp.sign(i) * G(i, j);
    }
    return c;
  }

  void fill(std::span<const int> sigma, Matrix& C) const {
    const auto q = G.rows();
    for (Eigen::Index j = 0; j < q; ++j) {
      for (Eigen::Index i = 0; i < q; ++i) {
        C(i, j) = a(j) + b(i) - 2.0 * sigma[j] * G(i, j);
      }
    }
  }
};

void check_pair(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
                const char* what) {
  require_same_shape(Lt, Lstar, what);
}

SignedPermutation from_assignment(std::span<const int> sigma,
                                  const std::vector<int>& assign) {
  const int q = static_cast<int>(assign.size());
  std::vector<int> s(q), nu(q);
  for (int i = 0; i < q; ++i) {
    nu[i] = assign[i];
    s[i] = sigma[assign[i]];
  }
  return {std::move(s), std::move(nu)};
}

void default_warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

}  // namespace

double sp_cost(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
               const SignedPermutation& sp) {
  check_pair(Lt, Lstar, "sp_cost");
  if (sp.size() != Lt.cols()) throw DimensionError("sp_cost: transform size mismatch");
  double c = 0.0;
  for (Eigen::Index j = 0; j < Lt.cols(); ++j) {
    c += (sp.sign(static_cast<int>(j)) * Lt.col(sp.source(static_cast<int>(j))) - Lstar.col(j))
             .squaredNorm();
  }
  return c;
}

CostMatrix build_cost_matrix(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
                             std::span<const int> sigma) {
  check_pair(Lt, Lstar, "build_cost_matrix");
  const auto q = Lt.cols();
  if (static_cast<Eigen::Index>(sigma.size()) != q) {
    throw DimensionError("build_cost_matrix: sign vector length mismatch");
  }
  for (int v : sigma) {
    if (v != 1 && v != -1) throw std::invalid_argument("build_cost_matrix: signs must be +1 or -1");
  }
  CostMatrix C(q, q);
  for (Eigen::Index i = 0; i < q; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      C(i, j) = (sigma[j] * Lt.col(j) - Lstar.col(i)).squaredNorm();
    }
  }
  return C;
}

SpStep sp_step_exact(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
                     const SignedPermutation* incumbent,
                     const std::function<void(const std::string&)>& warn) {
  check_pair(Lt, Lstar, "sp_step_exact");
  const int q = static_cast<int>(Lt.cols());
  if (q > kExactMaxQ) {
    throw std::invalid_argument("exact scheme refused for q = " + std::to_string(q) +
                                " > " + std::to_string(kExactMaxQ) + "; use an SA scheme");
  }
  if (q > kExactWarnQ && warn) {
    warn("exact scheme with q = " + std::to_string(q) + " solves 2^q assignment problems per draw");
  }
  if (incumbent && incumbent->size() != q) throw DimensionError("sp_step_exact: incumbent size mismatch");

  const PairCosts pc(Lt, Lstar);
  thread_local AssignmentSolver solver;
  Matrix C(q, q);
  std::vector<int> sigma(q, 1), best_sigma(q, 1), best_assign;

  double best = std::numeric_limits<double>::infinity();
  if (incumbent) best = pc.cost(*incumbent);
  const double slack = 1e-12 * (1.0 + pc.a.sum() + pc.b.sum());

  const std::uint64_t combos = std::uint64_t{1} << q;
  for (std::uint64_t m = 0; m < combos; ++m) {
    for (int j = 0; j < q; ++j) sigma[j] = ((m >> j) & 1U) ? -1 : 1;
    pc.fill(sigma, C);
    const double row_bound = C.rowwise().minCoeff().sum();
    const double col_bound = C.colwise().minCoeff().sum();
    if (std::max(row_bound, col_bound) >= best - slack) continue;
    const AssignmentSolution& sol = solver.solve(C);
    if (sol.total_cost < best - slack) {
      best = sol.total_cost;
      best_sigma = sigma;
      best_assign = sol.assignment;
    }
  }

  SpStep out;
  if (best_assign.empty()) {
    out.sp = incumbent ? *incumbent : SignedPermutation::identity(q);
  } else {
    out.sp = from_assignment(best_sigma, best_assign);
  }
  out.cost = sp_cost(Lt, Lstar, out.sp);
  return out;
}

SpStep sp_step_sa(const LoadingsMatrix& Lt, const LoadingsMatrix& Lstar,
                  const SignedPermutation& init, const RspConfig& cfg,
                  std::mt19937_64& rng) {
  check_pair(Lt, Lstar, "sp_step_sa");
  const int q = static_cast<int>(Lt.cols());
  if (init.size() != q) throw DimensionError("sp_step_sa: initial transform size mismatch");
  if (cfg.scheme == SpScheme::Exact) throw std::invalid_argument("sp_step_sa: scheme must be full-sa or partial-sa");

  const PairCosts pc(Lt, Lstar);
  const int loops = cfg.effective_sa_loops();
  std::uniform_int_distribution<int> pick_sign(0, q - 1);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const double init_cost = pc.cost(init);
  SignedPermutation state = init;
  double current = init_cost;

  auto accept = [&](double proposed, int b) {
    const double delta = proposed - current;
    if (delta <= 0.0) return true;
    const double temp = cfg.gamma / std::log(b + cfg.gamma0);
    return unif(rng) < std::exp(-delta / temp);
  };

  if (cfg.scheme == SpScheme::FullSA) {
    std::vector<int> s(init.signs().begin(), init.signs().end());
    std::vector<int> nu(init.perm().begin(), init.perm().end());
    // Swap pair uniform over the q (q + 1) / 2 unordered pairs {k <= l};
    // k == l keeps nu.
    std::uniform_int_distribution<int> pick_pair(0, q * (q + 1) / 2 - 1);
    for (int b = 1; b <= loops; ++b) {
      std::vector<int> s_new = s, nu_new = nu;
      s_new[pick_sign(rng)] *= -1;
      int idx = pick_pair(rng), k = 0;
      while (idx >= q - k) {
        idx -= q - k;
        ++k;
      }
      std::swap(nu_new[k], nu_new[k + idx]);
      double proposed = 0.0;
      for (int i = 0; i < q; ++i) {
        proposed += pc.a(nu_new[i]) + pc.b(i) - 2.0 * s_new[i] * pc.G(i, nu_new[i]);
      }
      if (accept(proposed, b)) {
        s.swap(s_new);
        nu.swap(nu_new);
        current = proposed;
      }
    }
    state = SignedPermutation(std::move(s), std::move(nu));
  } else {
    // State: one sign per draw column (sigma); nu is the assignment optimum
    // for that sigma.
    thread_local AssignmentSolver solver;
    std::vector<int> sigma(q);
    for (int i = 0; i < q; ++i) sigma[init.source(i)] = init.sign(i);
    Matrix C(q, q);
    for (int b = 1; b <= loops; ++b) {
      std::vector<int> sigma_new = sigma;
      sigma_new[pick_sign(rng)] *= -1;
      pc.fill(sigma_new, C);
      const AssignmentSolution& sol = solver.solve(C);
      if (accept(sol.total_cost, b)) {
        sigma.swap(sigma_new);
        state = from_assignment(sigma, sol.assignment);
        current = sol.total_cost;
      }
    }
  }

  SpStep out;
  out.sp = std::move(state);
  out.cost = sp_cost(Lt, Lstar, out.sp);
  if (!cfg.faithful_sa) {
    const double init_exact = sp_cost(Lt, Lstar, init);
    if (out.cost > init_exact) {
      out.sp = init;
      out.cost = init_exact;
    }
  }
  return out;
}

LoadingsMatrix rlme_step(const LoadingsSample& rotated,
                         const std::vector<SignedPermutation>& sps) {
  if (static_cast<int>(sps.size()) != rotated.draws()) {
    throw DimensionError("rlme_step: need one transform per draw");
  }
  if (rotated.draws() < 1) throw std::invalid_argument("rlme_step: empty sample");
  Matrix acc = Matrix::Zero(rotated.p(), rotated.q());
  for (int t = 0; t < rotated.draws(); ++t) {
    const auto& sp = sps[t];
    if (sp.size() != rotated.q()) throw DimensionError("rlme_step: transform size mismatch");
    const auto d = rotated.draw(t);
    for (int j = 0; j < rotated.q(); ++j) acc.col(j) += sp.sign(j) * d.col(sp.source(j));
  }
  return acc / static_cast<double>(rotated.draws());
}

double rsp_objective(const LoadingsSample& rotated,
                     const std::vector<SignedPermutation>& sps,
                     const LoadingsMatrix& reference) {
  if (static_cast<int>(sps.size()) != rotated.draws()) {
    throw DimensionError("rsp_objective: need one transform per draw");
  }
  double psi = 0.0;
  for (int t = 0; t < rotated.draws(); ++t) psi += sp_cost(rotated.matrix(t), reference, sps[t]);
  return psi;
}

std::mt19937_64 sa_stream(std::uint64_t seed, int draw, int outer_iter, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffU),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(draw),
                    static_cast<std::uint32_t>(outer_iter),
                    static_cast<std::uint32_t>(restart)};
  return std::mt19937_64(seq);
}

namespace {

struct StageTwo {
  std::vector<SignedPermutation> sps;
  LoadingsMatrix reference;
  std::vector<double> trace;
  bool converged = false;
  int outer_iters = 0;
};

StageTwo run_stage_two(const LoadingsSample& rotated,
                       std::vector<SignedPermutation> sps, const RspConfig& cfg,
                       int restart) {
  const int T = rotated.draws();
  const double tol = cfg.convergence_factor * T * rotated.p() * rotated.q();
  const auto warn = cfg.on_warning ? cfg.on_warning : default_warn;

  StageTwo st;
  st.reference = rlme_step(rotated, sps);
  st.trace.push_back(rsp_objective(rotated, sps, st.reference));
  if (cfg.on_iteration) cfg.on_iteration(restart, 0, st.trace.back());

  if (cfg.scheme == SpScheme::Exact && rotated.q() > kExactWarnQ) {
    warn("exact scheme with q = " + std::to_string(rotated.q()) +
         " solves 2^q assignment problems per draw");
  }

  std::vector<SignedPermutation> next(T);
  std::vector<char> changed(T, 0);
  for (int it = 1; it <= cfg.max_outer_iters; ++it) {
    parallel_for(T, cfg.threads, [&](int t) {
      const Matrix Lt = rotated.matrix(t);
      SpStep step;
      if (cfg.scheme == SpScheme::Exact) {
        step = sp_step_exact(Lt, st.reference, &sps[t]);
      } else {
        auto rng = sa_stream(cfg.rng_seed, t, it, restart);
        step = sp_step_sa(Lt, st.reference, sps[t], cfg, rng);
      }
      changed[t] = step.sp != sps[t];
      next[t] = std::move(step.sp);
    });
    const bool any_changed = std::any_of(changed.begin(), changed.end(), [](char c) { return c != 0; });
    sps.swap(next);
    st.reference = rlme_step(rotated, sps);
    const double psi = rsp_objective(rotated, sps, st.reference);
    const double gain = st.trace.back() - psi;
    st.trace.push_back(psi);
    st.outer_iters = it;
    if (cfg.on_iteration) cfg.on_iteration(restart, it, psi);
    if (!any_changed || gain < tol) {
      st.converged = true;
      break;
    }
  }
  st.sps = std::move(sps);
  return st;
}

std::vector<SignedPermutation> random_transforms(int T, int q, std::uint64_t seed,
                                                 int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffU),
                    static_cast<std::uint32_t>(seed >> 32), 0x5eedU,
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::vector<SignedPermutation> out;
  out.reserve(T);
  std::vector<int> nu(q);
  for (int t = 0; t < T; ++t) {
    std::vector<int> s(q);
    for (int j = 0; j < q; ++j) s[j] = (rng() & 1U) ? -1 : 1;
    std::iota(nu.begin(), nu.end(), 0);
    std::shuffle(nu.begin(), nu.end(), rng);
    out.emplace_back(std::move(s), nu);
  }
  return out;
}

}  // namespace

RspResult rsp_run(const LoadingsSample& raw, const RspConfig& cfg) {
  raw.validate();
  cfg.validate();
  const int T = raw.draws();
  const int q = raw.q();
  if (cfg.scheme == SpScheme::Exact && q > kExactMaxQ) {
    throw std::invalid_argument("exact scheme refused for q = " + std::to_string(q) +
                                " > " + std::to_string(kExactMaxQ) + "; use an SA scheme");
  }

  LoadingsSample rotated;
  std::vector<RotationMatrix> rotations;
  if (cfg.rotate) {
    VarimaxSample vs = varimax_map(raw, cfg.varimax, cfg.threads);
    rotated = std::move(vs.rotated);
    rotations = std::move(vs.rotations);
  } else {
    rotated = raw;
    rotations.assign(T, RotationMatrix::Identity(q, q));
  }

  StageTwo best;
  int best_restart = 0;
  for (int r = 0; r <= cfg.restarts; ++r) {
    std::vector<SignedPermutation> init =
        r == 0 ? std::vector<SignedPermutation>(T, SignedPermutation::identity(q))
               : random_transforms(T, q, cfg.rng_seed, r);
    StageTwo st;
    try {
      st = run_stage_two(rotated, std::move(init), cfg, r);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("rsp: sign-permutation stage: ") + e.what());
    }
    if (r == 0 || st.trace.back() < best.trace.back()) {
      best = std::move(st);
      best_restart = r;
    }
  }

  RspResult res;
  res.reordered = LoadingsSample(raw.p(), q, T);
  res.transforms.resize(T);
  for (int t = 0; t < T; ++t) {
    res.reordered.draw(t) = apply_signed_permutation(rotated.matrix(t), best.sps[t]);
    res.transforms[t] = DrawTransform{std::move(rotations[t]), best.sps[t]};
  }
  if (raw.has_factors()) res.reordered.set_factors(transform_factors(raw.factors(), res.transforms));
  if (raw.has_variances()) res.reordered.set_variances(raw.variances());
  res.reference = std::move(best.reference);
  res.objective_trace = std::move(best.trace);
  res.converged = best.converged;
  res.outer_iters = best.outer_iters;
  res.best_restart = best_restart;
  return res;
}

std::vector<Matrix> transform_factors(const std::vector<Matrix>& factors,
                                      const std::vector<DrawTransform>& transforms) {
  if (factors.empty()) throw std::invalid_argument("transform_factors: no factor draws");
  if (factors.size() != transforms.size()) {
    throw DimensionError("transform_factors: need one transform per factor draw");
  }
  std::vector<Matrix> out(factors.size());
  for (size_t t = 0; t < factors.size(); ++t) {
    const auto& tr = transforms[t];
    if (factors[t].cols() != tr.rotation.rows() || tr.sp.size() != tr.rotation.cols()) {
      throw DimensionError("transform_factors: factor count mismatch at draw " + std::to_string(t + 1));
    }
    out[t] = apply_signed_permutation(factors[t] * tr.rotation, tr.sp);
  }
  return out;
}

}  // namespace vrsp
