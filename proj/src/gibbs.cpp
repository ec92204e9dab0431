// Conjugate Gibbs sampler for the strict factor model.
//
// With Sigma = diag(sigma2_1..sigma2_p) and independent priors
// lambda_rj ~ N(l0, 1/L0), sigma2_r ~ IG(a0/2, b0/2), F_i ~ N(0, I_q):
//
//   F_i | Lambda, Sigma, y_i ~ N(M^-1 Lambda' Sigma^-1 y_i, M^-1),
//       M = I_q + Lambda' Sigma^-1 Lambda
//   lambda_r | F, sigma2_r, y ~ N(V_r (L0 l0 1 + F' y_r / sigma2_r), V_r),
//       V_r = (L0 I_q + F'F / sigma2_r)^-1
//   sigma2_r | Lambda, F, y ~ IG((a0 + n) / 2, (b0 + |y_r - F lambda_r|^2) / 2)
//
// y_r is column r of the n x p data and lambda_r row r of Lambda. Under the
// lower-triangular option only the first min(r + 1, q) entries of lambda_r are
// sampled (F restricted to those columns); the rest stay at zero.
#include "vrsp/synth.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <random>

namespace vrsp {

void FaPriors::validate() const {
  if (!(L0 >= 0.0)) throw std::invalid_argument("priors: L0 must be >= 0");
  if (!(a0 > 0.0) || !(b0 > 0.0)) throw std::invalid_argument("priors: a0 and b0 must be > 0");
  if (!std::isfinite(l0)) throw std::invalid_argument("priors: l0 must be finite");
}

void GibbsConfig::validate() const {
  if (burnin < 0) throw std::invalid_argument("gibbs: burnin must be >= 0");
  if (iters <= burnin) throw std::invalid_argument("gibbs: iters must exceed burnin");
  if (thin < 1) throw std::invalid_argument("gibbs: thin must be >= 1");
  if (kept_draws() < 1) throw std::invalid_argument("gibbs: no draws would be kept");
}

Matrix standardize(const Matrix& Y) {
  if (Y.rows() < 2) throw std::invalid_argument("standardize: need at least two observations");
  Matrix Z = Y.rowwise() - Y.colwise().mean();
  for (Eigen::Index r = 0; r < Z.cols(); ++r) {
    const double sd = std::sqrt(Z.col(r).squaredNorm() / static_cast<double>(Z.rows() - 1));
    if (!(sd > 0.0)) throw std::invalid_argument("standardize: column " + std::to_string(r + 1) + " is constant");
    Z.col(r) /= sd;
  }
  return Z;
}

LoadingsSample gibbs_sample(const Matrix& Yin, int q, const FaPriors& priors,
                            const GibbsConfig& cfg) {
  priors.validate();
  cfg.validate();
  require_finite(Yin, "gibbs_sample: data");
  const int n = static_cast<int>(Yin.rows());
  const int p = static_cast<int>(Yin.cols());
  if (q < 1) throw std::invalid_argument("gibbs_sample: q must be >= 1");
  if (q >= p) throw std::invalid_argument("gibbs_sample: q must be smaller than p");
  if (priors.L0 == 0.0 && n <= q) {
    throw std::invalid_argument("gibbs_sample: flat loading prior needs n > q");
  }

  const Matrix Y = cfg.center_data ? standardize(Yin) : Yin;

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill_normal = [&](Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = normal(rng);
  };

  Matrix Lambda(p, q);
  fill_normal(Lambda);
  Lambda *= 0.1;
  if (cfg.lower_triangular) {
    for (int r = 0; r < p; ++r)
      for (int j = r + 1; j < q; ++j) Lambda(r, j) = 0.0;
  }
  Vector sigma2 = Vector::Ones(p);
  Matrix F(n, q), Z(n, q);

  LoadingsSample out(p, q);
  std::vector<Vector> variances;
  std::vector<Matrix> factors;
  const int kept = cfg.kept_draws();
  variances.reserve(kept);
  if (cfg.store_factors) factors.reserve(kept);

  const double shape = 0.5 * (priors.a0 + n);
  Matrix FtF(q, q), FtY(q, p);
  for (int it = 1; it <= cfg.iters; ++it) {
    // Factor scores.
    const Vector inv_s2 = sigma2.cwiseInverse();
    const Matrix LtSi = Lambda.transpose() * inv_s2.asDiagonal();  // q x p
    const Matrix M = Matrix::Identity(q, q) + LtSi * Lambda;
    const Eigen::LLT<Matrix> chol_m(M);
    if (chol_m.info() != Eigen::Success) throw std::runtime_error("gibbs_sample: factor precision not positive definite");
    F = chol_m.solve(LtSi * Y.transpose()).transpose();  // n x q posterior means
    fill_normal(Z);
    // Rows of Z L^-1 have covariance (L L')^-1 = M^-1.
    F += chol_m.matrixU().solve(Z.transpose()).transpose();

    // Loadings, row by row.
    FtF.noalias() = F.transpose() * F;
    FtY.noalias() = F.transpose() * Y;
    for (int r = 0; r < p; ++r) {
      const int k = cfg.lower_triangular ? std::min(r + 1, q) : q;
      Matrix prec = FtF.topLeftCorner(k, k) / sigma2(r);
      prec.diagonal().array() += priors.L0;
      Vector rhs = FtY.col(r).head(k) / sigma2(r);
      rhs.array() += priors.L0 * priors.l0;
      const Eigen::LLT<Matrix> chol_p(prec);
      if (chol_p.info() != Eigen::Success) throw std::runtime_error("gibbs_sample: loading precision not positive definite");
      Vector z(k);
      for (int j = 0; j < k; ++j) z(j) = normal(rng);
      const Vector row = chol_p.solve(rhs) + chol_p.matrixU().solve(z);
      Lambda.row(r).head(k) = row.transpose();
    }

    // Idiosyncratic variances.
    const Matrix resid = Y - F * Lambda.transpose();
    for (int r = 0; r < p; ++r) {
      const double rate = 0.5 * (priors.b0 + resid.col(r).squaredNorm());
      std::gamma_distribution<double> gamma(shape, 1.0 / rate);
      double s2 = 1.0 / gamma(rng);
      if (!(s2 > 1e-10) || !std::isfinite(s2)) s2 = 1e-10;  // Heywood floor
      sigma2(r) = s2;
    }

    if (it > cfg.burnin && (it - cfg.burnin) % cfg.thin == 0 && out.draws() < kept) {
      out.push_back(Lambda);
      variances.push_back(sigma2);
      if (cfg.store_factors) factors.push_back(F);
    }
  }
  out.set_variances(std::move(variances));
  if (cfg.store_factors) out.set_factors(std::move(factors));
  return out;
}

}  // namespace vrsp
