#include "vrsp/tensor.hpp"

#include <cmath>
#include <sstream>

namespace vrsp {

void require_finite(const Matrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

void require_same_shape(const Matrix& a, const Matrix& b,
                        std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": shape mismatch (" << a.rows() << "x" << a.cols()
       << " vs " << b.rows() << "x" << b.cols() << ")";
    throw DimensionError(os.str());
  }
}

namespace {

void check_perm(std::span<const int> nu) {
  const int q = static_cast<int>(nu.size());
  std::vector<char> seen(q, 0);
  for (int v : nu) {
    if (v < 0 || v >= q || seen[v]) {
      throw std::invalid_argument("invalid permutation: repeated or out-of-range index");
    }
    seen[v] = 1;
  }
}

}  // namespace

SignedPermutation::SignedPermutation(std::vector<int> signs,
                                     std::vector<int> perm)
    : s_(std::move(signs)), nu_(std::move(perm)) {
  if (s_.size() != nu_.size()) {
    throw DimensionError("signed permutation: sign and permutation lengths differ");
  }
  for (int v : s_) {
    if (v != 1 && v != -1) {
      throw std::invalid_argument("signed permutation: signs must be +1 or -1");
    }
  }
  check_perm(nu_);
}

SignedPermutation SignedPermutation::identity(int q) {
  std::vector<int> s(q, 1), nu(q);
  for (int j = 0; j < q; ++j) nu[j] = j;
  return {std::move(s), std::move(nu)};
}

SignedPermutation SignedPermutation::from_one_based(
    std::vector<int> signs, const std::vector<int>& perm) {
  std::vector<int> nu(perm.size());
  for (size_t j = 0; j < perm.size(); ++j) nu[j] = perm[j] - 1;
  return {std::move(signs), std::move(nu)};
}

bool SignedPermutation::is_identity() const {
  for (int j = 0; j < size(); ++j) {
    if (s_[j] != 1 || nu_[j] != j) return false;
  }
  return true;
}

Matrix permutation_to_matrix(std::span<const int> nu) {
  check_perm(nu);
  const int q = static_cast<int>(nu.size());
  Matrix P = Matrix::Zero(q, q);
  for (int i = 0; i < q; ++i) P(i, nu[i]) = 1.0;
  return P;
}

Matrix signed_permutation_to_matrix(const SignedPermutation& sp) {
  const int q = sp.size();
  Matrix Q = Matrix::Zero(q, q);
  for (int i = 0; i < q; ++i) Q(i, sp.source(i)) = sp.sign(i);
  return Q;
}

Matrix action_matrix(const SignedPermutation& sp) {
  return signed_permutation_to_matrix(sp).transpose();
}

LoadingsMatrix apply_signed_permutation(const LoadingsMatrix& L,
                                        const SignedPermutation& sp) {
  if (L.cols() != sp.size()) {
    throw DimensionError("apply_signed_permutation: factor count mismatch");
  }
  LoadingsMatrix out(L.rows(), L.cols());
  for (int j = 0; j < sp.size(); ++j) {
    out.col(j) = sp.sign(j) * L.col(sp.source(j));
  }
  return out;
}

SignedPermutation invert(const SignedPermutation& sp) {
  const int q = sp.size();
  std::vector<int> s(q), nu(q);
  for (int k = 0; k < q; ++k) {
    const int i = sp.source(k);
    nu[i] = k;
    s[i] = sp.sign(k);
  }
  return {std::move(s), std::move(nu)};
}

SignedPermutation compose(const SignedPermutation& a,
                          const SignedPermutation& b) {
  if (a.size() != b.size()) {
    throw DimensionError("compose: size mismatch");
  }
  const int q = a.size();
  std::vector<int> s(q), nu(q);
  for (int i = 0; i < q; ++i) {
    const int m = a.source(i);
    s[i] = a.sign(i) * b.sign(m);
    nu[i] = b.source(m);
  }
  return {std::move(s), std::move(nu)};
}

double frobenius_sq_distance(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "frobenius_sq_distance");
  return (a - b).squaredNorm();
}

LoadingsSample::LoadingsSample(int p, int q, int draws)
    : p_(p), q_(q), draws_(draws) {
  if (p < 1 || q < 1 || draws < 0) {
    throw std::invalid_argument("LoadingsSample: need p >= 1 and q >= 1");
  }
  data_.assign(static_cast<size_t>(draws) * p * q, 0.0);
}

LoadingsSample LoadingsSample::from_draws(const std::vector<Matrix>& draws) {
  if (draws.empty()) {
    throw std::invalid_argument("LoadingsSample: at least one draw required");
  }
  LoadingsSample s(static_cast<int>(draws.front().rows()),
                   static_cast<int>(draws.front().cols()));
  s.data_.reserve(draws.size() * s.p_ * s.q_);
  for (const auto& d : draws) s.push_back(d);
  return s;
}

LoadingsSample::ConstDrawMap LoadingsSample::draw(int t) const {
  return ConstDrawMap(data_.data() + static_cast<size_t>(t) * p_ * q_, p_, q_);
}

LoadingsSample::DrawMap LoadingsSample::draw(int t) {
  return DrawMap(data_.data() + static_cast<size_t>(t) * p_ * q_, p_, q_);
}

void LoadingsSample::push_back(const Matrix& m) {
  if (m.rows() != p_ || m.cols() != q_) {
    throw DimensionError("LoadingsSample: draw shape differs from sample shape");
  }
  const size_t off = data_.size();
  data_.resize(off + static_cast<size_t>(p_) * q_);
  DrawMap(data_.data() + off, p_, q_) = m;
  ++draws_;
}

void LoadingsSample::set_factors(std::vector<Matrix> f) {
  if (!f.empty() && static_cast<int>(f.size()) != draws_) {
    throw DimensionError("LoadingsSample: factor draw count differs from T");
  }
  for (const auto& m : f) {
    if (m.cols() != q_ || m.rows() != f.front().rows()) {
      throw DimensionError("LoadingsSample: factor matrices must be n x q");
    }
  }
  factors_ = std::move(f);
}

void LoadingsSample::set_variances(std::vector<Vector> v) {
  if (!v.empty() && static_cast<int>(v.size()) != draws_) {
    throw DimensionError("LoadingsSample: variance draw count differs from T");
  }
  for (const auto& x : v) {
    if (x.size() != p_) throw DimensionError("LoadingsSample: variances must have p entries");
  }
  variances_ = std::move(v);
}

void LoadingsSample::validate() const {
  if (draws_ < 1) throw std::invalid_argument("LoadingsSample: T must be >= 1");
  for (double x : data_) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument("LoadingsSample: non-finite loading");
    }
  }
  for (const auto& v : variances_) {
    if (!v.allFinite() || (v.array() <= 0.0).any()) {
      throw std::invalid_argument("LoadingsSample: variances must be finite and > 0");
    }
  }
}

Matrix sample_mean(const LoadingsSample& s) {
  Matrix acc = Matrix::Zero(s.p(), s.q());
  for (int t = 0; t < s.draws(); ++t) acc += s.draw(t);
  return acc / static_cast<double>(s.draws());
}

}  // namespace vrsp
