// Core containers and the signed-permutation action on loading matrices.
#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vrsp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// p x q factor loadings. Rows are variables, columns are factors.
using LoadingsMatrix = Matrix;
/// q x q orthogonal matrix acting on loadings from the right.
using RotationMatrix = Matrix;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void require_finite(const Matrix& m, std::string_view what);
void require_same_shape(const Matrix& a, const Matrix& b, std::string_view what);

/// Column sign flips combined with a column reordering.
///
/// Stored as (s, nu) with 0-based nu. Applying it to a loading matrix L
/// produces a matrix whose column j is s_j * L[:, nu_j]; this is the
/// indexing used by the per-draw alignment cost
///   sum_r sum_j (s_j * L[r, nu_j] - ref[r, j])^2.
class SignedPermutation {
 public:
  SignedPermutation() = default;
  SignedPermutation(std::vector<int> signs, std::vector<int> perm);

  static SignedPermutation identity(int q);
  /// Same as the constructor but with nu given as 1..q.
  static SignedPermutation from_one_based(std::vector<int> signs,
                                          const std::vector<int>& perm);

  int size() const { return static_cast<int>(s_.size()); }
  int sign(int j) const { return s_[j]; }
  int source(int j) const { return nu_[j]; }
  std::span<const int> signs() const { return s_; }
  std::span<const int> perm() const { return nu_; }
  bool is_identity() const;

  friend bool operator==(const SignedPermutation&,
                         const SignedPermutation&) = default;

 private:
  std::vector<int> s_;
  std::vector<int> nu_;
};

/// P with P(i, j) = 1 iff nu_i = j. Throws on an invalid permutation.
Matrix permutation_to_matrix(std::span<const int> nu);

/// diag(s) * P(nu).
Matrix signed_permutation_to_matrix(const SignedPermutation& sp);

/// The matrix Q with apply_signed_permutation(L, sp) == L * Q. This is the
/// transpose (and inverse) of signed_permutation_to_matrix(sp).
Matrix action_matrix(const SignedPermutation& sp);

LoadingsMatrix apply_signed_permutation(const LoadingsMatrix& L,
                                        const SignedPermutation& sp);

SignedPermutation invert(const SignedPermutation& sp);

/// matrix(compose(a, b)) == matrix(a) * matrix(b). Acting on loadings,
/// compose(a, b) applies b first and then a.
SignedPermutation compose(const SignedPermutation& a,
                          const SignedPermutation& b);

double frobenius_sq_distance(const Matrix& a, const Matrix& b);

/// T draws of p x q loadings stored contiguously, draw-major and row-major
/// inside each draw. Optionally carries per-draw factor scores (n x q) and
/// idiosyncratic variances (p).
class LoadingsSample {
 public:
  using DrawMap = Eigen::Map<RowMajorMatrix>;
  using ConstDrawMap = Eigen::Map<const RowMajorMatrix>;

  LoadingsSample() = default;
  LoadingsSample(int p, int q, int draws = 0);
  static LoadingsSample from_draws(const std::vector<Matrix>& draws);

  int draws() const { return draws_; }
  int p() const { return p_; }
  int q() const { return q_; }
  bool empty() const { return draws_ == 0; }

  ConstDrawMap draw(int t) const;
  DrawMap draw(int t);
  Matrix matrix(int t) const { return draw(t); }
  void push_back(const Matrix& m);

  std::span<const double> data() const { return data_; }

  bool has_factors() const { return !factors_.empty(); }
  bool has_variances() const { return !variances_.empty(); }
  const std::vector<Matrix>& factors() const { return factors_; }
  const std::vector<Vector>& variances() const { return variances_; }
  void set_factors(std::vector<Matrix> f);
  void set_variances(std::vector<Vector> v);

  /// Checks shape consistency, finiteness and positivity of variances.
  void validate() const;

 private:
  int p_ = 0;
  int q_ = 0;
  int draws_ = 0;
  std::vector<double> data_;
  std::vector<Matrix> factors_;
  std::vector<Vector> variances_;
};

/// Elementwise mean of all draws.
Matrix sample_mean(const LoadingsSample& s);

}  // namespace vrsp
