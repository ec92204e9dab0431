#include "oracles.hpp"
#include "vrsp/tensor.hpp"

#include <doctest.h>

#include <set>

using namespace vrsp;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("permutation_to_matrix") {
  CHECK(permutation_to_matrix(std::vector<int>{2, 0, 1}) == mat({{0, 0, 1}, {1, 0, 0}, {0, 1, 0}}));
  CHECK(permutation_to_matrix(std::vector<int>{0, 1}) == Matrix::Identity(2, 2));
  const Matrix P = permutation_to_matrix(std::vector<int>{1, 0, 2});
  CHECK(P * P == Matrix::Identity(3, 3));
  CHECK_THROWS_AS(permutation_to_matrix(std::vector<int>{0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(permutation_to_matrix(std::vector<int>{0, 3, 1}), std::invalid_argument);
}

TEST_CASE("signed_permutation_to_matrix") {
  const auto sp = SignedPermutation::from_one_based({-1, -1, 1}, {3, 1, 2});
  CHECK(signed_permutation_to_matrix(sp) == mat({{0, 0, -1}, {-1, 0, 0}, {0, 1, 0}}));
  CHECK(signed_permutation_to_matrix(SignedPermutation::identity(2)) == Matrix::Identity(2, 2));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto r = oracle::random_sp(1 + k % 6, rng);
    const Matrix Q = signed_permutation_to_matrix(r);
    CHECK((Q.transpose() * Q - Matrix::Identity(r.size(), r.size())).norm() <= 1e-12);
    for (int i = 0; i < r.size(); ++i) {
      CHECK(Q.row(i).cwiseAbs().sum() == 1.0);
      CHECK(Q.col(i).cwiseAbs().sum() == 1.0);
    }
  }
  CHECK_THROWS_AS(SignedPermutation({1, 2}, {0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(SignedPermutation({1, 1}, {0, 1, 2}), DimensionError);
  CHECK_THROWS_AS(SignedPermutation({1, 1}, {1, 1}), std::invalid_argument);
}

TEST_CASE("apply_signed_permutation reproduces the worked example") {
  const Matrix L = mat({{0.02, 0.01}, {-0.84, 0.06}, {-0.05, 0.86}});
  const auto sp = SignedPermutation::from_one_based({1, -1}, {2, 1});
  const Matrix expect = mat({{0.01, -0.02}, {0.06, 0.84}, {0.86, 0.05}});
  CHECK((apply_signed_permutation(L, sp) - expect).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(apply_signed_permutation(L, SignedPermutation::identity(2)) == L);
  CHECK(apply_signed_permutation(apply_signed_permutation(L, sp), invert(sp)) == L);
  CHECK((L * action_matrix(sp) - expect).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK_THROWS_AS(apply_signed_permutation(L, SignedPermutation::identity(3)), DimensionError);
}

TEST_CASE("apply preserves norms and per-row absolute values") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 40; ++k) {
    const int q = 1 + k % 5;
    const Matrix L = oracle::random_matrix(7, q, rng);
    const auto sp = oracle::random_sp(q, rng);
    const Matrix A = apply_signed_permutation(L, sp);
    CHECK(A.norm() == doctest::Approx(L.norm()).epsilon(1e-14));
    for (int r = 0; r < 7; ++r) {
      std::multiset<double> a, b;
      for (int j = 0; j < q; ++j) {
        a.insert(std::abs(A(r, j)));
        b.insert(std::abs(L(r, j)));
      }
      CHECK(a == b);
    }
  }
}

TEST_CASE("invert and compose") {
  std::mt19937_64 rng(5);
  const auto sp = SignedPermutation::from_one_based({1, -1}, {2, 1});
  CHECK(signed_permutation_to_matrix(invert(sp)) == signed_permutation_to_matrix(sp).transpose());
  for (int k = 0; k < 60; ++k) {
    const int q = 1 + k % 5;
    const auto a = oracle::random_sp(q, rng), b = oracle::random_sp(q, rng), c = oracle::random_sp(q, rng);
    CHECK(compose(SignedPermutation::identity(q), a) == a);
    CHECK(compose(a, invert(a)).is_identity());
    CHECK(compose(invert(a), a).is_identity());
    CHECK(signed_permutation_to_matrix(compose(a, b)) ==
          signed_permutation_to_matrix(a) * signed_permutation_to_matrix(b));
    CHECK(compose(compose(a, b), c) == compose(a, compose(b, c)));
    const Matrix L = oracle::random_matrix(4, q, rng);
    CHECK(apply_signed_permutation(L, compose(a, b)) == apply_signed_permutation(apply_signed_permutation(L, b), a));
  }
  CHECK_THROWS_AS(compose(SignedPermutation::identity(2), SignedPermutation::identity(3)), DimensionError);
}

TEST_CASE("group has 2^q q! distinct elements and is closed") {
  for (int q = 1; q <= 4; ++q) {
    const auto all = oracle::all_signed_perms(q);
    std::set<std::vector<double>> distinct;
    for (const auto& sp : all) {
      const Matrix Q = signed_permutation_to_matrix(sp);
      distinct.insert(std::vector<double>(Q.data(), Q.data() + Q.size()));
    }
    int fact = 1;
    for (int k = 2; k <= q; ++k) fact *= k;
    CHECK(distinct.size() == static_cast<size_t>((1 << q) * fact));
    if (q <= 3) {
      for (const auto& a : all)
        for (const auto& b : all) {
          const Matrix Q = signed_permutation_to_matrix(compose(a, b));
          CHECK(distinct.count(std::vector<double>(Q.data(), Q.data() + Q.size())) == 1);
        }
    }
  }
}

TEST_CASE("frobenius_sq_distance") {
  std::mt19937_64 rng(9);
  const Matrix A = oracle::random_matrix(5, 3, rng), B = oracle::random_matrix(5, 3, rng);
  CHECK(frobenius_sq_distance(A, A) == 0.0);
  CHECK(frobenius_sq_distance(mat({{1, 0}}), mat({{0, 1}})) == 2.0);
  for (int k = 0; k < 20; ++k) {
    const auto sp = oracle::random_sp(3, rng);
    CHECK(frobenius_sq_distance(apply_signed_permutation(A, sp), apply_signed_permutation(B, sp)) ==
          doctest::Approx(frobenius_sq_distance(A, B)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(frobenius_sq_distance(A, Matrix::Zero(3, 5)), DimensionError);
}

TEST_CASE("LoadingsSample storage") {
  std::mt19937_64 rng(1);
  std::vector<Matrix> draws;
  for (int t = 0; t < 4; ++t) draws.push_back(oracle::random_matrix(3, 2, rng));
  auto s = LoadingsSample::from_draws(draws);
  CHECK(s.draws() == 4);
  CHECK(s.p() == 3);
  CHECK(s.q() == 2);
  for (int t = 0; t < 4; ++t) CHECK(s.matrix(t) == draws[t]);
  CHECK(s.data()[2 * 6 + 1] == draws[2](0, 1));
  CHECK((sample_mean(s) - (draws[0] + draws[1] + draws[2] + draws[3]) / 4.0).norm() <= 1e-15);
  CHECK_THROWS_AS(s.push_back(Matrix::Zero(2, 2)), DimensionError);
  CHECK_THROWS_AS(s.set_variances({Vector::Ones(3)}), DimensionError);
  s.set_variances(std::vector<Vector>(4, Vector::Ones(3)));
  CHECK_NOTHROW(s.validate());
  auto bad = s;
  bad.set_variances(std::vector<Vector>(4, Vector::Zero(3)));
  CHECK_THROWS(bad.validate());
  bad = s;
  bad.draw(1)(0, 0) = std::nan("");
  CHECK_THROWS(bad.validate());
  CHECK_THROWS(LoadingsSample(3, 2).validate());
  CHECK_THROWS(LoadingsSample(0, 2));
}
