#include "oracles.hpp"
#include "vrsp/varimax.hpp"

#include <doctest.h>

using namespace vrsp;

TEST_CASE("varimax_objective hand values") {
  CHECK(varimax_objective(Matrix::Zero(4, 3)) == 0.0);
  CHECK(varimax_objective(Matrix::Ones(6, 1)) == doctest::Approx(0.0));
  CHECK(varimax_objective(Matrix::Identity(2, 2)) == doctest::Approx(0.25));
  Matrix bad = Matrix::Ones(3, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(varimax_objective(bad), std::invalid_argument);
}

TEST_CASE("varimax of the worked two-factor draw") {
  Matrix L(3, 2);
  L << 0.02, 0.00, -0.63, 0.55, 0.47, 0.71;
  Matrix expect(3, 2);
  expect << 0.02, 0.01, -0.84, 0.06, -0.05, 0.86;
  const auto res = varimax_rotate(L);
  CHECK(oracle::max_abs_diff_up_to_sp(expect, res.rotated) <= 0.02);
  CHECK((res.rotation.transpose() * res.rotation - Matrix::Identity(2, 2)).norm() <= 1e-10);
  CHECK((L * res.rotation - res.rotated).norm() <= 1e-8);
}

TEST_CASE("q = 1 and p < 2 are returned unchanged") {
  Matrix L(4, 1);
  L << 0.3, -0.2, 0.9, 0.1;
  const auto res = varimax_rotate(L);
  CHECK(res.rotated == L);
  CHECK(res.rotation == Matrix::Identity(1, 1));
}

TEST_CASE("two-factor optimum beats a 3600-point angle grid") {
  std::mt19937_64 rng(2024);
  VarimaxConfig cfg;
  cfg.eps = 1e-12;
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix L = oracle::random_matrix(8, 2, rng);
    const auto res = varimax_rotate(L, cfg);
    double grid = -1.0;
    for (int k = 0; k < 3600; ++k) {
      const double th = 2.0 * M_PI * k / 3600.0;
      grid = std::max(grid, varimax_objective(L * oracle::rot2(th)));
      grid = std::max(grid, varimax_objective(L * oracle::refl2(th)));
    }
    CHECK(varimax_objective(res.rotated) >= grid - 1e-6);
  }
}

TEST_CASE("varimax properties on random inputs") {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 60; ++rep) {
    const int q = 2 + rep % 5, p = q + 2 + rep % 7;
    const Matrix L = oracle::random_matrix(p, q, rng);
    VarimaxConfig cfg;
    cfg.normalize = rep % 2 == 1;
    const auto res = varimax_rotate(L, cfg);
    if (!cfg.normalize) CHECK(varimax_objective(res.rotated) >= varimax_objective(L) - 1e-12);
    CHECK((res.rotation.transpose() * res.rotation - Matrix::Identity(q, q)).norm() <= 1e-10);
    CHECK((res.rotated * res.rotation.transpose() - L).norm() <= 1e-8);
    const auto sp = oracle::random_sp(q, rng);
    CHECK(varimax_objective(apply_signed_permutation(res.rotated, sp)) ==
          doctest::Approx(varimax_objective(res.rotated)).epsilon(1e-12));
  }
}

TEST_CASE("zero columns are tolerated") {
  Matrix L = Matrix::Zero(5, 3);
  L.col(0) << 0.9, 0.8, 0.1, 0.0, 0.2;
  L.col(2) << 0.1, 0.0, 0.7, 0.8, 0.6;
  const auto res = varimax_rotate(L);
  CHECK(res.rotated.allFinite());
  CHECK((L * res.rotation - res.rotated).norm() <= 1e-8);
}

TEST_CASE("config validation") {
  VarimaxConfig cfg;
  cfg.eps = 0.0;
  CHECK_THROWS(varimax_rotate(Matrix::Identity(3, 2), cfg));
  cfg = {};
  cfg.max_sweeps = 0;
  CHECK_THROWS(varimax_rotate(Matrix::Identity(3, 2), cfg));
}

TEST_CASE("varimax_map") {
  std::mt19937_64 rng(4);
  const Matrix L = oracle::random_matrix(6, 3, rng);
  const auto one = varimax_map(LoadingsSample::from_draws({L}));
  CHECK(one.rotated.matrix(0) == varimax_rotate(L).rotated);

  std::vector<Matrix> draws;
  for (int t = 0; t < 12; ++t) draws.push_back(oracle::random_matrix(6, 3, rng));
  const auto s = LoadingsSample::from_draws(draws);
  const auto a = varimax_map(s, {}, 1);
  const auto b = varimax_map(s, {}, 4);
  for (int t = 0; t < s.draws(); ++t) {
    CHECK(a.rotated.matrix(t).norm() == doctest::Approx(draws[t].norm()).epsilon(1e-12));
    CHECK(a.rotated.matrix(t) == b.rotated.matrix(t));
  }
  const auto same = varimax_map(LoadingsSample::from_draws({L, L, L}));
  CHECK(same.rotated.matrix(0) == same.rotated.matrix(2));

  auto bad = s;
  bad.draw(5)(1, 1) = std::nan("");
  CHECK_THROWS(varimax_map(bad));
}
