#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dimple/linalg.hpp"
#include "test_util.hpp"

using namespace dimple;
using testutil::projector_dist;
using testutil::random_matrix;
using testutil::random_orthonormal;

TEST_CASE("svd_left on identity and ordered diagonal") {
  const Matrix u = svd_left(Matrix::Identity(3, 3), 2);
  CHECK(is_orthonormal(u));
  const Matrix p = u * u.transpose();
  CHECK(p.trace() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((p * p - p).norm() <= 1e-12);

  Vector d(3);
  d << 3, 2, 1;
  const Matrix u2 = svd_left(Matrix(d.asDiagonal()), 2);
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = expect(1, 1) = 1.0;
  CHECK((u2 * u2.transpose() - expect).norm() <= 1e-12);

  CHECK_THROWS_AS(svd_left(Matrix::Identity(3, 3), 4), std::invalid_argument);
  CHECK_THROWS_AS(svd_left(Matrix::Identity(3, 3), 0), std::invalid_argument);
}

TEST_CASE("svd_left recovers a planted column space") {
  Rng rng(101);
  const Matrix g1 = random_matrix(20, 5, rng);
  const Matrix g2 = random_matrix(5, 8, rng);
  const Matrix m = g1 * g2;
  const Matrix u = svd_left(m, 5);
  Eigen::HouseholderQR<Matrix> qr(g1);
  const Matrix col = qr.householderQ() * Matrix::Identity(20, 5);
  CHECK(projector_dist(u, col) <= 1e-8);
  CHECK(is_orthonormal(u, 1e-10));
}

TEST_CASE("svd_left is right-rotation invariant at the projector level") {
  Rng rng(103);
  // distinct singular values so the subspace gap is comfortable
  Vector d(6);
  d << 9, 7, 5, 3, 2, 1;
  const Matrix a = random_orthonormal(12, 6, rng);
  const Matrix b = random_orthonormal(9, 6, rng);
  const Matrix m = a * d.asDiagonal() * b.transpose();
  const Matrix q = random_orthonormal(9, 9, rng);
  for (int r : {1, 2, 4}) {
    CHECK(projector_dist(svd_left(m, r), svd_left(m * q, r)) <= 1e-8);
  }
}

TEST_CASE("svd_left full path agrees with a hand gram decomposition") {
  Rng rng(107);
  const Matrix m = random_matrix(30, 700, rng);
  const Matrix u_full = svd_left(m, 4);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m * m.transpose());
  Matrix u_gram(30, 4);
  for (int k = 0; k < 4; ++k) u_gram.col(k) = es.eigenvectors().col(29 - k);
  CHECK(projector_dist(u_full, u_gram) <= 1e-8);
}

TEST_CASE("two_to_inf_norm cases") {
  CHECK(two_to_inf_norm(Matrix::Identity(3, 3)) == doctest::Approx(1.0));
  CHECK(two_to_inf_norm(Matrix::Zero(2, 4)) == 0.0);
  Matrix m(2, 2);
  m << 3, 4, 0, 1;
  CHECK(two_to_inf_norm(m) == doctest::Approx(5.0));
}

TEST_CASE("regularize leaves compliant factors unchanged up to rotation") {
  Rng rng(109);
  const Matrix u = random_orthonormal(40, 3, rng);  // row norms ~ sqrt(3/40)
  const Matrix r = regularize(u, 1.0);
  CHECK(projector_dist(u, r) <= 1e-12);
  CHECK(is_orthonormal(r, 1e-10));
  CHECK_THROWS_AS(regularize(u, 0.0), std::invalid_argument);
}

TEST_CASE("regularize of a square orthogonal factor") {
  // Clipping a square orthogonal matrix rescales every row; the re-SVD
  // returns an orthogonal matrix spanning the same full space. Its rows have
  // unit norm, so the sqrt(2)*delta row bound only applies for
  // delta >= 1/sqrt(2): square factors sit outside the mild-clipping regime.
  const Matrix r = regularize(Matrix::Identity(2, 2), 0.5);
  CHECK(is_orthonormal(r, 1e-12));
  CHECK(projector_dist(r, Matrix::Identity(2, 2)) <= 1e-12);
  CHECK(two_to_inf_norm(r) == doctest::Approx(1.0));
}

TEST_CASE("regularize tames a spiky row") {
  Rng rng(113);
  Matrix u = random_orthonormal(100, 3, rng);
  u.row(0) *= 0.9 / u.row(0).norm();
  u = svd_left(u, 3);  // orthonormal again, still with a dominant first row
  REQUIRE(two_to_inf_norm(u) > 0.3);
  const Matrix r = regularize(u, 0.3);
  CHECK(projector_dist(u, r) > 1e-6);  // clipping moved the subspace
  CHECK(two_to_inf_norm(r) <= std::sqrt(2.0) * 0.3 + 1e-12);
}

TEST_CASE("regularize row bound holds whenever the clipped mass is small") {
  Rng rng(127);
  int clipped_draws = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 20 + int(rng.uniform01() * 120);
    const int r = 1 + int(rng.uniform01() * std::min(8, n / 4));
    const Matrix u = random_orthonormal(n, r, rng);
    Vector norms = u.rowwise().norm();
    std::sort(norms.data(), norms.data() + n);
    // start below the top row norms so clipping is active, then raise delta
    // until the clipped mass sum (||u_i||^2 - delta^2)+ is below 1/2, which
    // guarantees sigma_r of the clipped matrix stays >= 1/sqrt(2)
    double delta = norms(int(0.6 * (n - 1)));
    auto clipped_mass = [&](double d) {
      double mass = 0.0;
      for (int i = 0; i < n; ++i)
        mass += std::max(0.0, u.row(i).squaredNorm() - d * d);
      return mass;
    };
    while (clipped_mass(delta) > 0.4) delta *= 1.05;
    if (norms(n - 1) > delta) ++clipped_draws;
    const Matrix reg = regularize(u, delta);
    CHECK(two_to_inf_norm(reg) <= std::sqrt(2.0) * delta + 1e-12);
  }
  CHECK(clipped_draws >= 50);  // the check must not be vacuous
}

TEST_CASE("regularize flags rank-deficient input") {
  Matrix bad(4, 2);  // rank 1, violates the orthonormal-columns precondition
  bad << 1, 2, 2, 4, 3, 6, 4, 8;
  CHECK_THROWS_AS(regularize(bad, 0.5), std::runtime_error);
}

TEST_CASE("align solves the orthogonal Procrustes problem") {
  Rng rng(131);
  const Matrix u = random_orthonormal(10, 3, rng);
  CHECK((align(u, u) - Matrix::Identity(3, 3)).norm() <= 1e-12);

  const Matrix q = random_orthonormal(3, 3, rng);
  CHECK((align(u, u * q) - q).norm() <= 1e-10);

  const Matrix uhat = random_orthonormal(10, 3, rng);
  const Matrix best = align(u, uhat);
  const double best_err = (uhat - u * best).norm();
  for (int t = 0; t < 100; ++t) {
    const Matrix probe = random_orthonormal(3, 3, rng);
    CHECK(best_err <= (uhat - u * probe).norm() + 1e-12);
  }
  CHECK_THROWS_AS(align(u, random_orthonormal(9, 3, rng)), std::invalid_argument);
}

TEST_CASE("sin_theta distances") {
  Rng rng(137);
  const Matrix u = random_orthonormal(8, 3, rng);
  // spectral ~ sqrt(1 - sigma_min^2) bottoms out near sqrt(machine eps)
  const SinTheta zero = sin_theta(u, u);
  CHECK(zero.spectral <= 1e-7);
  CHECK(zero.frobenius <= 1e-7);

  Matrix e1(2, 1), e2(2, 1);
  e1 << 1, 0;
  e2 << 0, 1;
  const SinTheta orth = sin_theta(e1, e2);
  CHECK(orth.spectral == doctest::Approx(1.0));
  CHECK(orth.frobenius == doctest::Approx(1.0));

  Matrix rot(2, 1);
  rot << std::cos(M_PI / 6), std::sin(M_PI / 6);
  const SinTheta halfway = sin_theta(e1, rot);
  CHECK(halfway.spectral == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(halfway.frobenius == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(sin_theta(e1, random_orthonormal(3, 1, rng)), std::invalid_argument);
  Matrix bad(2, 1);
  bad << 2, 0;
  CHECK_THROWS_AS(sin_theta(e1, bad), std::invalid_argument);
}

TEST_CASE("sin_theta symmetry, rotation invariance and the projector sandwich") {
  Rng rng(139);
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 6 + int(rng.uniform01() * 10);
    const int r = 1 + int(rng.uniform01() * 3);
    const Matrix u = random_orthonormal(n, r, rng);
    const Matrix v = random_orthonormal(n, r, rng);
    const SinTheta ab = sin_theta(u, v);
    const SinTheta ba = sin_theta(v, u);
    CHECK(ab.spectral == doctest::Approx(ba.spectral).epsilon(1e-10));
    CHECK(ab.frobenius == doctest::Approx(ba.frobenius).epsilon(1e-10));

    const Matrix q = random_orthonormal(r, r, rng);
    const SinTheta rot = sin_theta(u * q, v);
    CHECK(rot.spectral == doctest::Approx(ab.spectral).epsilon(1e-10));

    const double pd = (u * u.transpose() - v * v.transpose()).operatorNorm();
    CHECK(ab.spectral <= pd + 1e-10);
    CHECK(pd <= std::sqrt(2.0) * ab.spectral + 1e-10);
  }
}

TEST_CASE("two_to_inf_dist vanishes on rotations and obeys the sandwich") {
  Rng rng(149);
  const Matrix u = random_orthonormal(12, 3, rng);
  CHECK(two_to_inf_dist(u, u) <= 1e-10);
  const Matrix q = random_orthonormal(3, 3, rng);
  CHECK(two_to_inf_dist(u, u * q) <= 1e-10);

  Matrix e1(2, 1), rot(2, 1);
  e1 << 1, 0;
  rot << std::cos(M_PI / 6), std::sin(M_PI / 6);
  const double d = two_to_inf_dist(e1, rot);
  CHECK(d <= std::sqrt(2.0) * 0.5 + 1e-12);
  // r = 1: the orthogonal group is {+1, -1}
  const double exact = std::min(two_to_inf_norm(rot - e1), two_to_inf_norm(-rot - e1));
  CHECK(d == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("two_to_inf_dist against an O(2) grid") {
  Rng rng(151);
  const Matrix u = random_orthonormal(6, 2, rng);
  const Matrix v = random_orthonormal(6, 2, rng);
  const double d = two_to_inf_dist(u, v);
  double grid_best = 1e300;
  for (int t = 0; t < 10000; ++t) {
    const double phi = 2.0 * M_PI * t / 10000.0;
    Matrix w(2, 2);
    w << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
    grid_best = std::min(grid_best, two_to_inf_norm(v * w - u));
    w.col(1) *= -1.0;  // reflection branch of O(2)
    grid_best = std::min(grid_best, two_to_inf_norm(v * w - u));
  }
  // the Frobenius-Procrustes rotation need not be the exact 2,inf minimizer,
  // but it can never beat the grid optimum and must obey the sandwich
  CHECK(d + 1e-9 >= grid_best);
  CHECK(d <= std::sqrt(2.0) * sin_theta(u, v).spectral + 1e-10);
}

TEST_CASE("svd_left outputs always satisfy the orthonormal invariant") {
  Rng rng(157);
  for (int rep = 0; rep < 30; ++rep) {
    const int rows = 3 + int(rng.uniform01() * 20);
    const int cols = 3 + int(rng.uniform01() * 20);
    const int r = 1 + int(rng.uniform01() * (std::min(rows, cols) - 1));
    const Matrix u = svd_left(random_matrix(rows, cols, rng), r);
    CHECK(is_orthonormal(u, 1e-10));
  }
}

TEST_CASE("center_matrix matches the explicit projector") {
  Rng rng(163);
  const Matrix s = random_matrix(7, 7, rng);
  const Matrix pc = Matrix::Identity(7, 7) - Matrix::Ones(7, 7) / 7.0;
  CHECK((center_matrix(s) - pc * s * pc).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK_THROWS_AS(center_matrix(random_matrix(3, 4, rng)), std::invalid_argument);
}
