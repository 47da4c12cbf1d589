#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "tfsim/expm.hpp"
#include "tfsim/fock.hpp"
#include "tfsim/tame.hpp"

#include <cmath>

using namespace tfsim;

TEST_CASE("expm of the zero matrix is the identity") {
  for (int d : {1, 4, 33}) {
    const Matrix e = expm(Matrix::Zero(d, d));
    CHECK((e - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("expm of a diagonal matrix exponentiates the diagonal") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 0.0;
  d(1, 1) = 1.0;
  d(2, 2) = Complex(-2.0, 3.0);
  const Matrix e = expm(d);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Complex expected = i == j ? std::exp(d(i, i)) : Complex(0, 0);
      CHECK(std::abs(e(i, j) - expected) < 1e-14);
    }
}

TEST_CASE("expm reproduces the 2D rotation; Taylor oracle agrees") {
  const Real theta = 0.7;
  Matrix a(2, 2);
  a << 0, -theta, theta, 0;
  const Matrix e = expm(a);
  CHECK(e(0, 0).real() == doctest::Approx(std::cos(theta)).epsilon(1e-15));
  CHECK(e(0, 1).real() == doctest::Approx(-std::sin(theta)).epsilon(1e-15));
  CHECK(e(1, 0).real() == doctest::Approx(std::sin(theta)).epsilon(1e-15));
  const Matrix t = oracles::taylor_expm(a);
  CHECK((e - t).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("non-finite input is rejected") {
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<Real>::infinity();
  CHECK_THROWS_AS(expm(bad), NumericGuardError);
}

TEST_CASE("cost estimate: squarings from the 1-norm") {
  CHECK(expm_cost_estimate(0.0) == 0);
  CHECK(expm_cost_estimate(1e-3) == 0);          // below the smallest Pade threshold
  CHECK(expm_cost_estimate(kPadeTheta13) == 0);
  CHECK(expm_cost_estimate(2.0 * kPadeTheta13) == 1);
  // one-norm of the xi = 1 generator at d1 = 90
  const Real norm = std::sqrt(89.0) + std::sqrt(88.0);
  CHECK(expm_cost_estimate(norm) == 2);
  // monotone non-decreasing
  int prev = 0;
  for (Real x = 0.5; x < 1e4; x *= 1.7) {
    const int s = expm_cost_estimate(x);
    CHECK(s >= prev);
    prev = s;
  }
}

TEST_CASE("exp(A) exp(-A) = I for random complex matrices") {
  // 1e-12 holds at moderate norms; at the norm-30 boundary non-normal
  // conditioning costs another decade or so
  for (unsigned seed : {1u, 2u, 3u, 4u}) {
    const int dim = 10 + int(seed) * 10;
    const Matrix base = oracles::random_complex_matrix(dim, seed);
    const Real norm = fock::one_norm(base);
    for (const Real target : {3.0, 30.0}) {
      const Matrix a = base * (target / norm);
      const Matrix e = expm(a);
      const Matrix einv = expm(Matrix(-a));
      const Real err = ((e * einv) - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
      CHECK(err < (target <= 5.0 ? 1e-12 : 5e-11));
    }
  }
}

TEST_CASE("exp((s+t)A) = exp(sA) exp(tA)") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<Real> st(-1.0, 1.0);
  const Matrix a = oracles::random_complex_matrix(12, 5, 0.5);
  for (int trial = 0; trial < 6; ++trial) {
    const Real s = st(rng), t = st(rng);
    const Matrix lhs = expm(Matrix((s + t) * a));
    const Matrix rhs = expm(Matrix(s * a)) * expm(Matrix(t * a));
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("Taylor-oracle agreement for small norms") {
  for (unsigned seed : {11u, 12u, 13u}) {
    Matrix a = oracles::random_complex_matrix(20, seed, 0.1);
    const Real norm = fock::one_norm(a);
    if (norm > 1.0) a /= norm;
    CHECK((expm(a) - oracles::taylor_expm(a)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("anti-Hermitian exponentials are unitary") {
  const auto q = tame::displacement_generator(Complex(1.8, -0.6), 48);
  const Matrix u = expm(q.entries);
  const RealVector norms = fock::column_norms(u);
  for (int j = 0; j < 48; ++j) CHECK(std::abs(norms[j] - 1.0) < 1e-13);
}

TEST_CASE("nested truncations converge monotonically on the shared block") {
  // consistency property behind the dimension search
  const int u = 50;
  for (const Complex xi : {Complex(3.7, 0.0), Complex(2.0, -1.5)}) {
    const Matrix ref = expm(tame::displacement_generator(xi, 140).entries)
                           .topLeftCorner(u, u);
    Real prev = std::numeric_limits<Real>::infinity();
    for (int q : {52, 58, 66, 76, 88, 102}) {
      const Matrix block = expm(tame::displacement_generator(xi, q).entries)
                               .topLeftCorner(u, u);
      const Real err = (block - ref).cwiseAbs().maxCoeff();
      CHECK(err <= prev + 1e-13);
      prev = err;
    }
  }
}
