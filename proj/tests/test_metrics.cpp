#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "tfsim/circuit.hpp"
#include "tfsim/metrics.hpp"

#include <cmath>

using namespace tfsim;
using namespace tfsim::metrics;

namespace {

DensityOperator pure(const Vector& psi) {
  Vector v = psi / psi.norm();
  return {int(v.size()), v * v.adjoint()};
}

DensityOperator fock_state(int n, int dim) {
  Vector v = Vector::Zero(dim);
  v[n] = 1.0;
  return pure(v);
}

/// Squeezed vacuum (squeezing r along X), truncated at dim.
DensityOperator squeezed_vacuum(Real r, int dim) {
  Vector v = Vector::Zero(dim);
  const Real th = std::tanh(r);
  for (int n = 0; 2 * n < dim; ++n) {
    const Real log_mag = 0.5 * (std::lgamma(2.0 * n + 1.0)) - Real(n) * std::log(2.0) -
                         std::lgamma(Real(n) + 1.0) + Real(n) * std::log(std::max(th, 1e-300));
    v[2 * n] = ((n % 2 == 0) ? 1.0 : -1.0) * std::exp(log_mag);
  }
  return pure(v);  // pure() normalizes

}

}  // namespace

TEST_CASE("vacuum quadrature moments") {
  const auto q = quadrature_moments(fock_state(0, 8));
  CHECK(q.mean_P == doctest::Approx(0.0));
  CHECK(q.mean_X2 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.mean_P2 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(q.mean_X4 == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(q.mean_sym_PX2 == doctest::Approx(0.0));
}

TEST_CASE("single-photon quadrature moments") {
  const auto q = quadrature_moments(fock_state(1, 8));
  CHECK(q.mean_X2 == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(q.mean_P2 == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(q.mean_P == doctest::Approx(0.0));
  CHECK(q.mean_X4 == doctest::Approx(3.75).epsilon(1e-14));  // <1|X^4|1> = 15/4
}

TEST_CASE("moments agree with the dense-operator oracle") {
  for (unsigned seed = 1; seed <= 12; ++seed) {
    const int dim = 6 + int(seed * 7) % 35;
    const auto rho = oracles::random_density(dim, seed);
    const auto fast = quadrature_moments(rho);
    const auto ref = oracles::dense_moment_oracle(rho);
    CHECK(fast.mean_P == doctest::Approx(ref.mean_P).epsilon(1e-10));
    CHECK(fast.mean_X2 == doctest::Approx(ref.mean_X2).epsilon(1e-10));
    CHECK(fast.mean_P2 == doctest::Approx(ref.mean_P2).epsilon(1e-10));
    CHECK(fast.mean_X4 == doctest::Approx(ref.mean_X4).epsilon(1e-10));
    CHECK(fast.mean_sym_PX2 == doctest::Approx(ref.mean_sym_PX2).epsilon(1e-10));
  }
}

TEST_CASE("moment invariants hold on random states") {
  for (unsigned seed = 40; seed < 52; ++seed) {
    const auto rho = oracles::random_density(16, seed);
    const auto q = quadrature_moments(rho);
    CHECK(q.mean_X2 >= 0.0);
    CHECK(q.mean_P2 >= q.mean_P * q.mean_P - 1e-12);
    CHECK(q.mean_X4 >= q.mean_X2 * q.mean_X2 - 1e-12);
  }
}

TEST_CASE("nonlinear variance of the vacuum calibrates the Gaussian floor") {
  const auto nv = nonlinear_variance(fock_state(0, 8));
  CHECK(nv.m_value == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(nv.mu_opt == doctest::Approx(1.0).epsilon(1e-10));
  // raw minimum before normalization: 0.75
  CHECK(nv.m_value * kLambdaGaussian == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("Gaussian states stay at or above the floor") {
  CHECK(nonlinear_variance(fock_state(0, 10)).m_value >= 1.0 - 1e-10);
  for (Real r : {0.2, 0.5}) {
    const auto rho = squeezed_vacuum(r, 64);
    CHECK(nonlinear_variance(rho).m_value >= 1.0 - 1e-6);
    CHECK(nonlinear_variance(rho).m_value == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("analytic minimization matches the grid-scan oracle") {
  int checked = 0;
  for (unsigned seed = 100; checked < 50; ++seed) {
    const int dim = 4 + int(seed % 27);
    const auto rho = oracles::random_density(dim, seed);
    const auto q = quadrature_moments(rotate_quarter(ladder_moments(rho)));
    const auto c = variance_coefficients(q);
    if (!(c.A > 0)) continue;
    const auto [vmin, mu] = minimize_variance(c);
    const Real ref = oracles::grid_scan_vmin(c.A, c.B, c.C);
    CHECK(vmin == doctest::Approx(ref).epsilon(1e-8));
    CHECK(vmin > 0.0);  // variance of a Hermitian observable
    ++checked;
  }
}

TEST_CASE("degenerate coefficients are refused") {
  CHECK_THROWS_AS(minimize_variance({0.0, 1.0, 0.0}), NumericGuardError);
}

TEST_CASE("M is invariant under phase-space reflection") {
  for (unsigned seed = 200; seed < 208; ++seed) {
    const auto rho = oracles::random_density(14, seed);
    const auto m0 = nonlinear_variance(rho).m_value;

    // parity conjugation rho -> P rho P flips the sign of every odd monomial
    Matrix flipped = rho.entries;
    for (int i = 0; i < rho.dim; ++i)
      for (int j = 0; j < rho.dim; ++j)
        if ((i + j) % 2 == 1) flipped(i, j) = -flipped(i, j);
    CHECK(nonlinear_variance({rho.dim, flipped}).m_value == doctest::Approx(m0).epsilon(1e-10));

    // complex conjugation (time reversal) flips the correlation too
    Matrix conj = rho.entries.conjugate();
    CHECK(nonlinear_variance({rho.dim, conj}).m_value == doctest::Approx(m0).epsilon(1e-10));
  }
}

TEST_CASE("qubit fidelity") {
  const Real theta = 0.6;
  Vector target = Vector::Zero(5);
  target[0] = std::cos(theta);
  target[1] = std::sin(theta);
  CHECK(fidelity_qubit(pure(target), theta) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(fidelity_qubit(fock_state(0, 4), M_PI / 2) == doctest::Approx(0.0));

  // maximally mixed qubit embedded at dim 70
  Matrix mixed = Matrix::Zero(70, 70);
  mixed(0, 0) = 0.5;
  mixed(1, 1) = 0.5;
  for (Real th : {0.0, 0.4, M_PI / 3}) {
    CHECK(fidelity_qubit({70, mixed}, th) == doctest::Approx(0.5).epsilon(1e-14));
  }
}

TEST_CASE("qubit fidelity is linear in the state") {
  const auto r1 = oracles::random_density(6, 301);
  const auto r2 = oracles::random_density(6, 302);
  const Real theta = 0.9;
  for (Real alpha : {0.0, 0.3, 0.7, 1.0}) {
    DensityOperator mix{6, alpha * r1.entries + (1 - alpha) * r2.entries};
    const Real expected =
        alpha * fidelity_qubit(r1, theta) + (1 - alpha) * fidelity_qubit(r2, theta);
    CHECK(fidelity_qubit(mix, theta) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("optimal cubic states improve with dimension") {
  CubicStateOptions opts;
  opts.starts = 12;
  const auto v1 = optimal_cubic_state(1, opts);
  CHECK(v1.m_value == doctest::Approx(1.0));

  Real prev = 1.0 + 1e-9;
  for (int v = 2; v <= 4; ++v) {
    const auto res = optimal_cubic_state(v, opts);
    CHECK(res.m_value <= prev + 1e-9);
    CHECK(res.m_value <= 1.0 + 1e-9);
    CHECK(std::abs(res.state.coeffs.norm() - 1.0) < 1e-12);
    prev = res.m_value;
  }
  CHECK(prev < 0.95);  // genuine nonlinear squeezing found by v = 4
}

TEST_CASE("optimizer is self-consistent under more starts") {
  for (int v = 2; v <= 4; ++v) {
    CubicStateOptions a;
    a.starts = 8;
    CubicStateOptions b;
    b.starts = 16;
    const Real ma = optimal_cubic_state(v, a).m_value;
    const Real mb = optimal_cubic_state(v, b).m_value;
    CHECK(std::abs(ma - mb) < 1e-6);
  }
}

TEST_CASE("cutoff bias reads the top boundary population") {
  Matrix rho = Matrix::Zero(10, 10);
  rho(0, 0) = 1.0 - 1e-6;
  rho(9, 9) = 1e-6;
  CHECK(cutoff_bias({10, rho}) == doctest::Approx(1e-6));
  CHECK(cutoff_bias({10, rho}) > kCutoffBiasThreshold);
  CHECK(cutoff_bias(fock_state(0, 10)) < kCutoffBiasThreshold);
}
