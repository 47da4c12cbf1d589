#pragma once

// Independent reference implementations used to freeze expected values.
// These deliberately avoid the library's computation paths.

#include "tfsim/circuit.hpp"
#include "tfsim/fock.hpp"
#include "tfsim/metrics.hpp"
#include "tfsim/types.hpp"

#include <cmath>
#include <random>

namespace oracles {

using tfsim::Complex;
using tfsim::Matrix;
using tfsim::Real;
using tfsim::RealVector;
using tfsim::Vector;

/// Taylor-series matrix exponential, summed until the term underflows.
inline Matrix taylor_expm(const Matrix& a, int max_terms = 300) {
  Matrix sum = Matrix::Identity(a.rows(), a.cols());
  Matrix term = sum;
  for (int k = 1; k <= max_terms; ++k) {
    term = (term * a / Real(k)).eval();
    sum += term;
    if (term.cwiseAbs().maxCoeff() < 1e-300) break;
  }
  return sum;
}

/// Associated Laguerre polynomial from the explicit series
/// L_n^(a)(x) = sum_k binom(n+a, n-k) (-x)^k / k!.
inline Real laguerre_series(int n, int alpha, Real x) {
  Real sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const Real log_binom = std::lgamma(Real(n + alpha) + 1.0) -
                           std::lgamma(Real(n - k) + 1.0) -
                           std::lgamma(Real(alpha + k) + 1.0);
    const Real log_fact = std::lgamma(Real(k) + 1.0);
    const Real mag = std::exp(log_binom - log_fact + Real(k) * std::log(std::max(x, 1e-300)));
    sum += (k % 2 == 0 ? 1.0 : -1.0) * (x == 0.0 && k > 0 ? 0.0 : mag);
  }
  return sum;
}

/// Brute-force cascade click statistics: enumerate all M^k photon-to-detector
/// assignments and count those with exactly n distinct detectors hit.
inline Real cascade_enumeration(int m, int n, int k) {
  long total = 1;
  for (int i = 0; i < k; ++i) total *= m;
  long hits = 0;
  std::vector<int> assign(std::max(k, 1), 0);
  for (long code = 0; code < total; ++code) {
    long c = code;
    std::vector<char> clicked(m, 0);
    for (int i = 0; i < k; ++i) {
      clicked[c % m] = 1;
      c /= m;
    }
    int clicks = 0;
    for (char b : clicked) clicks += b;
    if (clicks == n) ++hits;
  }
  return Real(hits) / Real(total);
}

/// Direct two-mode evaluation of the conditional state: builds the full
/// Kronecker-product density operator, applies loss Kraus operators and the
/// displacement on mode 2, projects on the Fock-diagonal POVM and partial
/// traces. Only viable at small d0.
struct KronOracleResult {
  tfsim::DensityOperator rho;
  Real probability;
};

/// Two-mode state after loss and displacement, before measurement;
/// reusable across POVMs at fixed (gamma, eta, displacement).
inline Matrix kron_two_mode_state(Real gamma, Real eta, const Matrix& displacement, int d0) {
  using namespace tfsim;
  const RealVector mu = circuit::tmsv_coeffs(gamma, d0);
  Vector tmsv = Vector::Zero(d0 * d0);
  for (int i = 0; i < d0; ++i) tmsv[i * d0 + i] = mu[i];
  const Matrix psi = tmsv * tmsv.adjoint();

  const Matrix id = Matrix::Identity(d0, d0);
  Matrix lossy = Matrix::Zero(d0 * d0, d0 * d0);
  for (int k = 0; k < d0; ++k) {
    const Matrix mk = circuit::loss_kraus(eta, k, d0).entries;
    const Matrix op = fock::kron(id, mk);
    lossy += op * psi * op.adjoint();
  }
  const Matrix disp2 = fock::kron(id, displacement);
  return disp2 * lossy * disp2.adjoint();
}

inline KronOracleResult kron_project(const Matrix& displaced,
                                     const tfsim::RealVector& povm_weights, int d0) {
  // tr_2{ rho (1 x Pi) } with Fock-diagonal Pi
  Matrix reduced = Matrix::Zero(d0, d0);
  for (int i = 0; i < d0; ++i)
    for (int j = 0; j < d0; ++j)
      for (int m = 0; m < d0; ++m)
        reduced(i, j) += displaced(i * d0 + m, j * d0 + m) * povm_weights[m];
  const Real prob = reduced.trace().real();
  return {tfsim::DensityOperator{d0, reduced / prob}, prob};
}

inline KronOracleResult kron_circuit_oracle(Real gamma, Real eta,
                                            const tfsim::RealVector& povm_weights,
                                            const Matrix& displacement, int d0) {
  return kron_project(kron_two_mode_state(gamma, eta, displacement, d0), povm_weights, d0);
}

/// Quadrature moments from dense X and P matrices built on an enlarged space
/// (dim + 6) so operator products do not suffer edge truncation.
inline tfsim::metrics::QuadratureMoments dense_moment_oracle(const tfsim::DensityOperator& rho) {
  using namespace tfsim;
  const int big = rho.dim + 6;
  const Matrix a = fock::make_annihilation(big).entries;
  const Matrix ad = a.adjoint();
  const Real s2 = std::sqrt(2.0);
  const Matrix x = (a + ad) / s2;
  const Matrix p = Complex(0, 1) * (ad - a) / s2;
  Matrix embedded = Matrix::Zero(big, big);
  embedded.topLeftCorner(rho.dim, rho.dim) = rho.entries;
  auto expect = [&](const Matrix& op) { return (embedded * op).trace().real(); };
  metrics::QuadratureMoments q;
  q.mean_P = expect(p);
  q.mean_X2 = expect(x * x);
  q.mean_P2 = expect(p * p);
  q.mean_X4 = expect(x * x * x * x);
  q.mean_sym_PX2 = expect(p * x * x + x * x * p);
  return q;
}

/// Independent minimizer of V(mu) = A mu^2 + B mu^-4 + C mu^-1: log-spaced
/// scan over both signs of mu followed by golden-section refinement.
inline Real grid_scan_vmin(Real A, Real B, Real C, int points = 10000) {
  auto v = [&](Real mu) { return A * mu * mu + B / (mu * mu * mu * mu) + C / mu; };
  Real best = std::numeric_limits<Real>::infinity();
  Real best_mu = 1.0;
  for (int sign = -1; sign <= 1; sign += 2) {
    for (int i = 0; i < points; ++i) {
      const Real mu = sign * std::pow(10.0, -2.0 + 4.0 * Real(i) / Real(points - 1));
      const Real val = v(mu);
      if (val < best) {
        best = val;
        best_mu = mu;
      }
    }
  }
  // golden-section refinement around the best grid point
  const Real phi = (std::sqrt(5.0) - 1.0) / 2.0;
  Real lo = best_mu / std::pow(10.0, 8.0 / points);
  Real hi = best_mu * std::pow(10.0, 8.0 / points);
  if (lo > hi) std::swap(lo, hi);
  Real c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
  for (int it = 0; it < 200; ++it) {
    if (v(c) < v(d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - phi * (hi - lo);
    d = lo + phi * (hi - lo);
  }
  return std::min(best, v(0.5 * (lo + hi)));
}

/// Random density operator: mixture of a few Haar-ish random pure states.
inline tfsim::DensityOperator random_density(int dim, unsigned seed, int rank = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> gauss(0.0, 1.0);
  Matrix acc = Matrix::Zero(dim, dim);
  std::uniform_real_distribution<Real> unif(0.1, 1.0);
  Real total = 0;
  for (int r = 0; r < rank; ++r) {
    Vector psi(dim);
    for (int i = 0; i < dim; ++i) psi[i] = Complex(gauss(rng), gauss(rng));
    psi /= psi.norm();
    const Real w = unif(rng);
    acc += w * (psi * psi.adjoint());
    total += w;
  }
  return {dim, acc / total};
}

inline Matrix random_complex_matrix(int dim, unsigned seed, Real scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> gauss(0.0, 1.0);
  Matrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = scale * Complex(gauss(rng), gauss(rng));
  return m;
}

}  // namespace oracles
