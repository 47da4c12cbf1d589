#include "tfsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <vector>

namespace tfsim::metrics {

namespace {

constexpr Complex kI{0.0, 1.0};

// <a^dag^p a^q> = sum_n rho(n, n - (q-p)) g(n): the lower band of rho
template <typename G>
Complex band_sum(const Matrix& rho, int delta, int n_min, G&& g) {
  const int d = static_cast<int>(rho.rows());
  Complex acc = 0.0;
  for (int n = n_min; n < d; ++n) acc += rho(n, n - delta) * g(n);
  return acc;
}

}  // namespace

LadderMoments ladder_moments(const DensityOperator& rho) {
  const Matrix& r = rho.entries;
  LadderMoments m;
  m.a = band_sum(r, 1, 1, [](int n) { return std::sqrt(Real(n)); });
  m.a2 = band_sum(r, 2, 2, [](int n) { return std::sqrt(Real(n) * Real(n - 1)); });
  m.n = band_sum(r, 0, 1, [](int n) { return Real(n); }).real();
  m.a3 = band_sum(r, 3, 3,
                  [](int n) { return std::sqrt(Real(n) * Real(n - 1) * Real(n - 2)); });
  m.ada2 = band_sum(r, 1, 2, [](int n) { return Real(n - 1) * std::sqrt(Real(n)); });
  m.a4 = band_sum(r, 4, 4, [](int n) {
    return std::sqrt(Real(n) * Real(n - 1) * Real(n - 2) * Real(n - 3));
  });
  m.ada3 = band_sum(r, 2, 3,
                    [](int n) { return Real(n - 2) * std::sqrt(Real(n) * Real(n - 1)); });
  m.ad2a2 = band_sum(r, 0, 2, [](int n) { return Real(n) * Real(n - 1); }).real();
  return m;
}

LadderMoments rotate_quarter(const LadderMoments& m) {
  LadderMoments r = m;
  r.a = kI * m.a;
  r.a2 = -m.a2;
  r.a3 = -kI * m.a3;
  r.a4 = m.a4;
  r.ada2 = kI * m.ada2;
  r.ada3 = -m.ada3;
  return r;
}

QuadratureMoments quadrature_moments(const LadderMoments& m) {
  const Real s2 = std::sqrt(2.0);
  QuadratureMoments q;
  q.mean_P = s2 * m.a.imag();
  q.mean_X2 = m.a2.real() + m.n + 0.5;
  q.mean_P2 = -m.a2.real() + m.n + 0.5;
  q.mean_X4 =
      (2.0 * m.a4.real() + 8.0 * m.ada3.real() + 6.0 * m.ad2a2 + 12.0 * m.a2.real() +
       12.0 * m.n + 3.0) /
      4.0;
  q.mean_sym_PX2 = s2 * (m.a3.imag() + m.ada2.imag() + m.a.imag());
  return q;
}

QuadratureMoments quadrature_moments(const DensityOperator& rho) {
  return quadrature_moments(ladder_moments(rho));
}

VarianceCoefficients variance_coefficients(const QuadratureMoments& q) {
  VarianceCoefficients c;
  c.A = q.mean_P2 - q.mean_P * q.mean_P;
  c.B = 0.5 * (q.mean_X4 - q.mean_X2 * q.mean_X2);
  c.C = -(1.0 / std::sqrt(2.0)) * (q.mean_sym_PX2 - 2.0 * q.mean_P * q.mean_X2);
  return c;
}

std::pair<Real, Real> minimize_variance(const VarianceCoefficients& c) {
  if (!(c.A > 0.0)) throw NumericGuardError("minimize_variance: degenerate Var(P) <= 0");
  const Real disc = c.C * c.C + 32.0 * c.A * c.B;
  if (disc < 0.0) throw NumericGuardError("minimize_variance: negative discriminant");
  const Real root = std::sqrt(disc);
  Real best_v = std::numeric_limits<Real>::infinity();
  Real best_mu = 0.0;
  for (const Real t : {(c.C + root) / (4.0 * c.A), (c.C - root) / (4.0 * c.A)}) {
    if (t == 0.0) continue;
    const Real mu = std::cbrt(t);
    const Real v = c.A * mu * mu + c.B / (mu * mu * mu * mu) + c.C / mu;
    if (v < best_v) {
      best_v = v;
      best_mu = mu;
    }
  }
  if (!std::isfinite(best_v))
    throw NumericGuardError("minimize_variance: no stationary point");
  return {best_v, best_mu};
}

NonlinearVariance nonlinear_variance(const DensityOperator& rho) {
  const QuadratureMoments q = quadrature_moments(rotate_quarter(ladder_moments(rho)));
  const auto [vmin, mu] = minimize_variance(variance_coefficients(q));
  return {vmin / kLambdaGaussian, mu};
}

Real fidelity_qubit(const DensityOperator& rho, Real theta) {
  if (rho.dim < 2) throw InvalidDimensionError("fidelity_qubit: dim must be >= 2");
  const Real c = std::cos(theta), s = std::sin(theta);
  return c * c * rho.entries(0, 0).real() + s * s * rho.entries(1, 1).real() +
         2.0 * c * s * rho.entries(0, 1).real();
}

Real cutoff_bias(const DensityOperator& rho) {
  Real pop = 0.0;
  for (int n = std::max(0, rho.dim - 4); n < rho.dim; ++n)
    pop += rho.entries(n, n).real();
  return pop;
}

namespace {

Real cubic_objective(const RealVector& params, int v, bool complex_coeffs) {
  Vector psi(v);
  if (complex_coeffs) {
    for (int i = 0; i < v; ++i) psi[i] = Complex(params[i], params[v + i]);
  } else {
    for (int i = 0; i < v; ++i) psi[i] = params[i];
  }
  const Real norm = psi.norm();
  if (norm < 1e-12) return 1e9;
  psi /= norm;
  DensityOperator rho{v, psi * psi.adjoint()};
  try {
    return nonlinear_variance(rho).m_value;
  } catch (const NumericGuardError&) {
    return 1e9;
  }
}

// standard Nelder-Mead on R^n; returns best point found
std::pair<RealVector, Real> nelder_mead(RealVector start, int max_iter, Real tol,
                                        const std::function<Real(const RealVector&)>& f) {
  const int n = static_cast<int>(start.size());
  std::vector<RealVector> x(n + 1, start);
  std::vector<Real> fx(n + 1);
  for (int i = 0; i < n; ++i) x[i + 1][i] += 0.25;
  for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

  for (int it = 0; it < max_iter; ++it) {
    std::vector<int> order(n + 1);
    for (int i = 0; i <= n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::vector<RealVector> xs(n + 1);
    std::vector<Real> fs(n + 1);
    for (int i = 0; i <= n; ++i) {
      xs[i] = x[order[i]];
      fs[i] = fx[order[i]];
    }
    x = std::move(xs);
    fx = std::move(fs);
    Real spread = 0.0;
    for (int i = 1; i <= n; ++i) spread = std::max(spread, (x[i] - x[0]).norm());
    if (spread < tol && std::abs(fx[n] - fx[0]) < tol) break;

    RealVector centroid = RealVector::Zero(n);
    for (int i = 0; i < n; ++i) centroid += x[i];
    centroid /= Real(n);

    const RealVector refl = centroid + (centroid - x[n]);
    const Real f_refl = f(refl);
    if (f_refl < fx[0]) {
      const RealVector exp_pt = centroid + 2.0 * (centroid - x[n]);
      const Real f_exp = f(exp_pt);
      if (f_exp < f_refl) {
        x[n] = exp_pt;
        fx[n] = f_exp;
      } else {
        x[n] = refl;
        fx[n] = f_refl;
      }
    } else if (f_refl < fx[n - 1]) {
      x[n] = refl;
      fx[n] = f_refl;
    } else {
      const RealVector contr = centroid + 0.5 * (x[n] - centroid);
      const Real f_contr = f(contr);
      if (f_contr < fx[n]) {
        x[n] = contr;
        fx[n] = f_contr;
      } else {
        for (int i = 1; i <= n; ++i) {
          x[i] = x[0] + 0.5 * (x[i] - x[0]);
          fx[i] = f(x[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= static_cast<int>(x.size()) - 1; ++i)
    if (fx[i] < fx[best]) best = i;
  return {x[best], fx[best]};
}

}  // namespace

CubicStateResult optimal_cubic_state(int v, const CubicStateOptions& options) {
  if (v < 1) throw InvalidDimensionError("optimal_cubic_state: v must be >= 1");
  if (v == 1) {
    PureState vac{1, Vector::Ones(1)};
    return {vac, 1.0};  // single state in H_1
  }
  const int n = options.allow_complex ? 2 * v : v;
  auto objective = [&](const RealVector& p) { return cubic_objective(p, v, options.allow_complex); };

  auto run_start = [&](int s) {
    std::mt19937_64 rng(options.seed + static_cast<unsigned>(s));
    std::normal_distribution<Real> gauss(0.0, 1.0);
    RealVector start(n);
    for (int i = 0; i < n; ++i) start[i] = gauss(rng);
    start /= start.norm();
    return nelder_mead(start, options.max_iterations, options.simplex_tol, objective);
  };

  std::vector<std::future<std::pair<RealVector, Real>>> futures;
  futures.reserve(options.starts);
  for (int s = 0; s < options.starts; ++s)
    futures.push_back(std::async(std::launch::async, run_start, s));

  RealVector best_params;
  Real best_val = std::numeric_limits<Real>::infinity();
  for (auto& fut : futures) {
    auto [params, val] = fut.get();
    if (val < best_val) {
      best_val = val;
      best_params = params;
    }
  }

  Vector psi(v);
  if (options.allow_complex) {
    for (int i = 0; i < v; ++i) psi[i] = Complex(best_params[i], best_params[v + i]);
  } else {
    for (int i = 0; i < v; ++i) psi[i] = best_params[i];
  }
  psi /= psi.norm();
  return {PureState{v, std::move(psi)}, best_val};
}

}  // namespace tfsim::metrics
