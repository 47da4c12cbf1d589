#pragma once

#include "tfsim/types.hpp"

#include <utility>

namespace tfsim::metrics {

/// Minimal Gaussian value of min_mu V; normalizes the nonlinear variance.
inline constexpr Real kLambdaGaussian = 0.75;

/// Ladder-monomial expectations <a^dag^p a^q> with p+q <= 4, read from the
/// |i-j| <= 4 bands of a density operator. Closed-form coefficients; no
/// truncated-operator products.
struct LadderMoments {
  Complex a;      // <a>
  Complex a2;     // <a^2>
  Real n;         // <a^dag a>
  Complex a3;     // <a^3>
  Complex ada2;   // <a^dag a^2>
  Complex a4;     // <a^4>
  Complex ada3;   // <a^dag a^3>
  Real ad2a2;     // <a^dag^2 a^2>
};

LadderMoments ladder_moments(const DensityOperator& rho);

/// Quarter-turn frame rotation a -> i a: monomials pick up i^(q-p).
LadderMoments rotate_quarter(const LadderMoments& m);

/// Quadrature moments in the convention X = (a + a^dag)/sqrt(2),
/// P = i(a^dag - a)/sqrt(2), [X, P] = i.
struct QuadratureMoments {
  Real mean_P;
  Real mean_X2;
  Real mean_P2;
  Real mean_X4;
  Real mean_sym_PX2;  // <PX^2 + X^2P>
};

QuadratureMoments quadrature_moments(const LadderMoments& m);
QuadratureMoments quadrature_moments(const DensityOperator& rho);

/// V(mu) = A mu^2 + B mu^-4 + C mu^-1 for Y = mu P - 2^(-1/2) mu^-2 X^2.
struct VarianceCoefficients {
  Real A;  // Var(P)
  Real B;  // Var(X^2)/2
  Real C;  // -(1/sqrt 2)(<{P, X^2}> - 2<P><X^2>)
};

VarianceCoefficients variance_coefficients(const QuadratureMoments& q);

/// Analytic minimum of V over real mu (both roots of 2A t^2 - C t - 4B = 0
/// in t = mu^3, negative branch included). Throws NumericGuardError on the
/// degenerate A <= 0 case, which no physical state produces.
std::pair<Real, Real> minimize_variance(const VarianceCoefficients& c);  // (V_min, mu)

struct NonlinearVariance {
  Real m_value;  // min_mu V / lambda_G
  Real mu_opt;
};

/// Gaussian-normalized nonlinear squeezing M(rho). The Y-frame is rotated a
/// quarter turn from quadrature_moments' (X, P): the squared quadrature of Y
/// lies along the axis a real displacement shifts. lambda_G is frame-free.
NonlinearVariance nonlinear_variance(const DensityOperator& rho);

/// <theta| rho |theta> for |theta> = cos(t)|0> + sin(t)|1>.
Real fidelity_qubit(const DensityOperator& rho, Real theta);

struct CubicStateOptions {
  int starts = 32;            // multi-start count
  bool allow_complex = false; // optimize 2v reals instead of v
  unsigned seed = 20220913;   // per-start seeds derive from this
  int max_iterations = 4000;
  Real simplex_tol = 1e-12;
};

struct CubicStateResult {
  PureState state;
  Real m_value;
};

/// Best-effort search for the v-dimensional pure state minimizing M, by
/// multi-start Nelder-Mead over unit-norm coefficient vectors.
CubicStateResult optimal_cubic_state(int v, const CubicStateOptions& options = {});

/// Population of the top four Fock levels; the moment formulas read bands up
/// to width four, so mass there signals cutoff bias (threshold 1e-8).
Real cutoff_bias(const DensityOperator& rho);
inline constexpr Real kCutoffBiasThreshold = 1e-8;

}  // namespace tfsim::metrics
