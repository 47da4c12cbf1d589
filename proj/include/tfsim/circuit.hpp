#pragma once

#include "tfsim/types.hpp"

#include <string>
#include <vector>

namespace tfsim::circuit {

/// TMSV Schmidt coefficients sech(gamma) * tanh(gamma)^i for i < dim.
RealVector tmsv_coeffs(Real gamma, int dim);

/// k-photon-loss Kraus operator on `dim`: maps |j> to m_k(j) |j-k>.
TruncatedOperator loss_kraus(Real eta, int k, int dim);

/// The nonzero coefficients m_k(j) = sqrt(binom(j,k)) (1-eta)^(k/2) eta^((j-k)/2),
/// indexed by the source level j (zero for j < k).
RealVector loss_kraus_diagonal(Real eta, int k, int dim);

/// Probability that exactly n of M cascade detectors click given k photons.
/// Includes the binom(M, n) outcome-multiplicity factor required for
/// completeness sum_n p_M(n|k) = 1.
Real cascade_click_probability(int detectors, int clicks, int photons);

struct PovmDescriptor {
  enum class Kind { FockProjector, ApdClick, Cascade };
  Kind kind = Kind::ApdClick;
  int fock = 0;       // FockProjector level
  int detectors = 0;  // Cascade M
  int clicks = 0;     // Cascade n

  static PovmDescriptor fock_projector(int f) { return {Kind::FockProjector, f, 0, 0}; }
  static PovmDescriptor apd_click() { return {Kind::ApdClick, 0, 0, 0}; }
  static PovmDescriptor cascade(int m, int n) { return {Kind::Cascade, 0, m, n}; }

  /// "fock:3", "apd", "cascade:10:3"
  static PovmDescriptor parse(const std::string& text);
  std::string str() const;

  bool operator==(const PovmDescriptor&) const = default;
};

/// Fock-diagonal POVM element: weight per photon number.
struct PovmElement {
  RealVector weights;
  PovmDescriptor descriptor;
};

PovmElement make_povm(const PovmDescriptor& descriptor, int dim);

/// The thirteen detection outcomes studied by the sweeps: APD click, the
/// first six Fock projectors, and the six reference APD cascades.
std::vector<PovmDescriptor> standard_povm_set();

struct PreparationResult {
  DensityOperator rho;        // normalized; empty when unnormalizable
  Real probability = 0.0;
  bool unnormalizable = false;
};

/// Conditional single-mode state and success probability for the
/// TMSV -> loss -> displacement -> Fock-diagonal POVM circuit.
/// Evaluated through the rank-1 decomposition
///   rho ~ sum_k sum_m w_m v^(k,m) v^(k,m)+,
///   v^(k,m)_i = mu_i(gamma) <m| D M(k) |i>,
/// which never materializes the two-mode density operator.
PreparationResult prepare_conditional(Real gamma, Complex xi, Real eta,
                                      const PovmElement& povm, int d0,
                                      const TruncatedOperator& displacement);

/// Convenience overload that builds the displacement with tame_build(xi, d1, d0).
PreparationResult prepare_conditional(Real gamma, Complex xi, Real eta,
                                      const PovmElement& povm, int d0, int d1);

/// Probabilities below this are reported as zero with the unnormalizable flag.
inline constexpr Real kMinProbability = 1e-300;

/// Smallest candidate dimension on the {1, 5, 10, ...} grid whose displaced
/// TMSV cutoff error at (gamma_star, xi_star) falls to epsilon0 or below.
/// The probe displacement is built by plain expm at d1_probe; candidates are
/// capped at max_d0 (default d1_probe / 2, where the probe tail is safely
/// negligible). Throws NoSolutionError when no candidate qualifies.
int find_d0(Real gamma_star, Real xi_star, Real epsilon0, int d1_probe, int max_d0 = 0);

}  // namespace tfsim::circuit
