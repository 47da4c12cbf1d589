#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace tfsim {

using Real = double;
using Complex = std::complex<Real>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// How a truncated operator was constructed.
enum class Provenance { ClosedForm, Recurrent, Tame, PlainExpm, Algebraic };

const char* to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct InvalidDimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Fatal numeric condition (non-finite input, degenerate variance, ...).
struct NumericGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative search exhausts its range.
struct NoSolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense complex operator on a truncated Fock space of dimension `dim`.
struct TruncatedOperator {
  int dim = 0;
  Matrix entries;
  Provenance provenance = Provenance::Algebraic;

  bool all_finite() const;
};

/// Coefficient vector over the first `dim` Fock states; may be sub-normalized.
struct PureState {
  int dim = 0;
  Vector coeffs;
};

/// Hermitian, positive-semidefinite (within tolerance), 0 < trace <= 1 matrix.
/// Unnormalized conditional states are allowed before normalization.
struct DensityOperator {
  int dim = 0;
  Matrix entries;
};

// Validation tolerances, set near double-precision accumulation limits for
// operator chains at d ~ 100.
inline constexpr Real kHermitianTol = 1e-12;
inline constexpr Real kPsdTol = -1e-10;
inline constexpr Real kTraceTol = 1e-12;
inline constexpr Real kStateNormTol = 1e-12;

/// Checks the DensityOperator invariants; optionally reports the first violation.
bool is_valid_density(const DensityOperator& rho, std::string* why = nullptr);

}  // namespace tfsim
