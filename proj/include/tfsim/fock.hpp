#pragma once

#include "tfsim/types.hpp"

namespace tfsim::fock {

/// Ladder operator: entries[i][i+1] = sqrt(i+1).
TruncatedOperator make_annihilation(int dim);

/// Adjoint of make_annihilation.
TruncatedOperator make_creation(int dim);

/// Tensor product, mode 1 as the slow index: index = i1 * dim_b + i2.
Matrix kron(const Matrix& a, const Matrix& b);
TruncatedOperator kron(const TruncatedOperator& a, const TruncatedOperator& b);

/// Partial trace of a two-mode operator with mode dimensions (d1, d2).
/// `keep` is 1 or 2; mode ordering matches kron (mode 1 slow).
DensityOperator partial_trace(const DensityOperator& rho, int keep, int d1, int d2);

/// 1 - sum_{i<f} |c_i|^2 for the leading coefficients of a normalized state.
Real cutoff_error(const Vector& coeffs, int f);

/// 2-norm of each column.
RealVector column_norms(const Matrix& g);
inline RealVector column_norms(const TruncatedOperator& g) { return column_norms(g.entries); }

/// Maximum absolute column sum.
Real one_norm(const Matrix& g);
inline Real one_norm(const TruncatedOperator& g) { return one_norm(g.entries); }

}  // namespace tfsim::fock
