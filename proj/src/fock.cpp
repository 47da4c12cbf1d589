#include "tfsim/fock.hpp"

#include <cmath>

namespace tfsim::fock {

TruncatedOperator make_annihilation(int dim) {
  if (dim < 1) throw InvalidDimensionError("make_annihilation: dim must be >= 1");
  Matrix a = Matrix::Zero(dim, dim);
  for (int i = 0; i + 1 < dim; ++i) a(i, i + 1) = std::sqrt(Real(i + 1));
  return {dim, std::move(a), Provenance::Algebraic};
}

TruncatedOperator make_creation(int dim) {
  TruncatedOperator a = make_annihilation(dim);
  a.entries = a.entries.adjoint().eval();
  return a;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  Matrix out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i)
    for (Eigen::Index j = 0; j < ca; ++j)
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
  return out;
}

TruncatedOperator kron(const TruncatedOperator& a, const TruncatedOperator& b) {
  return {a.dim * b.dim, kron(a.entries, b.entries), Provenance::Algebraic};
}

DensityOperator partial_trace(const DensityOperator& rho, int keep, int d1, int d2) {
  if (keep != 1 && keep != 2) throw InvalidDimensionError("partial_trace: keep must be 1 or 2");
  if (d1 < 1 || d2 < 1 || rho.dim != d1 * d2)
    throw InvalidDimensionError("partial_trace: rho.dim != d1*d2");
  const Matrix& r = rho.entries;
  if (keep == 1) {
    Matrix out = Matrix::Zero(d1, d1);
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d1; ++j)
        for (int k = 0; k < d2; ++k) out(i, j) += r(i * d2 + k, j * d2 + k);
    return {d1, std::move(out)};
  }
  Matrix out = Matrix::Zero(d2, d2);
  for (int i = 0; i < d2; ++i)
    for (int j = 0; j < d2; ++j)
      for (int k = 0; k < d1; ++k) out(i, j) += r(k * d2 + i, k * d2 + j);
  return {d2, std::move(out)};
}

Real cutoff_error(const Vector& coeffs, int f) {
  const Eigen::Index n = std::min<Eigen::Index>(f, coeffs.size());
  Real retained = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) retained += std::norm(coeffs[i]);
  return 1.0 - retained;
}

RealVector column_norms(const Matrix& g) {
  return g.colwise().norm();
}

Real one_norm(const Matrix& g) {
  if (g.size() == 0) return 0.0;
  return g.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace tfsim::fock
