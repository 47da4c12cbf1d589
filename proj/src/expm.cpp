#include "tfsim/expm.hpp"

#include "tfsim/fock.hpp"

#include <cmath>

namespace tfsim {

namespace {

constexpr Real kTheta3 = 1.495585217958292e-2;
constexpr Real kTheta5 = 2.539398330063230e-1;
constexpr Real kTheta7 = 9.504178996162932e-1;
constexpr Real kTheta9 = 2.097847961257068e0;

void pade3(const Matrix& a, Matrix& u, Matrix& v) {
  static const Real b[] = {120., 60., 12., 1.};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  u.noalias() = a * (b[3] * a2 + b[1] * id);
  v = b[2] * a2 + b[0] * id;
}

void pade5(const Matrix& a, Matrix& u, Matrix& v) {
  static const Real b[] = {30240., 15120., 3360., 420., 30., 1.};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  u.noalias() = a * (b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade7(const Matrix& a, Matrix& u, Matrix& v) {
  static const Real b[] = {17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  u.noalias() = a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade9(const Matrix& a, Matrix& u, Matrix& v) {
  static const Real b[] = {17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                           2162160.,     110880.,     3960.,       90.,        1.};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix a8 = a6 * a2;
  u.noalias() = a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
  v = b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

void pade13(const Matrix& a, Matrix& u, Matrix& v) {
  static const Real b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                           1187353796428800.,  129060195264000.,   10559470521600.,
                           670442572800.,      33522128640.,       1323241920.,
                           40840800.,          960960.,            16380.,
                           182.,               1.};
  const Matrix id = Matrix::Identity(a.rows(), a.cols());
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  Matrix w = b[13] * a6 + b[11] * a4 + b[9] * a2;
  Matrix tmp;
  tmp.noalias() = a6 * w;
  tmp += b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  u.noalias() = a * tmp;
  tmp = b[12] * a6 + b[10] * a4 + b[8] * a2;
  v.noalias() = a6 * tmp;
  v += b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
}

}  // namespace

int expm_cost_estimate(Real one_norm) {
  if (!(one_norm >= 0.0)) throw InvalidDimensionError("expm_cost_estimate: norm must be >= 0");
  if (one_norm <= kPadeTheta13) return 0;
  return static_cast<int>(std::ceil(std::log2(one_norm / kPadeTheta13)));
}

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw InvalidDimensionError("expm: matrix must be square");
  if (!a.allFinite()) throw NumericGuardError("expm: non-finite input");
  const Real norm1 = fock::one_norm(a);
  Matrix u(a.rows(), a.cols()), v(a.rows(), a.cols());
  int squarings = 0;
  if (norm1 <= kTheta3) {
    pade3(a, u, v);
  } else if (norm1 <= kTheta5) {
    pade5(a, u, v);
  } else if (norm1 <= kTheta7) {
    pade7(a, u, v);
  } else if (norm1 <= kTheta9) {
    pade9(a, u, v);
  } else {
    squarings = expm_cost_estimate(norm1);
    const Matrix scaled = a * std::ldexp(1.0, -squarings);
    pade13(scaled, u, v);
  }
  Matrix numer = v + u;
  Matrix denom = v - u;
  Matrix result = denom.partialPivLu().solve(numer);
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();
  return result;
}

TruncatedOperator expm(const TruncatedOperator& a) {
  return {a.dim, expm(a.entries), Provenance::PlainExpm};
}

}  // namespace tfsim
