#include "tfsim/dispmat.hpp"

#include <cmath>
#include <limits>

namespace tfsim::dispmat {

namespace {

const Real kLogMinNormal = std::log(std::numeric_limits<Real>::min());
const Real kLogMax = std::log(std::numeric_limits<Real>::max());

}  // namespace

Real laguerre_assoc(int n, int alpha, Real x) {
  if (n < 0) throw InvalidDimensionError("laguerre_assoc: n must be >= 0");
  if (n == 0) return 1.0;
  Real prev = 1.0;
  Real cur = 1.0 + Real(alpha) - x;
  for (int k = 2; k <= n; ++k) {
    const Real next = ((Real(2 * k - 1 + alpha) - x) * cur - Real(k - 1 + alpha) * prev) / Real(k);
    prev = cur;
    cur = next;
  }
  return cur;
}

std::pair<TruncatedOperator, GuardReport> displacement_closed_form(Complex xi, int dim) {
  if (dim < 1) throw InvalidDimensionError("displacement_closed_form: dim must be >= 1");
  TruncatedOperator op{dim, Matrix::Zero(dim, dim), Provenance::ClosedForm};
  GuardReport report;
  const Real ax = std::abs(xi);
  if (ax == 0.0) {
    op.entries.setIdentity();
    return {std::move(op), std::move(report)};
  }
  const Real x = ax * ax;
  const Complex phase = xi / ax;
  const Real log_ax = std::log(ax);

  std::vector<Real> lgam(dim + 1);
  for (int k = 0; k <= dim; ++k) lgam[k] = std::lgamma(Real(k) + 1.0);

  auto flag = [&](int m, int n, bool under, bool over) {
    if (under) report.underflow_cells.emplace_back(m, n);
    if (over) report.overflow_cells.emplace_back(m, n);
    if (under && over) report.invalid_cells.emplace_back(m, n);
  };

  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n <= m; ++n) {
      // sqrt(n!/m!) * |xi|^(m-n) * exp(-|xi|^2/2), combined in log space
      const Real pref_log = 0.5 * (lgam[n] - lgam[m]) + Real(m - n) * log_ax - 0.5 * x;
      const Real lag = laguerre_assoc(n, m - n, x);
      bool under = pref_log < kLogMinNormal;
      bool over = !std::isfinite(lag);
      if (!over && lag != 0.0) {
        const Real lag_log = std::log(std::abs(lag));
        over = over || lag_log > kLogMax || pref_log + lag_log > kLogMax;
        under = under || pref_log + lag_log < kLogMinNormal;
      }
      if (under || over) {
        flag(m, n, under, over);
        if (m != n) flag(n, m, under, over);
        continue;
      }
      const Complex val = std::exp(pref_log) * std::pow(phase, m - n) * lag;
      op.entries(m, n) = val;
      if (m != n) {
        // (-1)^(m-n) conj recovers the upper triangle
        const Real sign = ((m - n) % 2 == 0) ? 1.0 : -1.0;
        op.entries(n, m) = sign * std::conj(val);
      }
    }
  }
  return {std::move(op), std::move(report)};
}

TruncatedOperator displacement_recurrent(Complex xi, int dim) {
  if (dim < 1) throw InvalidDimensionError("displacement_recurrent: dim must be >= 1");
  TruncatedOperator op{dim, Matrix::Zero(dim, dim), Provenance::Recurrent};
  Matrix& g = op.entries;
  const Complex xic = std::conj(xi);
  g(0, 0) = std::exp(-0.5 * std::norm(xi));
  for (int i = 1; i < dim; ++i) g(i, 0) = xi / std::sqrt(Real(i)) * g(i - 1, 0);
  // column-major fill matches the dependency on column j-1
  for (int j = 1; j < dim; ++j) {
    const Real sj = std::sqrt(Real(j));
    g(0, j) = -xic / sj * g(0, j - 1);
    for (int i = 1; i < dim; ++i) {
      g(i, j) = std::sqrt(Real(i)) / sj * g(i - 1, j - 1) - xic / sj * g(i, j - 1);
    }
  }
  return op;
}

}  // namespace tfsim::dispmat
