#include "tfsim/tame.hpp"

#include "tfsim/expm.hpp"
#include "tfsim/fock.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tfsim::tame {

TruncatedOperator displacement_generator(Complex xi, int dim) {
  if (dim < 1) throw InvalidDimensionError("displacement_generator: dim must be >= 1");
  Matrix q = Matrix::Zero(dim, dim);
  for (int i = 0; i + 1 < dim; ++i) {
    const Real s = std::sqrt(Real(i + 1));
    q(i + 1, i) = xi * s;             // xi * A^dag
    q(i, i + 1) = -std::conj(xi) * s; // -conj(xi) * A
  }
  return {dim, std::move(q), Provenance::Algebraic};
}

TruncatedOperator tame_build(Complex xi, int d1, int d0) {
  if (d0 < 1) throw InvalidDimensionError("tame_build: d0 must be >= 1");
  if (d1 < d0) throw InvalidDimensionError("tame_build: requires d1 >= d0");
  const Matrix full = expm(displacement_generator(xi, d1).entries);
  return {d0, full.topLeftCorner(d0, d0), Provenance::Tame};
}

int find_dimension(Complex xi, const TameConfig& config) {
  if (!config.valid()) throw InvalidDimensionError("find_dimension: invalid config");
  const Real tol = match_tolerance(config.epsilon1);
  const int limit = static_cast<int>(config.h * config.d0);
  int q = config.d0 + 1;
  Matrix mq = tame_build(xi, q, config.d0).entries;
  while (q < limit) {
    const int p = q + 1;
    Matrix mp = tame_build(xi, p, config.d0).entries;
    if ((mq - mp).cwiseAbs().maxCoeff() < tol) return q;
    q = p;
    mq = std::move(mp);  // recycle the candidate for the next iteration
  }
  throw NoSolutionError("find_dimension: no solution found below h*d0 = " +
                        std::to_string(limit));
}

ErrorMatrixStats error_stats(const Matrix& e) {
  const Eigen::Index rows = e.rows(), cols = e.cols();
  ErrorMatrixStats st{RealVector(cols), RealVector(cols), RealVector(cols)};
  for (Eigen::Index j = 0; j < cols; ++j) {
    Real sum = 0, sum2 = 0, mx = kLogZeroSentinel;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Real mag = std::abs(e(i, j));
      const Real l = mag > 0.0 ? std::log10(mag) : kLogZeroSentinel;
      sum += l;
      sum2 += l * l;
      if (l > mx) mx = l;
    }
    const Real mean = sum / Real(rows);
    st.col_mean[j] = mean;
    st.col_std[j] = std::sqrt(std::max(0.0, sum2 / Real(rows) - mean * mean));
    st.col_max[j] = mx;
  }
  return st;
}

std::pair<Matrix, ErrorMatrixStats> error_matrix(const TruncatedOperator& g, Complex xi) {
  if (g.dim < 2) throw InvalidDimensionError("error_matrix: dim must be >= 2");
  const int d = g.dim;
  const Matrix& m = g.entries;
  const Complex xic = std::conj(xi);
  Matrix e(d, d);
  e(0, 0) = m(0, 0) - std::exp(-0.5 * std::norm(xi));
  for (int i = 1; i < d; ++i) e(i, 0) = m(i, 0) - xi / std::sqrt(Real(i)) * m(i - 1, 0);
  for (int j = 1; j < d; ++j) {
    const Real sj = std::sqrt(Real(j));
    e(0, j) = m(0, j) + xic / sj * m(0, j - 1);
    for (int i = 1; i < d; ++i) {
      e(i, j) = m(i, j) - (std::sqrt(Real(i)) / sj * m(i - 1, j - 1) - xic / sj * m(i, j - 1));
    }
  }
  ErrorMatrixStats st = error_stats(e);
  return {std::move(e), std::move(st)};
}

DimensionCache::DimensionCache(std::string path) : path_(std::move(path)) {
  load();
}

DimensionCache::Key DimensionCache::make_key(Real abs_xi, int d0, Real epsilon1) {
  return {static_cast<long long>(std::llround(abs_xi * 1e6)), d0, epsilon1};
}

int DimensionCache::lookup(Real abs_xi, int d0, Real epsilon1) const {
  auto it = entries_.find(make_key(abs_xi, d0, epsilon1));
  return it == entries_.end() ? 0 : it->second;
}

void DimensionCache::insert(Real abs_xi, int d0, Real epsilon1, int d1) {
  entries_[make_key(abs_xi, d0, epsilon1)] = d1;
}

void DimensionCache::load() {
  entries_.clear();
  if (path_.empty()) return;
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  while (std::getline(in, line)) {
    double abs_xi = 0, eps1 = 0;
    int d0 = 0, d1 = 0;
    if (std::sscanf(line.c_str(), "abs_xi=%lf d0=%d eps1=%lf d1=%d", &abs_xi, &d0, &eps1, &d1) == 4)
      entries_[make_key(abs_xi, d0, eps1)] = d1;
  }
}

void DimensionCache::save() const {
  if (path_.empty()) return;
  const std::string tmp = path_ + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("DimensionCache: cannot write " + tmp);
    char buf[128];
    for (const auto& [key, d1] : entries_) {
      const auto& [scaled, d0, eps1] = key;
      std::snprintf(buf, sizeof(buf), "abs_xi=%.6f d0=%d eps1=%.17g d1=%d\n",
                    double(scaled) / 1e6, d0, eps1, d1);
      out << buf;
    }
  }
  if (std::rename(tmp.c_str(), path_.c_str()) != 0)
    throw std::runtime_error("DimensionCache: cannot replace " + path_);
}

int find_dimension_cached(Complex xi, const TameConfig& config, DimensionCache& cache) {
  const Real abs_xi = std::abs(xi);
  if (int hit = cache.lookup(abs_xi, config.d0, config.epsilon1)) return hit;
  const int d1 = find_dimension(xi, config);
  cache.insert(abs_xi, config.d0, config.epsilon1, d1);
  cache.save();
  return d1;
}

}  // namespace tfsim::tame
