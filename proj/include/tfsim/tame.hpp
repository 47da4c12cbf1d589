#pragma once

#include "tfsim/types.hpp"

#include <map>
#include <string>
#include <tuple>
#include <utility>

namespace tfsim::tame {

/// Parameters of the working-dimension search.
struct TameConfig {
  int d0 = 1;
  Real epsilon1 = 1e-13;  // element-identity tolerance
  Real h = 10.0;          // search depth factor: candidates run below h*d0

  bool valid() const { return d0 >= 1 && epsilon1 > 0.0 && h > 1.0; }
};

/// epsilon1 declares two entries identical when they agree through the
/// decimal place above epsilon1's own: |delta| < 10*epsilon1. The default
/// 1e-13 therefore accepts matrices matching through the 12th decimal.
inline Real match_tolerance(Real epsilon1) { return 10.0 * epsilon1; }

/// Anti-Hermitian displacement generator xi*A^dag - conj(xi)*A.
TruncatedOperator displacement_generator(Complex xi, int dim);

/// Top-left d0 x d0 block of expm of the generator built at dimension d1.
TruncatedOperator tame_build(Complex xi, int d1, int d0);

/// Iterative search for the least working dimension q in (d0, h*d0) such
/// that builds at q and q+1 agree on the d0 block. Recycles the previous
/// candidate matrix between iterations. Throws NoSolutionError when the
/// range is exhausted.
int find_dimension(Complex xi, const TameConfig& config);

/// Per-column statistics of log10|E| over rows. Exactly-zero cells enter
/// as the sentinel -400.
struct ErrorMatrixStats {
  RealVector col_mean;
  RealVector col_std;
  RealVector col_max;
};

inline constexpr Real kLogZeroSentinel = -400.0;

/// Residuals of a candidate displacement matrix against the element
/// recurrence; no recursion, so rounding errors are not amplified.
std::pair<Matrix, ErrorMatrixStats> error_matrix(const TruncatedOperator& g, Complex xi);

ErrorMatrixStats error_stats(const Matrix& e);

/// Persisted (abs_xi rounded to 1e-6, d0, epsilon1) -> d1 lookup so sweeps
/// never re-run the search. Plain-text records, one per line:
///   abs_xi=<fixed6> d0=<int> eps1=<g17> d1=<int>
class DimensionCache {
 public:
  DimensionCache() = default;
  explicit DimensionCache(std::string path);

  /// Returns 0 when the key is absent.
  int lookup(Real abs_xi, int d0, Real epsilon1) const;
  void insert(Real abs_xi, int d0, Real epsilon1, int d1);

  void load();
  void save() const;

  std::size_t size() const { return entries_.size(); }
  const std::string& path() const { return path_; }

 private:
  using Key = std::tuple<long long, int, Real>;  // abs_xi scaled by 1e6
  static Key make_key(Real abs_xi, int d0, Real epsilon1);

  std::string path_;
  std::map<Key, int> entries_;
};

/// Cache-backed search; inserts and persists on miss when the cache has a path.
int find_dimension_cached(Complex xi, const TameConfig& config, DimensionCache& cache);

}  // namespace tfsim::tame
