#pragma once

#include "tfsim/types.hpp"

namespace tfsim {

/// Order-13 Pade threshold of the fixed-order scaling-and-squaring scheme.
inline constexpr Real kPadeTheta13 = 5.371920351148152;

/// Number of squarings the exponential performs for a given 1-norm:
/// 0 below theta_13, otherwise ceil(log2(norm / theta_13)).
int expm_cost_estimate(Real one_norm);

/// Matrix exponential via scaling and squaring with fixed Pade orders
/// {3, 5, 7, 9, 13} and the standard theta thresholds. No balancing or
/// other preprocessing; output is bit-reproducible for identical input.
Matrix expm(const Matrix& a);

/// Throws NumericGuardError on non-finite input. Provenance = PlainExpm.
TruncatedOperator expm(const TruncatedOperator& a);

}  // namespace tfsim
