#pragma once

#include "tfsim/types.hpp"

#include <utility>
#include <vector>

namespace tfsim::dispmat {

/// Associated Laguerre polynomial L_n^(alpha)(x) by the ascending
/// three-term recurrence in n. Stable for x >= 0 and the integer alpha
/// used by the displacement closed form. May overflow to Inf for very
/// large n*x; callers guard.
Real laguerre_assoc(int n, int alpha, Real x);

/// Cells of the closed-form evaluation where a floating-point guard fired.
/// Flagged cells are zeroed in the output, never NaN. A cell whose
/// evaluation hits 0 * inf appears in both lists and in invalid_cells.
struct GuardReport {
  std::vector<std::pair<int, int>> underflow_cells;
  std::vector<std::pair<int, int>> overflow_cells;
  std::vector<std::pair<int, int>> invalid_cells;

  bool empty() const {
    return underflow_cells.empty() && overflow_cells.empty() && invalid_cells.empty();
  }
};

/// Truncated displacement matrix from the closed form: lower triangle
/// evaluated with the factorial ratio kept in log space, upper triangle
/// recovered from the (-1)^(m-n) conjugate symmetry.
std::pair<TruncatedOperator, GuardReport> displacement_closed_form(Complex xi, int dim);

/// Truncated displacement matrix built by the element recurrence,
/// column-major fill. Amplifies rounding error in high columns; kept as a
/// comparison subject and structural reference. Must not feed the circuit.
TruncatedOperator displacement_recurrent(Complex xi, int dim);

}  // namespace tfsim::dispmat
