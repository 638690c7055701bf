#pragma once

#include <span>

#include "nsksp/csr_matrix.hpp"

namespace nsksp {

/// Incomplete LU factors restricted to the pattern of A. `lower` holds the
/// strictly lower part (unit diagonal implied); `upper` holds the upper part
/// including the diagonal, which is the first entry of each row.
struct IluFactors {
  CsrMatrix lower;
  CsrMatrix upper;
  int shifted_pivots = 0;
};

struct Ilu0Options {
  /// Replace |pivot| < 1e-14 * max|a_ij| (row max) by a signed floor instead
  /// of throwing ZeroPivot.
  bool pivot_shift = false;
};

/// IKJ-ordered ILU(0). Throws RowError(ZeroDiagonal) if a diagonal entry is
/// missing from the pattern and RowError(ZeroPivot) on a vanishing pivot.
IluFactors ilu0_factor(const CsrMatrix& a, Ilu0Options opts = {});

/// w = U^{-1} (L^{-1} v). v and w may alias.
void ilu_apply(const IluFactors& f, std::span<const double> v,
               std::span<double> w);

}  // namespace nsksp
