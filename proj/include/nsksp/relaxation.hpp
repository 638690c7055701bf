#pragma once

#include <span>

#include "nsksp/csr_matrix.hpp"

namespace nsksp {

/// Diagonal of A; throws RowError(ZeroDiagonal) on the first zero or
/// missing diagonal entry.
Vector checked_diagonal(const CsrMatrix& a);

/// w = D^{-1} v.
void jacobi_apply(std::span<const double> diag, std::span<const double> v,
                  std::span<double> w);

/// One forward sweep solving (D/omega + L) w = v, in natural row order.
/// omega = 1 is Gauss-Seidel. Requires 0 < omega < 2.
void gs_sor_apply(const CsrMatrix& a, double omega, std::span<const double> v,
                  std::span<double> w);

/// In-place relaxation x <- x + omega D^{-1}(b - A x) applied row by row
/// (forward or backward order), using updated values as soon as they are
/// available. With x = 0 and forward order this equals gs_sor_apply.
void sor_sweep(const CsrMatrix& a, std::span<const double> diag, double omega,
               std::span<const double> b, std::span<double> x, bool forward);

}  // namespace nsksp
