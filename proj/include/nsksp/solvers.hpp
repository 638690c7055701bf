#pragma once

#include <span>

#include "nsksp/csr_matrix.hpp"
#include "nsksp/preconditioner.hpp"
#include "nsksp/solve_types.hpp"

namespace nsksp {

// All solvers use right preconditioning: they iterate on A M^{-1} y = b and
// return x = M^{-1} y, so the residual they monitor is that of A x = b.

/// Restarted GMRES(m) built on Arnoldi with modified Gram-Schmidt and Givens
/// least squares. One matvec per inner iteration.
SolveResult gmres_restarted(const CsrMatrix& a, std::span<const double> b,
                            const Preconditioner& m,
                            const SolveOptions& opts = {});

/// BiCGSTAB; shadow residual fixed to r_0. Two matvecs per iteration.
SolveResult bicgstab(const CsrMatrix& a, std::span<const double> b,
                     const Preconditioner& m, const SolveOptions& opts = {});

/// Transpose-free QMR. History reports the quasi-residual bound
/// tau_m sqrt(m + 1) after each pair of half-steps.
SolveResult tfqmr(const CsrMatrix& a, std::span<const double> b,
                  const Preconditioner& m, const SolveOptions& opts = {});

/// QMR-smoothed BiCGSTAB (local then global quasi-minimization per
/// iteration). History reports the quasi-residual bound.
SolveResult qmrcgstab(const CsrMatrix& a, std::span<const double> b,
                      const Preconditioner& m, const SolveOptions& opts = {});

SolveResult solve(SolverKind kind, const CsrMatrix& a,
                  std::span<const double> b, const Preconditioner& m,
                  const SolveOptions& opts = {});

/// ||b - A x|| / ||b||, or ||A x|| when b = 0. One matvec, counted as a
/// matvec in `counters` when given.
double true_residual_check(const CsrMatrix& a, std::span<const double> b,
                           std::span<const double> x,
                           OpCounters* counters = nullptr);

}  // namespace nsksp
