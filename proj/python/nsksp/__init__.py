"""Sparse Krylov solvers (GMRES, BiCGSTAB, TFQMR, QMRCGSTAB) with Jacobi,
SOR, ILU(0) and algebraic multigrid preconditioners."""

from ._core import (
    CsrMatrix,
    NskspError,
    apply_preconditioner,
    flop_model,
    generate,
    read_matrix_market,
    read_vector_market,
    run_suite,
    solve,
    write_matrix_market,
    write_vector_market,
)

__all__ = [
    "CsrMatrix",
    "NskspError",
    "apply_preconditioner",
    "flop_model",
    "generate",
    "read_matrix_market",
    "read_vector_market",
    "run_suite",
    "solve",
    "write_matrix_market",
    "write_vector_market",
]
