"""Deterministic conjugate-gradient solution of assembled systems.

Jacobi preconditioning is the default: face transmissibilities scale like
rho(face), so rows near Sigma can be orders of magnitude lighter or
heavier than bulk rows, and diagonal scaling restores a usable condition
number without giving up determinism.

Pure weighted-Neumann systems are singular along constants; the right-hand
side is projected onto mean zero and the returned field is gauged to mean
zero (the residual is unaffected since the matrix kills constants).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .assembly import SparseSystem
from .errors import SolverError


@dataclass(frozen=True)
class SolveOptions:
    rel_tol: float = 1e-10
    max_iter: int | None = None  # default 50 * dimension
    preconditioner: str = "jacobi"

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be > 0")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.preconditioner not in ("none", "jacobi"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


def solve(system: SparseSystem, opts: SolveOptions | None = None) -> np.ndarray:
    """Solve to the residual contract ||S u - b|| <= rel_tol ||b||.

    Returns the solution shaped like the grid.  Raises SolverError with the
    final residual when the iteration cap (default 50 * dimension) is hit.
    """
    opts = opts or SolveOptions()
    mat = system.matrix
    b = system.rhs.copy()
    n = system.dimension
    max_iter = opts.max_iter or 50 * n

    if system.pure_neumann:
        b -= b.mean()

    norm_b = np.linalg.norm(b)
    if norm_b == 0:
        return np.zeros(system.grid.shape)

    M = None
    if opts.preconditioner == "jacobi":
        d = mat.diagonal()
        if np.any(d <= 0):
            raise SolverError("nonpositive diagonal; system not assembled "
                              "as an elliptic operator")
        M = sparse.diags(1.0 / d)

    x, info = spla.cg(mat, b, rtol=opts.rel_tol, atol=0.0,
                      maxiter=max_iter, M=M)
    if system.pure_neumann:
        x -= x.mean()
    res = np.linalg.norm(mat @ x - b)
    if info != 0 or res > opts.rel_tol * norm_b * (1 + 1e-12):
        raise SolverError(
            f"no convergence within {max_iter} iterations: "
            f"|residual| = {res:.3e} vs bound {opts.rel_tol * norm_b:.3e}"
        )
    return x.reshape(system.grid.shape)