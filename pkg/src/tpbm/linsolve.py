"""Matrix-free 7-point operators on the structured grid and a CG solver.

Both the optical diffusion solve and the bioheat solve reduce to symmetric
positive-definite systems of the form

    diag * x[i] - sum_faces G_face * x[neighbor] = b

with nonnegative face conductances G and diag dominating the couplings.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SolverError(RuntimeError):
    """Iterative solve failed to converge."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


@dataclass
class StructuredOperator:
    """SPD 7-point operator: diagonal plus face couplings along each axis.

    gx has shape (nx-1, ny, nz) and couples cells (i, j, k) and
    (i+1, j, k); gy and gz analogously.
    """

    diag: np.ndarray
    gx: np.ndarray
    gy: np.ndarray
    gz: np.ndarray

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] -= self.gx * x[1:]
        y[1:] -= self.gx * x[:-1]
        y[:, :-1] -= self.gy * x[:, 1:]
        y[:, 1:] -= self.gy * x[:, :-1]
        y[:, :, :-1] -= self.gz * x[:, :, 1:]
        y[:, :, 1:] -= self.gz * x[:, :, :-1]
        return y


def conjugate_gradient(
    op: StructuredOperator,
    b: np.ndarray,
    tol: float = 1e-8,
    max_iter: int = 20000,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, dict]:
    """Jacobi-preconditioned CG; converges when ||r|| <= tol * ||b||.

    Returns (solution, info) with info = {"iterations", "residual"}.
    Raises SolverError if max_iter is exhausted, reporting the final
    relative residual.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return np.zeros_like(b), {"iterations": 0, "residual": 0.0}

    x = np.zeros_like(b) if x0 is None else x0.astype(b.dtype, copy=True)
    r = b - op.matvec(x)
    inv_diag = 1.0 / op.diag
    z = inv_diag * r
    p = z.copy()
    rz = float(np.vdot(r, z).real)
    res = float(np.linalg.norm(r)) / b_norm
    it = 0
    while res > tol:
        if it >= max_iter:
            raise SolverError(
                f"CG did not converge in {max_iter} iterations "
                f"(relative residual {res:.3e}, tol {tol:.1e})",
                residual=res,
            )
        ap = op.matvec(p)
        alpha = rz / float(np.vdot(p, ap).real)
        x += alpha * p
        r -= alpha * ap
        res = float(np.linalg.norm(r)) / b_norm
        z = inv_diag * r
        rz_new = float(np.vdot(r, z).real)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    return x, {"iterations": it, "residual": res}


def harmonic_face_values(cellwise: np.ndarray, axis: int) -> np.ndarray:
    """Harmonic mean of a positive cell-wise coefficient across interior
    faces along an axis (flux-continuous across material jumps)."""
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    a = cellwise[tuple(lo)]
    b = cellwise[tuple(hi)]
    return 2.0 * a * b / (a + b)
