"""Classical operators obtained as reduced solutions.

* Moore-Penrose inverse: the reduced solution of ``A X = P_ran A``.
* Parallel sum of PSD ``A, B``: ``A (A + B)^+ B``.
* Shorted operator of a PSD block matrix ``[[A, B], [B^*, C]]``:
  ``A - X^* C X`` with ``X`` the reduced solution of ``C X = B^*``.

Each one routes through :func:`douglas_lab.douglas.douglas_solve`.
"""

from __future__ import annotations

import numpy as np

from .douglas import douglas_solve
from .linalg import DEFAULT_TOL, Tolerances, adjoint, as_matrix, op_norm, range_projector

__all__ = [
    "NotPSD",
    "psd_part",
    "moore_penrose",
    "penrose_residuals",
    "parallel_sum",
    "schur_complement",
]


class NotPSD(ValueError):
    """Input is not Hermitian positive semidefinite within tolerance."""

    def __init__(self, name: str, min_eigenvalue: float, hermitian_gap: float = 0.0):
        super().__init__(
            f"{name} is not PSD: min eigenvalue {min_eigenvalue:.3e}, "
            f"hermitian gap {hermitian_gap:.3e}"
        )
        self.min_eigenvalue = min_eigenvalue
        self.hermitian_gap = hermitian_gap


def psd_part(M, tol: Tolerances = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    """Validate ``M`` as PSD and return it with tiny negative eigenvalues clipped.

    Accepts ``M`` if it is Hermitian within ``residual_abs * (1 + ||M||)``
    and its smallest eigenvalue is at least ``-residual_abs * ||M||``.
    Inputs without negative eigenvalues are returned unchanged.
    """
    M = as_matrix(M, name)
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got {M.shape}")
    scale = op_norm(M)
    herm_gap = op_norm(M - adjoint(M))
    w, V = np.linalg.eigh(0.5 * (M + adjoint(M)))
    if herm_gap > tol.residual_abs * (1.0 + scale) or w[0] < -tol.residual_abs * scale:
        raise NotPSD(name, float(w[0]), herm_gap)
    if w[0] >= 0.0:
        return M
    return (V * np.clip(w, 0.0, None)) @ adjoint(V)


def moore_penrose(A, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Pseudoinverse as the reduced solution of ``A X = P_ran A``."""
    A = as_matrix(A, "A")
    return douglas_solve(A, range_projector(A, tol), tol).solution


def penrose_residuals(A, X) -> dict[str, float]:
    """Spectral-norm residuals of the four Penrose identities."""
    A = as_matrix(A, "A")
    X = as_matrix(X, "X")
    AX = A @ X
    XA = X @ A
    return {
        "axa": op_norm(AX @ A - A),
        "xax": op_norm(XA @ X - X),
        "ax_hermitian": op_norm(AX - adjoint(AX)),
        "xa_hermitian": op_norm(XA - adjoint(XA)),
    }


def parallel_sum(A, B, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Parallel sum ``A : B = A (A + B)^+ B`` of two PSD matrices.

    Raises
    ------
    NotPSD
        If either input fails the PSD check.
    """
    A = psd_part(A, tol, "A")
    B = psd_part(B, tol, "B")
    if A.shape != B.shape:
        raise ValueError(f"A and B must have equal shape, got {A.shape} and {B.shape}")
    return A @ moore_penrose(A + B, tol) @ B


def schur_complement(M, split: int, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Shorted operator of ``M = [[A, B], [B^*, C]]`` onto the leading block.

    ``split`` is the size of ``A``. For PSD ``M`` the inclusion
    ``ran B^* ⊆ ran C`` always holds, but it is still checked; a failure
    indicates a numerically marginal instance.

    Raises
    ------
    NotPSD
        If ``M`` fails the PSD check.
    NotSolvable
        If ``ran B^* ⊆ ran C`` fails numerically.
    """
    M = psd_part(M, tol, "M")
    n = M.shape[0]
    if not (0 < split < n):
        raise ValueError(f"split must satisfy 0 < split < {n}, got {split}")
    A = M[:split, :split]
    Bb = M[:split, split:]
    C = M[split:, split:]
    X = douglas_solve(C, adjoint(Bb), tol).solution
    return A - adjoint(X) @ C @ X
