"""Dense complex matrix primitives.

Every higher-level routine in the package reduces range and kernel
questions to the singular value decomposition computed here, under a
single :class:`Tolerances` policy.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Vectors are 1-d arrays. The inner product is linear in the first slot
and conjugate-linear in the second, so ``rank_one(e, f) @ x == vdot(f, x) * e``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "SvdFactors",
    "Subspace",
    "NumericalFailure",
    "as_matrix",
    "as_vector",
    "svd",
    "numerical_rank",
    "range_basis",
    "kernel_basis",
    "range_projector",
    "kernel_projector",
    "rank_one",
    "line_projector",
    "op_norm",
    "pinv",
    "adjoint",
]


class NumericalFailure(ArithmeticError):
    """Raised when a factorization does not converge."""


@dataclass(frozen=True)
class Tolerances:
    """Numerical policy shared by all routines.

    Parameters
    ----------
    rank_rel : float
        Singular values at or below ``rank_rel * sigma_max`` count as zero.
    residual_abs : float
        Absolute residual budget; most checks scale it by ``1 + norm``.
    line_tol : float
        Relative distance under which two vectors span the same line.
    """

    rank_rel: float = 1e-10
    residual_abs: float = 1e-8
    line_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel", "residual_abs", "line_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")

    def as_dict(self) -> dict:
        return {
            "rank_rel": self.rank_rel,
            "residual_abs": self.residual_abs,
            "line_tol": self.line_tol,
        }


DEFAULT_TOL = Tolerances()


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-d complex array, rejecting NaN/Inf."""
    arr = np.asarray(M, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def adjoint(M: np.ndarray) -> np.ndarray:
    return M.conj().T


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD ``M = left @ diag(singulars) @ adjoint(right)``."""

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singulars) @ adjoint(self.right)


@dataclass(frozen=True)
class Subspace:
    """Subspace given by an orthonormal basis (columns); may have zero columns."""

    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    def projector(self) -> np.ndarray:
        return self.basis @ adjoint(self.basis)


def svd(M) -> SvdFactors:
    """Thin singular value decomposition.

    Raises
    ------
    NumericalFailure
        If LAPACK fails to converge.
    """
    M = as_matrix(M)
    try:
        U, s, Vh = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    return SvdFactors(U, s, adjoint(Vh))


def _rank_from_singulars(s: np.ndarray, tol: Tolerances) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_rel * s[0]))


def numerical_rank(M, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol.rank_rel * sigma_max``."""
    return _rank_from_singulars(np.linalg.svd(as_matrix(M), compute_uv=False), tol)


def range_basis(M, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    f = svd(M)
    r = _rank_from_singulars(f.singulars, tol)
    return Subspace(f.left[:, :r])


def kernel_basis(M, tol: Tolerances = DEFAULT_TOL) -> Subspace:
    """Orthonormal basis of ``ker M`` (as a subspace of the column space)."""
    M = as_matrix(M)
    try:
        _, s, Vh = np.linalg.svd(M, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    r = _rank_from_singulars(s, tol)
    return Subspace(adjoint(Vh)[:, r:])


def range_projector(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection onto ``ran M``."""
    return range_basis(M, tol).projector()


def kernel_projector(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projection onto ``ker M``.

    ``I - kernel_projector(M)`` projects onto ``[ker M]^perp = ran M*``.
    """
    M = as_matrix(M)
    f = svd(M)
    r = _rank_from_singulars(f.singulars, tol)
    V = f.right[:, :r]
    return np.eye(M.shape[1], dtype=np.complex128) - V @ adjoint(V)


def rank_one(e, f) -> np.ndarray:
    """The operator ``x -> <x, f> e``, i.e. ``e @ f^*``."""
    e = as_vector(e, "e")
    f = as_vector(f, "f")
    if e.shape != f.shape:
        raise ValueError(f"e and f must have the same dimension, got {e.size} and {f.size}")
    return _outer_conj(e, f)


def _outer_conj(e: np.ndarray, f: np.ndarray) -> np.ndarray:
    # Real arithmetic in separate passes (no fused multiply-add), so that
    # adjoint(rank_one(e, f)) equals rank_one(f, e) bit for bit.
    er, ei, fr, fi = e.real, e.imag, f.real, f.imag
    re = np.outer(er, fr) + np.outer(ei, fi)
    im = np.outer(ei, fr) - np.outer(er, fi)
    return re + 1j * im


def line_projector(e) -> np.ndarray:
    """Orthogonal projection onto the line spanned by ``e``."""
    e = as_vector(e, "e")
    nrm2 = float(np.vdot(e, e).real)
    if nrm2 == 0.0:
        raise ValueError("line_projector needs a non-zero vector")
    return _outer_conj(e, e) / nrm2


def op_norm(M) -> float:
    """Spectral norm (largest singular value)."""
    s = np.linalg.svd(as_matrix(M), compute_uv=False)
    return float(s[0]) if s.size else 0.0


def pinv(M, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """SVD pseudoinverse with the package's rank cutoff."""
    f = svd(M)
    r = _rank_from_singulars(f.singulars, tol)
    return (f.right[:, :r] / f.singulars[:r]) @ adjoint(f.left[:, :r])
