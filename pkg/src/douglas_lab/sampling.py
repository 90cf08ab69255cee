"""Seeded random constructions used by the experiments and the tests."""

from __future__ import annotations

import numpy as np

from .linalg import DEFAULT_TOL, Tolerances, adjoint, kernel_projector


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for trial ``index`` of a run seeded with ``seed``.

    Depends only on ``(seed, index)``, so trials can be evaluated in any
    order or in parallel with identical results.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), int(index)]))


def gaussian(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    return gaussian(rng, n)


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-distributed unitary (QR of a Gaussian with phase correction)."""
    Q, R = np.linalg.qr(gaussian(rng, n, n))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_rank(rng: np.random.Generator, m: int, n: int, r: int) -> np.ndarray:
    """Gaussian ``m x n`` matrix of rank exactly ``r`` (almost surely)."""
    if r == 0:
        return np.zeros((m, n), dtype=np.complex128)
    return gaussian(rng, m, r) @ gaussian(rng, r, n)


def random_psd(rng: np.random.Generator, n: int, r: int | None = None, shift: float = 0.0) -> np.ndarray:
    """``G G^*`` with ``G`` of ``r`` columns, plus ``shift * I``."""
    r = n if r is None else r
    G = gaussian(rng, n, r)
    return G @ adjoint(G) + shift * np.eye(n)


def random_projection(rng: np.random.Generator, n: int, r: int | None = None) -> np.ndarray:
    """Orthogonal projection onto a random subspace of dimension ``r`` (random if None)."""
    if r is None:
        r = int(rng.integers(1, n))
    Q, _ = np.linalg.qr(gaussian(rng, n, r))
    return Q @ adjoint(Q)


def random_douglas_triple(
    rng: np.random.Generator, dim: int, tol: Tolerances = DEFAULT_TOL, rank: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(B, X0, A)`` with ``ran X0 ⊆ [ker B]^perp`` and ``A = B X0``.

    ``B`` has rank drawn uniformly from ``1..dim`` unless ``rank`` is given.
    """
    r = int(rng.integers(1, dim + 1)) if rank is None else rank
    B = random_rank(rng, dim, dim, r)
    R = gaussian(rng, dim, dim)
    X0 = R - kernel_projector(B, tol) @ R
    return B, X0, B @ X0
